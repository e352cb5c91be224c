#!/usr/bin/env python3
"""Plot the trace CSVs written by `mcqr diagnose` (one PNG per quantile level)."""
import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def plot_dir(trace_dir: pathlib.Path, out: pathlib.Path) -> None:
    files = sorted(trace_dir.glob("*.csv"))
    cols = 3
    rows = -(-len(files) // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 2.2 * rows), squeeze=False)
    for ax, f in zip(axes.flat, files):
        df = pd.read_csv(f)
        for chain, g in df.groupby("chain"):
            ax.plot(g["iter"], g["value"], lw=0.4, label=f"chain {chain}")
        ax.set_title(f.stem, fontsize=9)
    for ax in list(axes.flat)[len(files):]:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    print(f"wrote {out}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("diagnose_dir", type=pathlib.Path, help="output directory of `mcqr diagnose`")
    args = ap.parse_args()
    for d in sorted(args.diagnose_dir.glob("traces_tau*")):
        plot_dir(d, args.diagnose_dir / f"{d.name}.png")


if __name__ == "__main__":
    main()
