#!/usr/bin/env python3
"""Report deviations between a `mcqr summarize --out` table and reference values.

The reference CSV uses the same layout: a `param` column followed by
`mean_tau{t}` / `sd_tau{t}` columns. Rows are matched by name, or by position
with --by-position when the reference uses covariate labels instead of
`beta[k]`. Deviations are printed only; nothing passes or fails.
"""
import argparse
import sys

import pandas as pd


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("ours", help="table written by `mcqr summarize --out`")
    ap.add_argument("reference", help="reference table in the same layout")
    ap.add_argument("--by-position", action="store_true", help="match rows by order instead of name")
    args = ap.parse_args()

    ours = pd.read_csv(args.ours)
    ref = pd.read_csv(args.reference)
    if args.by_position:
        ours = ours.iloc[: len(ref)].reset_index(drop=True)
        labels = ref["param"].astype(str) + " (" + ours["param"].astype(str) + ")"
        ours["param"] = ref["param"]
    else:
        labels = None
    cols = [c for c in ref.columns if c != "param" and c in ours.columns]
    if not cols:
        print("no common columns", file=sys.stderr)
        return 1
    merged = ref.merge(ours, on="param", suffixes=("_ref", "_ours"))
    if merged.empty:
        print("no common rows; try --by-position", file=sys.stderr)
        return 1
    out = pd.DataFrame({"param": labels if labels is not None else merged["param"]})
    for c in cols:
        out[c + "_ref"] = merged[c + "_ref"]
        out[c + "_ours"] = merged[c + "_ours"]
        out[c + "_diff"] = merged[c + "_ours"] - merged[c + "_ref"]
    with pd.option_context("display.width", 200, "display.max_columns", None):
        print(out.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    diffs = out[[c + "_diff" for c in cols]].abs()
    print(f"\nlargest absolute deviation: {diffs.max().max():.4f}")
    print(f"mean absolute deviation:    {diffs.stack().mean():.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
