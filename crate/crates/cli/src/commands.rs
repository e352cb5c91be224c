use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mcqr::data::{
    generate_synthetic_table, parse_config, read_draws_csv, read_long_table, write_draws_csv, write_long_table,
    NoiseMode, RunConfig, SyntheticSpec,
};
use mcqr::design::build_design_matrix;
use mcqr::diagnostics::{split_rhat, SummaryTable};
use mcqr::gibbs::{chain_rng, run_chains};
use mcqr::{rhat, summarize as summarize_draws, ChainDraws, DesignConfig, McqrError, PosteriorDraws, QuantileSpec};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_at, CliError, CliResult};
use crate::manifest::{
    config_hash, manifest_path, now_rfc3339, sha256_hex, ChainRecord, FitRecord, RunManifest, MANIFEST_FILE,
};
use crate::{DiagnoseArgs, FitArgs, SimulateArgs, SummarizeArgs};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    Ok(())
}

fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_at(path))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(io_at(path))?;
    Ok(())
}

#[derive(Serialize)]
struct SimulatedFile {
    replication: usize,
    seed: u64,
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct SimulateManifest {
    base_seed: u64,
    spec: SyntheticSpec,
    created: String,
    files: Vec<SimulatedFile>,
}

/// Seed of replication `r`, drawn from stream `r` of the base seed.
pub fn replication_seed(base: u64, r: usize) -> u64 {
    chain_rng(base, r).random()
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    if args.replications == 0 {
        return Err(CliError::usage("--replications must be at least 1"));
    }
    let noise = if args.noiseless {
        NoiseMode::Noiseless
    } else {
        QuantileSpec::new(args.tau).map_err(|e| CliError::usage(format!("--tau: {e}")))?;
        NoiseMode::Mal { tau: args.tau }
    };
    let base = SyntheticSpec {
        n: args.n,
        seed: args.seed,
        noise,
        ..SyntheticSpec::default()
    };
    create_dir(&args.out)?;
    let mut files = Vec::with_capacity(args.replications);
    for r in 0..args.replications {
        let seed = replication_seed(args.seed, r);
        let table = generate_synthetic_table(&SyntheticSpec { seed, ..base.clone() })?;
        let name = PathBuf::from(format!("rep{r:03}.csv"));
        let mut buf = Vec::new();
        write_long_table(&table, &mut buf)?;
        let path = args.out.join(&name);
        fs::write(&path, &buf).map_err(io_at(&path))?;
        files.push(SimulatedFile {
            replication: r,
            seed,
            path: name,
            sha256: sha256_hex(&buf),
        });
    }
    let config = RunConfig {
        design: Some(DesignConfig::synthetic()),
        ..RunConfig::default()
    };
    write_json(&args.out.join("config.json"), &config)?;
    write_json(
        &args.out.join("simulate.json"),
        &SimulateManifest {
            base_seed: args.seed,
            spec: base,
            created: now_rfc3339(),
            files,
        },
    )?;
    log::info!("wrote {} dataset(s) to {}", args.replications, args.out.display());
    Ok(())
}

fn config_from_flags(args: &FitArgs) -> CliResult<RunConfig> {
    let mut config = match &args.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(taus) = &args.tau {
        config.tau = taus
            .iter()
            .map(|&t| QuantileSpec::new(t).map_err(|e| CliError::usage(format!("--tau: {e}"))))
            .collect::<CliResult<_>>()?;
    }
    let g = &mut config.gibbs;
    if let Some(v) = args.n_draws {
        g.n_draws = v;
    }
    if let Some(v) = args.burn_in {
        g.burn_in = v;
    }
    if let Some(v) = args.chains {
        g.n_chains = v;
    }
    if let Some(v) = args.seed {
        g.seed = v;
    }
    if let Some(b) = &args.baseline {
        if let Some(design) = config.design.as_mut() {
            design.baseline = b.clone();
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn draw_file_name(tau: f64, chain: usize) -> PathBuf {
    PathBuf::from(format!("draws_tau{tau}_chain{chain}.csv"))
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let (mut config, data_path, expected_sha) = match &args.manifest {
        Some(m) => {
            let m = RunManifest::read(&manifest_path(m))?;
            (m.config, m.data_path, Some(m.data_sha256))
        }
        None => {
            let data = args.data.clone().expect("clap requires --data without --manifest");
            (config_from_flags(args)?, data, None)
        }
    };
    let bytes = fs::read(&data_path).map_err(io_at(&data_path))?;
    let data_sha256 = sha256_hex(&bytes);
    if expected_sha.is_some_and(|s| s != data_sha256) {
        return Err(McqrError::ingestion(0, format!("{} changed since the manifest was written", data_path.display())).into());
    }
    let table = read_long_table(bytes.as_slice())?;
    let design = match config.design.take() {
        Some(d) => d,
        None => {
            let baseline = args.baseline.clone().ok_or_else(|| {
                CliError::usage("no design: pass --baseline or a config with a `design` section")
            })?;
            let names: Vec<&str> = table.covariates.iter().map(String::as_str).collect();
            DesignConfig::new(baseline).with_shared(&names)
        }
    };
    let data = build_design_matrix(&table, &design)?;
    config.design = Some(design);
    let prior = config.prior.resolve(data.p(), data.k())?;
    log::info!(
        "{} observations, {} alternatives besides the baseline, {} coefficients",
        data.n(),
        data.p(),
        data.k()
    );

    create_dir(&args.out)?;
    let started = now_rfc3339();
    let runs: Vec<Vec<ChainDraws>> = config
        .tau
        .par_iter()
        .map(|q| run_chains(&data, &prior, *q, &config.gibbs))
        .collect::<mcqr::Result<_>>()?;

    let mut fits = Vec::with_capacity(runs.len());
    for (q, chains) in config.tau.iter().zip(&runs) {
        let mut records = Vec::with_capacity(chains.len());
        for chain in chains {
            let name = draw_file_name(q.tau(), chain.chain_id);
            let path = args.out.join(&name);
            write_draws_csv(chain, create_file(&path)?)?;
            if chain.stats.total_stalls() > 0 {
                log::warn!("tau={} chain {}: {} stalled scale updates", q.tau(), chain.chain_id, chain.stats.total_stalls());
            }
            records.push(ChainRecord::new(chain.chain_id, name, &chain.stats));
        }
        fits.push(FitRecord {
            tau: q.tau(),
            chains: records,
        });
    }
    let manifest = RunManifest {
        config_hash: config_hash(&config)?,
        seed: config.gibbs.seed,
        taus: config.taus(),
        data_path: fs::canonicalize(&data_path).map_err(io_at(&data_path))?,
        data_sha256,
        started,
        finished: now_rfc3339(),
        config,
        fits,
    };
    let out = args.out.join(MANIFEST_FILE);
    manifest.write(&out)?;
    log::info!("wrote {}", out.display());
    Ok(())
}

/// Draws of every chain of one fit, with the iteration numbers of each chain.
fn load_fit(base: &Path, fit: &FitRecord) -> CliResult<(PosteriorDraws, Vec<Vec<usize>>)> {
    let mut names: Option<Vec<String>> = None;
    let mut chains = Vec::with_capacity(fit.chains.len());
    let mut iters = Vec::with_capacity(fit.chains.len());
    for rec in &fit.chains {
        let path = base.join(&rec.path);
        let store = read_draws_csv(File::open(&path).map_err(io_at(&path))?)?;
        match &names {
            Some(n) if *n != store.names => {
                return Err(McqrError::Diagnostics(format!("{}: parameters differ from the other chains", path.display())).into())
            }
            Some(_) => {}
            None => names = Some(store.names.clone()),
        }
        chains.push(store.draws);
        iters.push(store.iters);
    }
    Ok((PosteriorDraws::new(names.unwrap_or_default(), chains, true)?, iters))
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn summarize(args: &SummarizeArgs) -> CliResult<()> {
    let path = manifest_path(&args.manifest);
    let manifest = RunManifest::read(&path)?;
    let base = manifest_dir(&path);
    let per_tau = manifest
        .fits
        .iter()
        .map(|fit| Ok((fit.tau, summarize_draws(&load_fit(&base, fit)?.0, &[])?)))
        .collect::<CliResult<Vec<_>>>()?;
    let table = SummaryTable::new(&per_tau, args.median);
    print!("{}", table.to_text());
    if let Some(out) = &args.out {
        table.write_csv(create_file(out)?)?;
    }
    Ok(())
}

/// File-system friendly form of a parameter name: `phi[1,2]` becomes `phi_1_2`.
pub fn file_stem(param: &str) -> String {
    param
        .chars()
        .filter_map(|c| match c {
            '[' | ',' => Some('_'),
            ']' => None,
            c => Some(c),
        })
        .collect()
}

pub fn diagnose(args: &DiagnoseArgs) -> CliResult<()> {
    let path = manifest_path(&args.manifest);
    let manifest = RunManifest::read(&path)?;
    let base = manifest_dir(&path);
    let out = args.out.clone().unwrap_or_else(|| base.clone());
    create_dir(&out)?;
    for fit in &manifest.fits {
        let (draws, iters) = load_fit(&base, fit)?;
        let report = if args.split { split_rhat(&draws)? } else { rhat(&draws)? };
        println!("tau = {}", fit.tau);
        print!("{}", report.to_text());
        report.write_csv(create_file(&out.join(format!("rhat_tau{}.csv", fit.tau)))?)?;

        let trace_dir = out.join(format!("traces_tau{}", fit.tau));
        create_dir(&trace_dir)?;
        for (p, name) in draws.names.iter().enumerate() {
            let mut w = csv::Writer::from_writer(create_file(&trace_dir.join(format!("{}.csv", file_stem(name))))?);
            w.write_record(["iter", "chain", "value"]).map_err(McqrError::from)?;
            for (c, chain) in draws.per_chain(p).iter().enumerate() {
                for (t, v) in chain.iter().enumerate() {
                    w.write_record([
                        iters[c][t].to_string(),
                        fit.chains[c].chain_id.to_string(),
                        format!("{v:.16e}"),
                    ])
                    .map_err(McqrError::from)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
