//! Acceptance suite. Prints one PASS/FAIL line per criterion plus details.
//!
//! A FAIL is reported but does not fail `cargo test` unless
//! `MCQR_ACCEPTANCE_STRICT=1` is set. `MCQR_ACCEPTANCE_ONLY=3,4` runs a subset.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mcqr::data::{generate_synthetic, SyntheticSpec};
use mcqr::diagnostics::{mean, variance};
use mcqr::gibbs::{chain_rng, run_chain_with, ChainStats, Sampler};
use mcqr::linalg::{cholesky_jittered, correlation_from_covariance, is_spd};
use mcqr::samplers::{gig_mean, sample_gig, sample_inverse_wishart, sample_mvnormal, sample_truncnorm, GigParams, TruncInterval};
use mcqr::{
    choice_from_utilities, mal_log_density, DMatrix, DVector, rhat, run_chains, summarize, ChainDraws, ChainState, ChoiceDataset,
    GibbsConfig, MalParams, PosteriorDraws, PriorSpec, QuantileSpec,
};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

// Criterion 1 and 2: reduced-scale recovery study.
const RECOVERY_N: usize = 1000;
const RECOVERY_DRAWS: usize = 5000;
const RECOVERY_BURN_IN: usize = 1000;
const RECOVERY_CHAINS: usize = 2;
const RECOVERY_REPLICATIONS: usize = 10;
const RECOVERY_TOL: f64 = 0.25;
const REFERENCE_MEANS_TAU_HALF: [(&str, f64); 4] =
    [("beta[4]", 0.9305), ("beta[5]", 2.7985), ("beta[6]", 1.9131), ("beta[7]", 0.9543)];
const TAUS: [f64; 3] = [0.25, 0.5, 0.75];

// Criterion 3.
const GEWEKE_DRAWS: usize = 100_000;
const GEWEKE_BATCHES: usize = 50;
const GEWEKE_Z_MAX: f64 = 3.0;

// Criterion 4.
const ORACLE_DRAWS: usize = 1_000_000;
const ORACLE_SE: f64 = 3.0;
const IW_DRAWS: usize = 200_000;
const IW_REL_TOL: f64 = 0.03;
const MAL_MASS_TOL: f64 = 0.01;

// Criterion 5.
const SMOKE_ITERS: usize = 1000;
const TRACE_TOL: f64 = 1e-12;

// Criterion 6.
const RHAT_MAX: f64 = 1.1;

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
}

fn selected(id: usize) -> bool {
    match std::env::var("MCQR_ACCEPTANCE_ONLY") {
        Ok(list) => list.split(',').any(|s| s.trim().parse() == Ok(id)),
        Err(_) => true,
    }
}

struct RecoveryFit {
    replication: usize,
    tau: f64,
    chains: Vec<ChainDraws>,
}

impl RecoveryFit {
    fn draws(&self) -> PosteriorDraws {
        PosteriorDraws::from_chains(&self.chains).unwrap()
    }

    fn median(&self, name: &str) -> f64 {
        summarize(&self.draws(), &[]).unwrap().get(name).unwrap().median
    }
}

fn recovery_fits() -> Vec<RecoveryFit> {
    let started = Instant::now();
    let jobs: Vec<(usize, f64)> = (0..RECOVERY_REPLICATIONS).flat_map(|r| TAUS.map(|t| (r, t))).collect();
    jobs.into_par_iter()
        .map(|(r, tau)| {
            let data = generate_synthetic(&SyntheticSpec {
                n: RECOVERY_N,
                seed: 1000 + r as u64,
                ..SyntheticSpec::default()
            })
            .unwrap();
            let prior = PriorSpec::default_for(data.p(), data.k());
            let config = GibbsConfig {
                n_draws: RECOVERY_DRAWS,
                burn_in: RECOVERY_BURN_IN,
                n_chains: RECOVERY_CHAINS,
                seed: 2000 + r as u64,
                log_every: 0,
                ..GibbsConfig::default()
            };
            let chains = run_chains(&data, &prior, QuantileSpec::new(tau).unwrap(), &config).unwrap();
            eprintln!("  fitted replication {r} at tau={tau} ({:.0}s elapsed)", started.elapsed().as_secs_f64());
            RecoveryFit {
                replication: r,
                tau,
                chains,
            }
        })
        .collect()
}

fn criterion_recovery(fits: &[RecoveryFit]) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, want) in REFERENCE_MEANS_TAU_HALF {
        let medians: Vec<f64> = fits.iter().filter(|f| f.tau == 0.5).map(|f| f.median(name)).collect();
        let got = mean(&medians);
        let ok = (got - want).abs() <= RECOVERY_TOL;
        pass &= ok;
        details.push(format!(
            "{name}: mean of {} medians {got:.4} (sd {:.4}), reference {want}, |diff| {:.4} {}",
            medians.len(),
            variance(&medians).sqrt(),
            (got - want).abs(),
            if ok { "ok" } else { "outside" }
        ));
    }
    let (mut proposals, mut draws) = (0u64, 0u64);
    for f in fits {
        for c in &f.chains {
            proposals += c.stats.gig_proposals;
            draws += c.stats.gig_draws;
        }
    }
    details.push(format!("GIG acceptance over all fits: {:.3}", draws as f64 / proposals as f64));
    Outcome {
        id: 1,
        title: "recovery of covariate coefficients at tau=0.5",
        pass,
        details,
    }
}

fn criterion_monotone(fits: &[RecoveryFit]) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["beta[1]", "beta[2]", "beta[3]"] {
        let by_tau: Vec<f64> = TAUS
            .iter()
            .map(|&t| mean(&fits.iter().filter(|f| f.tau == t).map(|f| f.median(name)).collect::<Vec<_>>()))
            .collect();
        let ok = by_tau.windows(2).all(|w| w[0] < w[1]);
        pass &= ok;
        let per_rep = (0..RECOVERY_REPLICATIONS)
            .filter(|&r| {
                let m: Vec<f64> = TAUS
                    .iter()
                    .map(|&t| fits.iter().find(|f| f.tau == t && f.replication == r).unwrap().median(name))
                    .collect();
                m.windows(2).all(|w| w[0] < w[1])
            })
            .count();
        details.push(format!(
            "{name}: mean medians at tau 0.25/0.5/0.75 = {:.4} / {:.4} / {:.4}; increasing in {per_rep}/{RECOVERY_REPLICATIONS} replications",
            by_tau[0], by_tau[1], by_tau[2]
        ));
    }
    Outcome {
        id: 2,
        title: "intercept medians strictly increase in tau",
        pass,
        details,
    }
}

// ---- Geweke joint test -------------------------------------------------------------

fn geweke_prior(p: usize, k: usize) -> PriorSpec {
    let mut prior = PriorSpec::default_for(p, k);
    prior.eta = 6.0;
    prior.k_shape = 10.0;
    prior.alpha = 9.0;
    prior
}

fn prior_draw(prior: &PriorSpec, state: &mut ChainState, rng: &mut impl Rng) {
    state.beta = sample_mvnormal(&prior.b0, &prior.b0_cov, rng).unwrap();
    state.phi = correlation_from_covariance(&sample_inverse_wishart(prior.eta, &prior.phi0, rng).unwrap());
    let gamma = Gamma::new(prior.k_shape, 1.0 / prior.alpha).unwrap();
    state.delta = (0..prior.p()).map(|_| 1.0 / gamma.sample(rng)).collect();
}

/// Fresh mixing weights, utilities and choices given the parameters in `state`.
fn simulate_data(data: &mut ChoiceDataset, state: &mut ChainState, q: &QuantileSpec, rng: &mut impl Rng) {
    let p = data.p();
    let l = cholesky_jittered(&q.sigma(&state.phi), 0.0, "sigma").unwrap().l();
    for i in 0..data.n() {
        let w: f64 = Exp1.sample(rng);
        let e = &l * DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
        let xb = data.linear_predictor(i, state.beta.as_slice());
        let row: Vec<f64> = (0..p)
            .map(|j| xb[j] + w * state.delta[j] * q.xi() + w.sqrt() * state.delta[j] * e[j])
            .collect();
        for (j, v) in row.iter().enumerate() {
            state.ystar[(i, j)] = *v;
        }
        state.w[i] = w;
        data.y[i] = choice_from_utilities(&row);
    }
}

fn geweke_stats(state: &ChainState) -> Vec<f64> {
    let mut v: Vec<f64> = state.beta.iter().copied().collect();
    v.push(state.phi[(0, 1)]);
    v.extend_from_slice(&state.delta);
    let squares: Vec<f64> = v.iter().map(|x| x * x).collect();
    v.extend(squares);
    v
}

fn criterion_geweke() -> Outcome {
    let (n, p, k, tau) = (20, 2, 3, 0.3);
    let mut rng = chain_rng(77, 0);
    let x: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| (0..p).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
        .collect();
    let mut data = ChoiceDataset::new(
        "0".into(),
        vec!["1".into(), "2".into()],
        vec!["x1".into(), "x2".into(), "x3".into()],
        (0..n).map(|i| i.to_string()).collect(),
        vec![0; n],
        x,
    )
    .unwrap();
    let prior = geweke_prior(p, k);
    let q = QuantileSpec::new(tau).unwrap();
    // The trace rescaling is a reparameterization, not a draw from a conditional of this joint.
    let config = GibbsConfig {
        trace_constraint: false,
        n_draws: 1,
        burn_in: 0,
        n_chains: 1,
        log_every: 0,
        ..GibbsConfig::default()
    };

    let mut state = ChainState::initial(&data, &prior);
    let forward: Vec<Vec<f64>> = (0..GEWEKE_DRAWS)
        .map(|_| {
            prior_draw(&prior, &mut state, &mut rng);
            simulate_data(&mut data, &mut state, &q, &mut rng);
            geweke_stats(&state)
        })
        .collect();

    prior_draw(&prior, &mut state, &mut rng);
    simulate_data(&mut data, &mut state, &q, &mut rng);
    let mut sweep_rng = chain_rng(78, 0);
    let mut stats = ChainStats {
        d_stalls: vec![0; p],
        ..ChainStats::default()
    };
    let successive: Vec<Vec<f64>> = (0..GEWEKE_DRAWS)
        .map(|_| {
            Sampler::new(&data, &prior, q, &config)
                .unwrap()
                .sweep(&mut state, &mut sweep_rng, &mut stats)
                .unwrap();
            simulate_data(&mut data, &mut state, &q, &mut sweep_rng);
            geweke_stats(&state)
        })
        .collect();

    let labels = ["beta[1]", "beta[2]", "beta[3]", "phi[1,2]", "delta[1]", "delta[2]"];
    let mut details = Vec::new();
    let mut pass = true;
    for s in 0..2 * labels.len() {
        let f: Vec<f64> = forward.iter().map(|v| v[s]).collect();
        let g: Vec<f64> = successive.iter().map(|v| v[s]).collect();
        let se_f = (variance(&f) / f.len() as f64).sqrt();
        let batch = g.len() / GEWEKE_BATCHES;
        let batch_means: Vec<f64> = g.chunks(batch).map(mean).collect();
        let se_g = (variance(&batch_means) / batch_means.len() as f64).sqrt();
        let z = (mean(&f) - mean(&g)) / (se_f * se_f + se_g * se_g).sqrt();
        let ok = z.abs() < GEWEKE_Z_MAX;
        pass &= ok;
        let label = if s < labels.len() {
            labels[s].to_string()
        } else {
            format!("{}^2", labels[s - labels.len()])
        };
        details.push(format!(
            "{label:<11} forward {:>9.5}  successive {:>9.5}  z {z:>7.2} {}",
            mean(&f),
            mean(&g),
            if ok { "ok" } else { "MISMATCH" }
        ));
    }
    details.push(format!("{} stalled scale updates", stats.total_stalls()));
    Outcome {
        id: 3,
        title: "Geweke joint test (n=20, p=2, k=3) within 3 SE",
        pass,
        details,
    }
}

// ---- sampler oracles ------------------------------------------------------------

/// `E[X]` of the GIG law by quadrature in `log x`, no Bessel functions involved.
fn gig_mean_quadrature(lambda: f64, nu: f64, chi: f64) -> f64 {
    let (lo, hi, steps) = (-60.0f64, 15.0f64, 600_000);
    let h = (hi - lo) / steps as f64;
    let log_kernel = |u: f64| lambda * u - 0.5 * (chi * (-u).exp() + nu * u.exp());
    let peak = (0..steps).map(|s| log_kernel(lo + (s as f64 + 0.5) * h)).fold(f64::MIN, f64::max);
    let (mut mass, mut first) = (0.0, 0.0);
    for s in 0..steps {
        let u = lo + (s as f64 + 0.5) * h;
        let w = (log_kernel(u) - peak).exp();
        mass += w;
        first += w * u.exp();
    }
    first / mass
}

/// Integral of the density over the plane, in polar coordinates about the location.
fn mal_mass(params: &MalParams) -> f64 {
    let (n_theta, n_t, scale) = (720, 6000, 4.0);
    let mut total = 0.0;
    for a in 0..n_theta {
        let theta = (a as f64 + 0.5) * 2.0 * PI / n_theta as f64;
        let dir = DVector::from_vec(vec![theta.cos(), theta.sin()]);
        for b in 0..n_t {
            let t = (b as f64 + 0.5) / n_t as f64;
            let r = scale * t / (1.0 - t);
            let jac = scale / ((1.0 - t) * (1.0 - t));
            let y = &params.mu + &dir * r;
            total += mal_log_density(&y, params).unwrap().exp() * r * jac;
        }
    }
    total * (2.0 * PI / n_theta as f64) / n_t as f64
}

fn criterion_oracles() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let mut rng = chain_rng(91, 0);

    for (lambda, nu, chi) in [(-0.5, 2.0, 0.5), (-0.5, 3.7, 4.0), (0.0, 2.0, 1e-3), (0.5, 2.5, 10.0)] {
        let params = GigParams::new(lambda, nu, chi).unwrap();
        let draws: Vec<f64> = (0..ORACLE_DRAWS).map(|_| sample_gig(&params, &mut rng)).collect();
        let got = mean(&draws);
        let se = (variance(&draws) / draws.len() as f64).sqrt();
        let bessel = gig_mean(&params);
        let quad = gig_mean_quadrature(lambda, nu, chi);
        let ok = (got - bessel).abs() < ORACLE_SE * se && (bessel - quad).abs() < 1e-6 * quad;
        pass &= ok;
        details.push(format!(
            "GIG({lambda}, {nu}, {chi}): mean {got:.5}, Bessel ratio {bessel:.5}, quadrature {quad:.5}, z {:.2} {}",
            (got - bessel) / se,
            if ok { "ok" } else { "MISMATCH" }
        ));
    }

    let draws: Vec<f64> = (0..ORACLE_DRAWS)
        .map(|_| sample_truncnorm(0.0, 1.0, TruncInterval::below(0.0), &mut rng).unwrap().value)
        .collect();
    let want = -(2.0 / PI).sqrt();
    let se = ((1.0 - 2.0 / PI) / draws.len() as f64).sqrt();
    let z = (mean(&draws) - want) / se;
    let ok = z.abs() < ORACLE_SE;
    pass &= ok;
    details.push(format!(
        "half-normal mean {:.5} vs {want:.5}, z {z:.2} {}",
        mean(&draws),
        if ok { "ok" } else { "MISMATCH" }
    ));

    let scale = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, -0.3, 0.6, 1.5, 0.4, -0.3, 0.4, 1.0]);
    let df = 9.0;
    let mut sum = DMatrix::zeros(3, 3);
    let mut all_spd = true;
    for _ in 0..IW_DRAWS {
        let x = sample_inverse_wishart(df, &scale, &mut rng).unwrap();
        all_spd &= is_spd(&x);
        sum += x;
    }
    let emp = sum / IW_DRAWS as f64;
    let want = &scale / (df - 3.0 - 1.0);
    let worst = (0..3)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .map(|(r, c)| (emp[(r, c)] - want[(r, c)]).abs() / (want[(r, r)] * want[(c, c)]).sqrt())
        .fold(0.0, f64::max);
    let ok = worst < IW_REL_TOL && all_spd;
    pass &= ok;
    details.push(format!(
        "inverse Wishart mean: worst relative deviation {:.4} (tolerance {IW_REL_TOL}), all draws SPD: {all_spd} {}",
        worst,
        if ok { "ok" } else { "MISMATCH" }
    ));

    let phi = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
    for tau in TAUS {
        let q = QuantileSpec::new(tau).unwrap();
        let params = MalParams::from_model(DVector::from_vec(vec![0.3, -0.2]), &q, &[1.0, 0.7], &phi);
        let mass = mal_mass(&params);
        let ok = (mass - 1.0).abs() < MAL_MASS_TOL;
        pass &= ok;
        details.push(format!("density mass at p=2, tau={tau}: {mass:.5} {}", if ok { "ok" } else { "MISMATCH" }));
    }
    Outcome {
        id: 4,
        title: "sampler and density oracles",
        pass,
        details,
    }
}

// ---- structural invariants -------------------------------------------------------

fn criterion_invariants() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec {
        n: RECOVERY_N,
        seed: 5,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let prior = PriorSpec::default_for(data.p(), data.k());
    let config = GibbsConfig {
        n_draws: SMOKE_ITERS,
        burn_in: 0,
        n_chains: 1,
        seed: 6,
        log_every: 0,
        ..GibbsConfig::default()
    };
    let p = data.p() as f64;
    let mut checked = 0usize;
    let mut worst_trace: f64 = 0.0;
    let mut failure = None;
    let result = run_chain_with(&data, &prior, QuantileSpec::new(0.5).unwrap(), &config, 0, None, |iter, state| {
        checked += 1;
        worst_trace = worst_trace.max((state.trace_d() - p).abs());
        let trace_ok = (state.trace_d() - p).abs() < TRACE_TOL;
        if let Err(msg) = state.check_invariants(&data) {
            failure.get_or_insert(format!("iteration {iter}: {msg}"));
        } else if !trace_ok {
            failure.get_or_insert(format!("iteration {iter}: tr(D) = {}", state.trace_d()));
        }
        Ok(())
    });
    let mut details = vec![format!(
        "{checked} retained iterations checked over {} rows; worst |tr(D) - p| = {worst_trace:.2e}",
        data.n()
    )];
    if let Err(e) = &result {
        details.push(format!("run failed: {e}"));
    }
    if let Some(f) = &failure {
        details.push(f.clone());
    }
    Outcome {
        id: 5,
        title: "structural invariants on every retained iteration",
        pass: result.is_ok() && failure.is_none() && checked == SMOKE_ITERS,
        details,
    }
}

// ---- convergence ----------------------------------------------------------------

fn criterion_convergence(fits: &[RecoveryFit]) -> Outcome {
    let mut details = Vec::new();
    let mut all_below = true;
    let mut worst_overall: f64 = 0.0;
    for fit in fits.iter().filter(|f| f.tau == 0.5) {
        let report = rhat(&fit.draws()).unwrap();
        let above: Vec<String> = report
            .entries
            .iter()
            .filter(|e| e.rhat >= RHAT_MAX || e.rhat.is_nan())
            .map(|e| format!("{}={:.3}", e.name, e.rhat))
            .collect();
        worst_overall = worst_overall.max(report.max());
        all_below &= above.is_empty();
        details.push(format!(
            "replication {}: max R-hat {:.4}{}",
            fit.replication,
            report.max(),
            if above.is_empty() { String::new() } else { format!("; at or above {RHAT_MAX}: {}", above.join(", ")) }
        ));
    }

    // Negative control 1: a well-mixed fit with its second chain shifted by two pooled SDs.
    let base = fits.iter().find(|f| f.tau == 0.5).unwrap().draws();
    let mut shifted = base.clone();
    for p in 0..base.names.len() {
        let sd = variance(&base.pooled(p)).sqrt();
        for row in shifted.chains[1].iter_mut() {
            row[p] += 2.0 * sd;
        }
    }
    let shifted_min = rhat(&shifted).unwrap().entries.iter().map(|e| e.rhat).fold(f64::INFINITY, f64::min);

    // Negative control 2: ten iterations from far-apart starting points.
    let data = generate_synthetic(&SyntheticSpec {
        n: 200,
        seed: 8,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let prior = PriorSpec::default_for(data.p(), data.k());
    let config = GibbsConfig {
        n_draws: 10,
        burn_in: 0,
        n_chains: 2,
        seed: 9,
        log_every: 0,
        ..GibbsConfig::default()
    };
    let q = QuantileSpec::new(0.5).unwrap();
    let chains: Vec<ChainDraws> = [-10.0, 10.0]
        .iter()
        .enumerate()
        .map(|(c, &start)| {
            let mut init = ChainState::initial(&data, &prior);
            init.beta.fill(start);
            run_chain_with(&data, &prior, q, &config, c, Some(init), |_, _| Ok(())).unwrap()
        })
        .collect();
    let far_max = rhat(&PosteriorDraws::from_chains(&chains).unwrap()).unwrap().max();
    let controls_ok = shifted_min > RHAT_MAX && far_max > RHAT_MAX;
    details.push(format!(
        "negative controls: shifted chains min R-hat {shifted_min:.3}, far-apart 10-iteration chains max R-hat {far_max:.3} {}",
        if controls_ok { "ok" } else { "NOT DETECTED" }
    ));
    details.insert(0, format!("worst R-hat over all tau=0.5 fits: {worst_overall:.4}"));
    Outcome {
        id: 6,
        title: "all R-hat < 1.1 on the recovery fits; negative controls exceed 1.1",
        pass: all_below && controls_ok,
        details,
    }
}

// ---- determinism ----------------------------------------------------------------

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mcqr"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let steps = || -> Result<Vec<String>, String> {
        run_cli(d, &["simulate", "--n", "200", "--seed", "11", "--out", "sim"])?;
        run_cli(
            d,
            &[
                "fit", "--data", "sim/rep000.csv", "--config", "sim/config.json", "--tau", "0.25,0.5", "--n-draws", "400",
                "--burn-in", "100", "--chains", "2", "--seed", "12", "--out", "first",
            ],
        )?;
        run_cli(d, &["fit", "--manifest", "first/manifest.json", "--out", "second"])?;
        run_cli(d, &["fit", "--manifest", "first/manifest.json", "--out", "third"])?;
        let mut lines = Vec::new();
        for tau in ["0.25", "0.5"] {
            for c in 0..2 {
                let name = format!("draws_tau{tau}_chain{c}.csv");
                let read = |run: &str| std::fs::read(d.join(run).join(&name)).map_err(|e| format!("{name}: {e}"));
                let (a, b, c3) = (read("first")?, read("second")?, read("third")?);
                if a != b || b != c3 {
                    return Err(format!("{name} differs between runs"));
                }
                lines.push(format!("{name}: {} bytes identical across 3 runs", a.len()));
            }
        }
        Ok(lines)
    };
    let (pass, details) = match steps() {
        Ok(lines) => (true, lines),
        Err(e) => (false, vec![e]),
    };
    Outcome {
        id: 7,
        title: "identical manifest gives bit-identical draw files",
        pass,
        details,
    }
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; this target has no sub-tests to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let mut outcomes = Vec::new();
    if [1, 2, 6].into_iter().any(selected) {
        eprintln!("running the recovery study ({RECOVERY_REPLICATIONS} replications x {} quantile levels)", TAUS.len());
        let fits = recovery_fits();
        if selected(1) {
            outcomes.push(criterion_recovery(&fits));
        }
        if selected(2) {
            outcomes.push(criterion_monotone(&fits));
        }
        if selected(6) {
            outcomes.push(criterion_convergence(&fits));
        }
    }
    if selected(3) {
        outcomes.push(criterion_geweke());
    }
    if selected(4) {
        outcomes.push(criterion_oracles());
    }
    if selected(5) {
        outcomes.push(criterion_invariants());
    }
    if selected(7) {
        outcomes.push(criterion_determinism());
    }
    outcomes.sort_by_key(|o| o.id);

    println!();
    for o in &outcomes {
        println!("criterion {}: {} - {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.title);
        for d in &o.details {
            println!("    {d}");
        }
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "\nacceptance: {} of {} criteria passed ({:.0}s)",
        outcomes.len() - failed,
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var("MCQR_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
