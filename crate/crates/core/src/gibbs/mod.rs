//! The Gibbs sampler: one sweep updates `beta`, every `W_i`, every `y*_ij`,
//! `Phi`, then `D`, and finally restores `tr(D) = p`.

pub mod conditionals;
pub mod scale;

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{McqrError, Result};
use crate::linalg::DEFAULT_JITTER;
use crate::model::{ChainState, ChoiceDataset, PriorSpec, QuantileSpec};
use conditionals::{
    residuals, sample_d_fc, sample_phi_fc, sample_w_fc, DStepStats, FullConditionalBeta, Precision,
    YstarConditional,
};
pub use scale::{apply_scale_constraints, rescale_in_place};

/// Random stream used by every chain.
pub type ChainRng = ChaCha8Rng;

/// Stream for chain `chain_id` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, chain_id: usize) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain_id as u64);
    rng
}

/// Degrees of freedom of the inverse-Wishart step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhiDof {
    /// `eta + n + p + 1`.
    #[default]
    Printed,
    /// `eta + n`.
    Conjugate,
}

/// Gamma shape used for `d_j = 1/delta_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DShape {
    /// `n + k`, the exact shape of the conditional.
    #[default]
    NPlusK,
    /// `2(n - 1) + k`.
    TwiceNMinusOnePlusK,
}

/// Rate of the gamma proposal for `d_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DRate {
    /// Rate chosen so the proposal mode equals the target mode.
    #[default]
    Matched,
    /// The prior rate `alpha`.
    Prior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsConfig {
    /// Total iterations, burn-in included.
    pub n_draws: usize,
    pub burn_in: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub rejection_max_attempts: u32,
    pub jitter: f64,
    pub phi_dof: PhiDof,
    pub d_shape: DShape,
    pub d_rate: DRate,
    /// Rescale to `tr(D) = p` after every sweep.
    pub trace_constraint: bool,
    pub record_ystar: bool,
    /// Emit a progress line every this many iterations (0 disables).
    pub log_every: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            n_draws: 25_000,
            burn_in: 5_000,
            n_chains: 3,
            seed: 1,
            rejection_max_attempts: 1000,
            jitter: DEFAULT_JITTER,
            phi_dof: PhiDof::Printed,
            d_shape: DShape::NPlusK,
            d_rate: DRate::Matched,
            trace_constraint: true,
            record_ystar: false,
            log_every: 1000,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_draws == 0 {
            return Err(McqrError::config("n_draws", "must be positive"));
        }
        if self.burn_in >= self.n_draws {
            return Err(McqrError::config(
                "burn_in",
                format!("must be smaller than n_draws = {}, got {}", self.n_draws, self.burn_in),
            ));
        }
        if self.n_chains == 0 {
            return Err(McqrError::config("n_chains", "must be at least 1"));
        }
        if self.rejection_max_attempts == 0 {
            return Err(McqrError::config("rejection_max_attempts", "must be positive"));
        }
        if !(self.jitter > 0.0 && self.jitter < 1e-2) {
            return Err(McqrError::config("jitter", format!("must be a small positive number, got {}", self.jitter)));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        self.n_draws - self.burn_in
    }
}

/// Running counters of one chain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    /// Rejection-sampler stalls per coordinate of `D`.
    pub d_stalls: Vec<u64>,
    pub d_proposals: u64,
    pub d_updates: u64,
    /// Latent utilities drawn from an interval of negligible mass.
    pub ystar_clamps: u64,
    pub gig_proposals: u64,
    pub gig_draws: u64,
}

impl ChainStats {
    pub fn total_stalls(&self) -> u64 {
        self.d_stalls.iter().sum()
    }
}

/// Names of the recorded parameters: `beta[1..k]`, `phi[r,c]` for `r < c`, `delta[1..p]`.
pub fn parameter_names(k: usize, p: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=k).map(|c| format!("beta[{c}]")).collect();
    for r in 1..=p {
        for c in (r + 1)..=p {
            names.push(format!("phi[{r},{c}]"));
        }
    }
    names.extend((1..=p).map(|j| format!("delta[{j}]")));
    names
}

fn record(state: &ChainState) -> Vec<f64> {
    let p = state.delta.len();
    let mut row: Vec<f64> = state.beta.iter().copied().collect();
    for r in 0..p {
        for c in (r + 1)..p {
            row.push(state.phi[(r, c)]);
        }
    }
    row.extend_from_slice(&state.delta);
    row
}

/// Retained draws of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub chain_id: usize,
    pub names: Vec<String>,
    /// Iteration number (1-based, counting burn-in) of the first retained draw.
    pub first_iter: usize,
    /// One row per retained iteration, columns ordered as `names`.
    pub draws: Vec<Vec<f64>>,
    pub ystar: Vec<DMatrix<f64>>,
    pub stats: ChainStats,
    pub last_state: ChainState,
}

impl ChainDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.names.iter().position(|n| n == name)?;
        Some(self.draws.iter().map(|r| r[c]).collect())
    }
}

/// Everything a sweep needs besides the state and the stream.
pub struct Sampler<'a> {
    pub data: &'a ChoiceDataset,
    pub prior: &'a PriorSpec,
    pub q: QuantileSpec,
    pub config: &'a GibbsConfig,
}

impl<'a> Sampler<'a> {
    pub fn new(
        data: &'a ChoiceDataset,
        prior: &'a PriorSpec,
        q: QuantileSpec,
        config: &'a GibbsConfig,
    ) -> Result<Self> {
        config.validate()?;
        if prior.p() != data.p() || prior.k() != data.k() {
            return Err(McqrError::config(
                "prior",
                format!(
                    "prior is for p = {}, k = {} but data have p = {}, k = {}",
                    prior.p(),
                    prior.k(),
                    data.p(),
                    data.k()
                ),
            ));
        }
        Ok(Self {
            data,
            prior,
            q,
            config,
        })
    }

    /// One full sweep, in place.
    pub fn sweep(&self, state: &mut ChainState, rng: &mut ChainRng, stats: &mut ChainStats) -> Result<()> {
        let (data, prior, q, cfg) = (self.data, self.prior, &self.q, self.config);
        let (n, p) = (data.n(), data.p());
        let prec = Precision::new(&state.phi, q, cfg.jitter)?;

        state.beta = FullConditionalBeta::new(state, data, prior, q, &prec, cfg.jitter)?.sample(rng);

        let mut xb = vec![0.0; n * p];
        for i in 0..n {
            for j in 0..p {
                xb[i * p + j] = data.x[i][j].iter().zip(state.beta.iter()).map(|(a, b)| a * b).sum();
            }
        }

        let mut r = vec![0.0; p];
        for i in 0..n {
            for j in 0..p {
                r[j] = state.ystar[(i, j)] - xb[i * p + j];
            }
            let (w, tries) = sample_w_fc(&r, &state.delta, &prec, rng)?;
            state.w[i] = w;
            stats.gig_proposals += u64::from(tries);
            stats.gig_draws += 1;
        }

        let mut row = vec![0.0; p];
        for i in 0..n {
            for j in 0..p {
                row[j] = state.ystar[(i, j)];
            }
            let xbi = &xb[i * p..(i + 1) * p];
            for j in 0..p {
                let c = YstarConditional::new(&row, xbi, state.w[i], &state.delta, &prec, j, data.y[i]);
                let draw = c.sample(rng)?;
                if draw.clamped {
                    stats.ystar_clamps += 1;
                }
                row[j] = draw.value;
                state.ystar[(i, j)] = draw.value;
            }
        }

        let resid = residuals(state, data);
        state.phi = sample_phi_fc(state, &resid, prior, q, cfg.phi_dof, rng)?;

        let prec = Precision::new(&state.phi, q, cfg.jitter)?;
        let mut dstats = DStepStats {
            proposals: 0,
            stalls: std::mem::take(&mut stats.d_stalls),
        };
        state.delta = sample_d_fc(state, &resid, prior, &prec, cfg, &mut dstats, rng)?;
        stats.d_stalls = dstats.stalls;
        stats.d_proposals += dstats.proposals;
        stats.d_updates += p as u64;

        if cfg.trace_constraint {
            rescale_in_place(state);
        }
        Ok(())
    }
}

/// Run one chain from the default initial state.
pub fn run_chain(
    data: &ChoiceDataset,
    prior: &PriorSpec,
    q: QuantileSpec,
    config: &GibbsConfig,
    chain_id: usize,
) -> Result<ChainDraws> {
    run_chain_with(data, prior, q, config, chain_id, None, |_, _| Ok(()))
}

/// Run one chain from `init` (or the default initial state), calling
/// `observer` with the 1-based iteration number after every retained sweep.
pub fn run_chain_with<F>(
    data: &ChoiceDataset,
    prior: &PriorSpec,
    q: QuantileSpec,
    config: &GibbsConfig,
    chain_id: usize,
    init: Option<ChainState>,
    mut observer: F,
) -> Result<ChainDraws>
where
    F: FnMut(usize, &ChainState) -> Result<()>,
{
    let sampler = Sampler::new(data, prior, q, config)?;
    let mut rng = chain_rng(config.seed, chain_id);
    let mut state = init.unwrap_or_else(|| ChainState::initial(data, prior));
    let mut stats = ChainStats {
        d_stalls: vec![0; data.p()],
        ..Default::default()
    };
    let mut draws = Vec::with_capacity(config.retained());
    let mut ystar = Vec::new();
    let started = Instant::now();

    for iter in 1..=config.n_draws {
        sampler
            .sweep(&mut state, &mut rng, &mut stats)
            .map_err(|e| McqrError::Chain {
                chain: chain_id,
                iteration: iter,
                source: Box::new(e),
            })?;
        if iter > config.burn_in {
            draws.push(record(&state));
            if config.record_ystar {
                ystar.push(state.ystar.clone());
            }
            observer(iter, &state).map_err(|e| McqrError::Chain {
                chain: chain_id,
                iteration: iter,
                source: Box::new(e),
            })?;
        }
        if config.log_every > 0 && iter % config.log_every == 0 {
            log::info!(
                "tau={} chain {chain_id}: iteration {iter}/{} ({:.1}s, {} stalls, {} clamps)",
                q.tau(),
                config.n_draws,
                started.elapsed().as_secs_f64(),
                stats.total_stalls(),
                stats.ystar_clamps
            );
        }
    }

    Ok(ChainDraws {
        chain_id,
        names: parameter_names(data.k(), data.p()),
        first_iter: config.burn_in + 1,
        draws,
        ystar,
        stats,
        last_state: state,
    })
}

/// Run `config.n_chains` independent chains in parallel, chain `c` on stream `c`.
pub fn run_chains(
    data: &ChoiceDataset,
    prior: &PriorSpec,
    q: QuantileSpec,
    config: &GibbsConfig,
) -> Result<Vec<ChainDraws>> {
    config.validate()?;
    (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_chain(data, prior, q, config, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::{generate_synthetic, SyntheticSpec};

    fn small(n: usize, seed: u64) -> ChoiceDataset {
        generate_synthetic(&SyntheticSpec {
            n,
            seed,
            ..SyntheticSpec::default()
        })
        .unwrap()
    }

    fn quick(n_draws: usize, burn_in: usize) -> GibbsConfig {
        GibbsConfig {
            n_draws,
            burn_in,
            n_chains: 2,
            seed: 42,
            log_every: 0,
            ..GibbsConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(GibbsConfig::default().validate().is_ok());
        let mut c = quick(10, 10);
        assert!(matches!(c.validate(), Err(McqrError::Config { ref field, .. }) if field == "burn_in"));
        c.burn_in = 5;
        c.n_chains = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn parameter_naming() {
        assert_eq!(
            parameter_names(2, 3),
            ["beta[1]", "beta[2]", "phi[1,2]", "phi[1,3]", "phi[2,3]", "delta[1]", "delta[2]", "delta[3]"]
        );
    }

    #[test]
    fn retains_exactly_post_burn_in_draws() {
        let data = small(30, 1);
        let prior = PriorSpec::default_for(3, 7);
        let q = QuantileSpec::new(0.5).unwrap();
        let out = run_chain(&data, &prior, q, &quick(10, 5), 0).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out.first_iter, 6);
        assert!(out.ystar.is_empty());
        assert!(out.draws.iter().all(|r| r.len() == 7 + 3 + 3));
    }

    #[test]
    fn same_seed_is_bit_identical_and_streams_differ() {
        let data = small(40, 2);
        let prior = PriorSpec::default_for(3, 7);
        let q = QuantileSpec::new(0.25).unwrap();
        let cfg = quick(30, 10);
        let a = run_chain(&data, &prior, q, &cfg, 0).unwrap();
        let b = run_chain(&data, &prior, q, &cfg, 0).unwrap();
        assert_eq!(a.draws, b.draws);
        let c = run_chain(&data, &prior, q, &cfg, 1).unwrap();
        assert_ne!(a.draws, c.draws);
        let other_seed = GibbsConfig { seed: 43, ..cfg.clone() };
        let d = run_chain(&data, &prior, q, &other_seed, 0).unwrap();
        assert_ne!(a.draws, d.draws);
    }

    #[test]
    fn single_chain_run_matches_run_chain() {
        let data = small(25, 3);
        let prior = PriorSpec::default_for(3, 7);
        let q = QuantileSpec::new(0.75).unwrap();
        let cfg = GibbsConfig { n_chains: 1, ..quick(20, 5) };
        let many = run_chains(&data, &prior, q, &cfg).unwrap();
        let one = run_chain(&data, &prior, q, &cfg, 0).unwrap();
        assert_eq!(many.len(), 1);
        assert_eq!(many[0], one);
    }

    #[test]
    fn invariants_hold_after_every_sweep() {
        let data = small(60, 4);
        let prior = PriorSpec::default_for(3, 7);
        let cfg = GibbsConfig {
            record_ystar: true,
            ..quick(60, 0)
        };
        for tau in [0.2, 0.5, 0.8] {
            let q = QuantileSpec::new(tau).unwrap();
            let mut seen = 0;
            run_chain_with(&data, &prior, q, &cfg, 0, None, |_, s| {
                s.check_invariants(&data).map_err(McqrError::Diagnostics)?;
                assert!((s.trace_d() - 3.0).abs() < 1e-12);
                seen += 1;
                Ok(())
            })
            .unwrap();
            assert_eq!(seen, 60);
        }
    }

    #[test]
    fn failure_reports_chain_and_iteration() {
        let data = small(10, 5);
        let prior = PriorSpec::default_for(3, 7);
        let q = QuantileSpec::new(0.5).unwrap();
        let err = run_chain_with(&data, &prior, q, &quick(5, 0), 1, None, |it, _| {
            if it == 3 {
                Err(McqrError::Diagnostics("stop".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, McqrError::Chain { chain: 1, iteration: 3, .. }));
    }

    #[test]
    fn mismatched_prior_is_rejected() {
        let data = small(10, 6);
        let prior = PriorSpec::default_for(2, 7);
        let q = QuantileSpec::new(0.5).unwrap();
        assert!(run_chain(&data, &prior, q, &quick(5, 0), 0).is_err());
    }
}
