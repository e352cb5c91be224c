//! Simulated choice data with three non-baseline alternatives.
//!
//! `X_i = [I_3 | x_shared | diag(x_specific)]` where `x_shared ~ N_3(0, S)` and
//! `x_specific ~ N_3(0, I)`. Utilities are `X_i beta` plus, by default,
//! asymmetric Laplace noise drawn through its normal/exponential mixture.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::design::{build_design_matrix, DesignConfig, LongRow, LongTable};
use crate::error::{McqrError, Result};
use crate::linalg::{cholesky_jittered, is_spd};
use crate::model::{choice_from_utilities, ChoiceDataset, QuantileSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `Y* = X beta` exactly.
    Noiseless,
    /// `Y* = X beta + W D xi + sqrt(W) D Sigma^{1/2} z` with `D = I`, `Phi = I`.
    Mal { tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub beta_true: Vec<f64>,
    /// Covariance of the shared covariates.
    pub s: Vec<Vec<f64>>,
    pub seed: u64,
    pub noise: NoiseMode,
    /// Replace every covariate by zero (intercepts only).
    #[serde(default)]
    pub zero_covariates: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            beta_true: vec![1.0, 2.0, 3.0, 1.0, 3.0, 2.0, 1.0],
            s: vec![vec![1.0, 0.5, 0.5], vec![0.5, 1.0, 0.5], vec![0.5, 0.5, 1.0]],
            seed: 1,
            noise: NoiseMode::Mal { tau: 0.5 },
            zero_covariates: false,
        }
    }
}

const P: usize = 3;

impl SyntheticSpec {
    fn validate(&self) -> Result<DMatrix<f64>> {
        if self.beta_true.len() != 2 * P + 1 {
            return Err(McqrError::config("beta_true", format!("expected 7 values, got {}", self.beta_true.len())));
        }
        if self.s.len() != P || self.s.iter().any(|r| r.len() != P) {
            return Err(McqrError::config("S", "expected a 3x3 matrix"));
        }
        let s = DMatrix::from_fn(P, P, |r, c| self.s[r][c]);
        if !is_spd(&s) {
            return Err(McqrError::config("S", "must be symmetric positive definite"));
        }
        if let NoiseMode::Mal { tau } = self.noise {
            QuantileSpec::new(tau).map_err(|e| McqrError::config("tau", e.to_string()))?;
        }
        Ok(s)
    }
}

/// Long-format records: one row per observation and non-baseline alternative,
/// with covariate columns `x_shared` and `x_specific`.
pub fn generate_synthetic_table(spec: &SyntheticSpec) -> Result<LongTable> {
    let s = spec.validate()?;
    let s_chol = cholesky_jittered(&s, 1e-10, "S")?.l();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let beta = &spec.beta_true;
    let mut rows = Vec::with_capacity(spec.n * P);
    let mut ystar = [0.0; P];
    for i in 0..spec.n {
        let z_shared = DVector::from_fn(P, |_, _| StandardNormal.sample(&mut rng));
        let mut shared: Vec<f64> = (&s_chol * z_shared).iter().copied().collect();
        let mut specific: Vec<f64> = (0..P).map(|_| StandardNormal.sample(&mut rng)).collect();
        if spec.zero_covariates {
            shared.fill(0.0);
            specific.fill(0.0);
        }
        for j in 0..P {
            ystar[j] = beta[j] + beta[P] * shared[j] + beta[P + 1 + j] * specific[j];
        }
        if let NoiseMode::Mal { tau } = spec.noise {
            let q = QuantileSpec::new(tau)?;
            let w: f64 = Exp1.sample(&mut rng);
            for y in ystar.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *y += w * q.xi() + w.sqrt() * q.l_scale() * z;
            }
        }
        let label = choice_from_utilities(&ystar);
        let obs_id = format!("{}", i + 1);
        for j in 0..P {
            rows.push(LongRow {
                obs_id: obs_id.clone(),
                alt: format!("{}", j + 1),
                chosen: label == j + 1,
                values: vec![shared[j], specific[j]],
                line: 0,
            });
        }
    }
    Ok(LongTable {
        covariates: vec!["x_shared".into(), "x_specific".into()],
        rows,
    })
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ChoiceDataset> {
    build_design_matrix(&generate_synthetic_table(spec)?, &DesignConfig::synthetic())
}
