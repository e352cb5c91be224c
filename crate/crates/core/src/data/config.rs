//! JSON run configuration.
//!
//! Every field is optional:
//!
//! ```json
//! {
//!   "prior": {"b0": 0.0, "B0": 1.0, "eta": 20, "Phi0": 1.0, "k": 10, "alpha": 0.5},
//!   "tau": [0.25, 0.5, 0.75],
//!   "gibbs": {"n_draws": 25000, "burn_in": 5000, "n_chains": 3, "seed": 1},
//!   "design": {"baseline": "heinz41", "shared": ["price"], "specific": ["disp"]}
//! }
//! ```
//!
//! Scalars given for `b0`, `B0` or `Phi0` mean `c * 1` and `c * I`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::DesignConfig;
use crate::error::{McqrError, Result};
use crate::gibbs::GibbsConfig;
use crate::linalg::is_spd;
use crate::model::{PriorSpec, QuantileSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Scalar(f64),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl VectorSpec {
    fn resolve(&self, len: usize, field: &str) -> Result<DVector<f64>> {
        match self {
            VectorSpec::Scalar(c) => Ok(DVector::from_element(len, *c)),
            VectorSpec::Values(v) if v.len() == len => Ok(DVector::from_column_slice(v)),
            VectorSpec::Values(v) => Err(McqrError::config(field, format!("expected {len} values, got {}", v.len()))),
        }
    }
}

impl MatrixSpec {
    fn resolve(&self, dim: usize, field: &str) -> Result<DMatrix<f64>> {
        let m = match self {
            MatrixSpec::Scalar(c) => DMatrix::identity(dim, dim) * *c,
            MatrixSpec::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(McqrError::config(field, format!("expected a {dim}x{dim} matrix")));
                }
                DMatrix::from_fn(dim, dim, |r, c| rows[r][c])
            }
        };
        if !is_spd(&m) {
            return Err(McqrError::config(field, "must be symmetric positive definite"));
        }
        Ok(m)
    }

    fn explicit_dim(&self) -> Option<usize> {
        match self {
            MatrixSpec::Scalar(_) => None,
            MatrixSpec::Rows(r) => Some(r.len()),
        }
    }
}

/// Prior hyperparameters before the data fix `p` and `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub b0: VectorSpec,
    #[serde(rename = "B0")]
    pub b0_cov: MatrixSpec,
    pub eta: f64,
    #[serde(rename = "Phi0")]
    pub phi0: MatrixSpec,
    pub k: f64,
    pub alpha: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            b0: VectorSpec::Scalar(0.0),
            b0_cov: MatrixSpec::Scalar(1.0),
            eta: 20.0,
            phi0: MatrixSpec::Scalar(1.0),
            k: 10.0,
            alpha: 0.5,
        }
    }
}

impl PriorConfig {
    /// Checks that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.phi0.explicit_dim() {
            self.phi0.resolve(p, "Phi0")?;
            if !(self.eta > p as f64 - 1.0) {
                return Err(McqrError::config("eta", format!("must exceed p - 1 = {}", p as f64 - 1.0)));
            }
        } else if let MatrixSpec::Scalar(c) = self.phi0 {
            if !(c > 0.0) {
                return Err(McqrError::config("Phi0", "must be symmetric positive definite"));
            }
        }
        if let Some(k) = self.b0_cov.explicit_dim() {
            self.b0_cov.resolve(k, "B0")?;
        } else if let MatrixSpec::Scalar(c) = self.b0_cov {
            if !(c > 0.0) {
                return Err(McqrError::config("B0", "must be symmetric positive definite"));
            }
        }
        if !(self.eta > 0.0) {
            return Err(McqrError::config("eta", "must be positive"));
        }
        if !(self.k > 0.0) {
            return Err(McqrError::config("k", "must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(McqrError::config("alpha", "must be positive"));
        }
        Ok(())
    }

    pub fn resolve(&self, p: usize, k: usize) -> Result<PriorSpec> {
        PriorSpec::new(
            self.b0.resolve(k, "b0")?,
            self.b0_cov.resolve(k, "B0")?,
            self.eta,
            self.phi0.resolve(p, "Phi0")?,
            self.k,
            self.alpha,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub prior: PriorConfig,
    pub tau: Vec<QuantileSpec>,
    pub gibbs: GibbsConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            prior: PriorConfig::default(),
            tau: vec![QuantileSpec::new(0.5).expect("valid")],
            gibbs: GibbsConfig::default(),
            design: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        if self.tau.is_empty() {
            return Err(McqrError::config("tau", "at least one quantile level is required"));
        }
        self.gibbs.validate()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tau.iter().map(|q| q.tau()).collect()
    }
}

/// Field name for a serde error, best effort.
fn json_error(err: serde_json::Error) -> McqrError {
    let msg = err.to_string();
    for field in ["tau", "eta", "B0", "Phi0", "b0", "alpha", "n_draws", "burn_in", "n_chains", "seed"] {
        if msg.contains(field) {
            return McqrError::config(field, msg);
        }
    }
    if msg.contains("(0, 1)") {
        return McqrError::config("tau", msg);
    }
    McqrError::config("config", msg)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(json_error)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}
