//! Bayesian multinomial-choice quantile regression.
//!
//! Latent relative utilities follow a multivariate asymmetric Laplace law whose
//! skew and scale are tied to a quantile level `tau`. Conditioning on the
//! exponential mixing weight turns the model into a multinomial probit, so
//! every parameter block (coefficients, mixing weights, latent utilities, the
//! correlation matrix and the per-alternative scales) is drawn by Gibbs steps.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: quantile parameterisation, datasets, priors, chain state and the
//!   multivariate asymmetric Laplace density.
//! - [`design`]: construction of per-observation design matrices.
//! - [`samplers`]: GIG, truncated normal, multivariate normal and inverse Wishart
//!   variate generators.
//! - [`gibbs`]: full conditionals, scale bookkeeping and the chain runner.
//! - [`diagnostics`]: posterior summaries and the potential scale reduction factor.
//! - [`data`]: long-format CSV I/O, the synthetic generator and JSON configuration.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod design;
pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod linalg;
pub mod model;
pub mod samplers;
pub mod special;

pub use design::{DesignConfig, LongRow};
pub use diagnostics::{rhat, summarize, PosteriorDraws, RhatReport, Summary};
pub use error::{McqrError, Result};
pub use gibbs::{run_chain, run_chains, ChainDraws, GibbsConfig};
pub use nalgebra::{DMatrix, DVector};
pub use model::{
    choice_from_utilities, l_scale_from_tau, mal_log_density, xi_from_tau, ChainState,
    ChoiceDataset, MalParams, PriorSpec, QuantileSpec,
};
