//! Random-variate generators used by the full conditionals.
//!
//! Every generator takes an explicit random stream; none holds state of its own.

mod gig;
mod mvn;
mod truncnorm;

pub use gig::{gig_mean, sample_gig, sample_gig_counted, GigParams};
pub use mvn::{sample_inverse_wishart, sample_mvnormal, sample_mvnormal_chol};
pub use truncnorm::{sample_truncnorm, TruncDraw, TruncInterval, TAIL_SWITCH_SD, ZERO_MASS};

use rand::Rng;
use rand_distr::{Distribution, Open01};

#[inline]
pub(crate) fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}
