//! Univariate normal restricted to an interval.
//!
//! Inverse-CDF sampling, working on whichever side of the mean keeps the
//! tail probabilities well conditioned. Once the interval starts more than
//! [`TAIL_SWITCH_SD`] standard deviations into a tail, an exponential
//! (or, for narrow intervals, uniform) proposal with rejection takes over.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::uniform_open;
use crate::error::{McqrError, Result};
use crate::special::{
    ln_std_normal_sf, std_normal_cdf, std_normal_inv_cdf, std_normal_inv_sf, std_normal_sf,
};

pub const TAIL_SWITCH_SD: f64 = 6.0;

/// Intervals with less probability than this are clamped instead of sampled.
pub const ZERO_MASS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncInterval {
    lower: f64,
    upper: f64,
}

impl TruncInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(McqrError::Domain(format!("invalid truncation interval ({lower}, {upper})")));
        }
        Ok(Self { lower, upper })
    }

    pub fn above(lower: f64) -> Self {
        Self::new(lower, f64::INFINITY).expect("finite lower bound")
    }

    pub fn below(upper: f64) -> Self {
        Self::new(f64::NEG_INFINITY, upper).expect("finite upper bound")
    }

    pub fn unbounded() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncDraw {
    pub value: f64,
    /// The interval carried less than [`ZERO_MASS`] probability and the value
    /// was pinned just inside its nearer bound.
    pub clamped: bool,
}

pub fn sample_truncnorm<R: Rng + ?Sized>(
    mean: f64,
    var: f64,
    interval: TruncInterval,
    rng: &mut R,
) -> Result<TruncDraw> {
    if !(var > 0.0 && var.is_finite()) || !mean.is_finite() {
        return Err(McqrError::Domain(format!(
            "truncated normal needs finite mean and positive variance, got ({mean}, {var})"
        )));
    }
    let sd = var.sqrt();
    let a = (interval.lower - mean) / sd;
    let b = (interval.upper - mean) / sd;

    // Reflect so the interval never lies entirely below zero.
    let flip = b <= 0.0;
    let (a, b) = if flip { (-b, -a) } else { (a, b) };

    let (z, clamped) = if a >= 0.0 {
        let ln_mass = ln_std_normal_sf(a) + (-(ln_std_normal_sf(b) - ln_std_normal_sf(a)).exp()).ln_1p();
        if !(ln_mass >= ZERO_MASS.ln()) {
            (a, true)
        } else if a >= TAIL_SWITCH_SD {
            (tail_rejection(a, b, rng), false)
        } else {
            let qa = std_normal_sf(a);
            let qb = std_normal_sf(b);
            (std_normal_inv_sf(qb + uniform_open(rng) * (qa - qb)), false)
        }
    } else {
        let pa = std_normal_cdf(a);
        let pb = std_normal_cdf(b);
        let u = pa + uniform_open(rng) * (pb - pa);
        let z = if u < 0.5 {
            std_normal_inv_cdf(u)
        } else {
            // 1 - u is exact here, unlike the cdf near one.
            std_normal_inv_sf(1.0 - u)
        };
        (z, false)
    };

    let z = if flip { -z } else { z };
    let mut value = mean + sd * z;
    if clamped {
        // The near bound in the original orientation.
        value = if flip { just_below(interval.upper) } else { just_above(interval.lower) };
    } else if !interval.contains_open(value) {
        // Rounding put an ordinary draw on or past a bound.
        let lo = just_above(interval.lower);
        let hi = just_below(interval.upper);
        value = if (value - lo).abs() <= (value - hi).abs() { lo } else { hi };
    }
    Ok(TruncDraw { value, clamped })
}

fn just_above(bound: f64) -> f64 {
    if bound.is_finite() {
        bound.next_up()
    } else {
        f64::MIN
    }
}

fn just_below(bound: f64) -> f64 {
    if bound.is_finite() {
        bound.next_down()
    } else {
        f64::MAX
    }
}

/// Standard normal on `[a, b]` with `a >= TAIL_SWITCH_SD`.
fn tail_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b - a < 1.0 / a {
        loop {
            let z = a + uniform_open(rng) * (b - a);
            if uniform_open(rng).ln() <= 0.5 * (a * a - z * z) {
                return z;
            }
        }
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / rate;
        if z < b && uniform_open(rng).ln() <= -0.5 * (z - rate) * (z - rate) {
            return z;
        }
    }
}
