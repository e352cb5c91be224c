//! Special functions: the modified Bessel function of the third kind and
//! standard-normal tail helpers.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{LN_2, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln(exp(x) * K_nu(x))` for `x > 0` and real `nu`.
///
/// Evaluated from `exp(x) K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt`
/// with the trapezoidal rule, which converges geometrically for this entire,
/// doubly-exponentially decaying integrand. All terms are accumulated in log
/// space so neither large `nu` nor large `x` overflows.
pub fn ln_bessel_k_scaled(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "bessel K requires finite x > 0, got {x}");
    let nu = nu.abs();
    let h = 0.1_f64.min(0.35 / (x * x + nu * nu).powf(0.25));
    let log_term = |t: f64| {
        let half = (0.5 * t).sinh();
        -x * 2.0 * half * half + ln_cosh(nu * t)
    };

    let mut terms = Vec::with_capacity(256);
    let mut peak = f64::NEG_INFINITY;
    let mut t = 0.0_f64;
    for k in 0..5_000_000usize {
        let v = log_term(t);
        peak = peak.max(v);
        terms.push(if k == 0 { v - LN_2 } else { v });
        // Past the maximum once x sinh t exceeds nu tanh(nu t) <= nu.
        if x * t.sinh() > nu && v < peak - 46.0 {
            break;
        }
        t += h;
    }
    let sum: f64 = terms.iter().map(|&w| (w - peak).exp()).sum();
    peak + sum.ln() + h.ln()
}

/// `ln K_nu(x)`.
pub fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    ln_bessel_k_scaled(nu, x) - x
}

pub fn bessel_k(nu: f64, x: f64) -> f64 {
    ln_bessel_k(nu, x).exp()
}

fn ln_cosh(a: f64) -> f64 {
    let a = a.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `ln P(Z > x)` for a standard normal `Z`, accurate deep into the upper tail.
pub fn ln_std_normal_sf(x: f64) -> f64 {
    if x < 35.0 {
        std_normal_sf(x).ln()
    } else {
        let r = 1.0 / (x * x);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
        -0.5 * x * x - x.ln() - LN_SQRT_2PI + series.ln()
    }
}

pub fn ln_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Quantile of the standard normal, `p` in (0, 1).
pub fn std_normal_inv_cdf(p: f64) -> f64 {
    -std_normal_inv_sf(p)
}

/// Quantile of the standard normal given an upper-tail probability `q = P(Z > x)`.
///
/// `erfc_inv` is only good to about ten digits, so one Halley step on
/// `Q(x) = q` polishes the result.
pub fn std_normal_inv_sf(q: f64) -> f64 {
    let x = SQRT_2 * erfc_inv(2.0 * q);
    if !x.is_finite() {
        return x;
    }
    let r = (std_normal_sf(x) - q) / ln_std_normal_pdf(x).exp();
    if !r.is_finite() {
        return x;
    }
    x + r / (1.0 - 0.5 * x * r)
}
