//! Generalized inverse Gaussian variates, density `x^(lambda-1) exp(-(nu x + chi/x)/2)`.
//!
//! Ratio-of-uniforms generators of Hörmann and Leydold: with
//! `omega = sqrt(nu chi)` and `alpha = sqrt(chi/nu)`, `X = alpha Y` where `Y`
//! has the one-parameter density `y^(lambda-1) exp(-omega (y + 1/y) / 2)`.
//! Negative `lambda` is handled through `1/Y ~ GIG(-lambda, omega, omega)`.

use rand::Rng;

use super::uniform_open;
use crate::error::{McqrError, Result};
use crate::special::ln_bessel_k;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GigParams {
    pub lambda: f64,
    pub nu: f64,
    pub chi: f64,
}

impl GigParams {
    pub fn new(lambda: f64, nu: f64, chi: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(McqrError::Domain(format!("GIG lambda must be finite, got {lambda}")));
        }
        if !(nu > 0.0 && nu.is_finite()) || !(chi > 0.0 && chi.is_finite()) {
            return Err(McqrError::Domain(format!(
                "GIG requires nu > 0 and chi > 0, got nu = {nu}, chi = {chi}"
            )));
        }
        Ok(Self { lambda, nu, chi })
    }
}

/// `E[X] = sqrt(chi/nu) K_{lambda+1}(omega) / K_lambda(omega)`.
pub fn gig_mean(params: &GigParams) -> f64 {
    let omega = (params.nu * params.chi).sqrt();
    (params.chi / params.nu).sqrt()
        * (ln_bessel_k(params.lambda + 1.0, omega) - ln_bessel_k(params.lambda, omega)).exp()
}

pub fn sample_gig<R: Rng + ?Sized>(params: &GigParams, rng: &mut R) -> f64 {
    sample_gig_counted(params, rng).0
}

/// Draws one variate and reports how many proposals it took.
pub fn sample_gig_counted<R: Rng + ?Sized>(params: &GigParams, rng: &mut R) -> (f64, u32) {
    let omega = (params.nu * params.chi).sqrt();
    let alpha = (params.chi / params.nu).sqrt();
    let lambda = params.lambda.abs();

    let (y, tries) = if lambda > 2.0 || omega > 3.0 {
        rou_shift(lambda, omega, rng)
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(lambda, omega, rng)
    } else {
        concave_hat(lambda, omega, rng)
    };
    let x = if params.lambda < 0.0 { alpha / y } else { alpha * y };
    (x, tries)
}

/// Mode of `y^(lambda-1) exp(-omega (y + 1/y) / 2)`.
fn mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0) * (lambda - 1.0) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda) * (1.0 - lambda) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

/// Ratio-of-uniforms without mode shift.
fn rou_noshift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> (f64, u32) {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0) * (lambda + 1.0) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    let mut tries = 0;
    loop {
        tries += 1;
        let u = um * uniform_open(rng);
        let v = uniform_open(rng);
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return (x, tries);
        }
    }
}

/// Ratio-of-uniforms with the rectangle shifted to the mode; bounds from the
/// roots of a cubic.
fn rou_shift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> (f64, u32) {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);

    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).clamp(-1.0, 1.0).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;

    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    let mut tries = 0;
    loop {
        tries += 1;
        let u = uminus + uniform_open(rng) * (uplus - uminus);
        let v = uniform_open(rng);
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return (x, tries);
        }
    }
}

/// Piecewise hat (constant, power, exponential) for the non-log-concave
/// region `0 <= lambda < 1`, small `omega`.
fn concave_hat<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> (f64, u32) {
    let xm = mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;

    let (k1, a1, k2, a2) = if x0 >= 2.0 / omega {
        let k2 = x0.powf(lambda - 1.0);
        (0.0, 0.0, k2, k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega)
    } else {
        let k1 = (-omega).exp();
        let a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        let k2 = (2.0 / omega).powf(lambda - 1.0);
        (k1, a1, k2, k2 * 2.0 * (-1.0_f64).exp() / omega)
    };
    let total = a0 + a1 + a2;

    let mut tries = 0;
    loop {
        tries += 1;
        let mut v = total * uniform_open(rng);
        let (x, hx) = if v <= a0 {
            (x0 * v / a0, k0)
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    let x = omega * (omega.exp() * v).exp();
                    (x, k1 / x)
                } else {
                    let x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    (x, k1 * x.powf(lambda - 1.0))
                }
            } else {
                v -= a1;
                let lo = x0.max(2.0 / omega);
                let x = -2.0 / omega * ((-omega / 2.0 * lo).exp() - omega / (2.0 * k2) * v).ln();
                (x, k2 * (-omega / 2.0 * x).exp())
            }
        };
        let u = uniform_open(rng) * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return (x, tries);
        }
    }
}
