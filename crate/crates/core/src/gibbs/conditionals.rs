//! Full conditional distributions of every parameter block.
//!
//! Notation used throughout: `r_i = y*_i - X_i beta` is the residual of
//! observation `i`, `Omega = Sigma^{-1}` with `Sigma = l^2 Phi`, and
//! `d_j = 1 / delta_j`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{DRate, DShape, GibbsConfig, PhiDof};
use crate::error::{McqrError, Result};
use crate::linalg::{cholesky_jittered, correlation_from_covariance, is_spd, rows_of, spd_inverse, symmetrize};
use crate::model::{ChainState, ChoiceDataset, PriorSpec, QuantileSpec};
use crate::samplers::{sample_gig_counted, sample_inverse_wishart, sample_truncnorm, GigParams, TruncDraw, TruncInterval};

/// Floor on the GIG `chi` parameter when a residual is numerically zero.
pub const CHI_FLOOR: f64 = 1e-12;

/// Quantities derived from `Phi` that the conditionals share.
#[derive(Debug, Clone)]
pub struct Precision {
    /// `Sigma^{-1}`, row-major.
    omega: Vec<f64>,
    /// `Sigma^{-1} xi`.
    omega_xi: Vec<f64>,
    /// `xi' Sigma^{-1} xi`.
    xi_omega_xi: f64,
    xi: f64,
    p: usize,
}

impl Precision {
    pub fn new(phi: &DMatrix<f64>, q: &QuantileSpec, jitter: f64) -> Result<Self> {
        let p = phi.nrows();
        let l2 = q.l_scale() * q.l_scale();
        let omega_m = spd_inverse(phi, jitter, "correlation matrix Phi")? / l2;
        let xi = q.xi();
        let omega: Vec<f64> = (0..p * p).map(|t| omega_m[(t / p, t % p)]).collect();
        let omega_xi: Vec<f64> = (0..p).map(|j| xi * omega[j * p..(j + 1) * p].iter().sum::<f64>()).collect();
        let xi_omega_xi = xi * omega_xi.iter().sum::<f64>();
        Ok(Self {
            omega,
            omega_xi,
            xi_omega_xi,
            xi,
            p,
        })
    }

    #[inline]
    pub fn omega(&self, j: usize, l: usize) -> f64 {
        self.omega[j * self.p + l]
    }

    pub fn omega_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.p, self.p, &self.omega)
    }

    pub fn xi_omega_xi(&self) -> f64 {
        self.xi_omega_xi
    }
}

/// Residuals `y*_i - X_i beta`, row-major `n x p`.
pub fn residuals(state: &ChainState, data: &ChoiceDataset) -> Vec<f64> {
    let (n, p) = (data.n(), data.p());
    let mut out = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            let xb: f64 = data.x[i][j].iter().zip(state.beta.iter()).map(|(a, b)| a * b).sum();
            out[i * p + j] = state.ystar[(i, j)] - xb;
        }
    }
    out
}

/// `beta | rest ~ MN(b1, B1)`, kept in precision form.
#[derive(Debug, Clone)]
pub struct FullConditionalBeta {
    pub b1: DVector<f64>,
    precision_chol: Cholesky<f64, Dyn>,
}

impl FullConditionalBeta {
    pub fn new(
        state: &ChainState,
        data: &ChoiceDataset,
        prior: &PriorSpec,
        q: &QuantileSpec,
        prec: &Precision,
        jitter: f64,
    ) -> Result<Self> {
        let (n, p, k) = (data.n(), data.p(), data.k());
        let prior_prec = spd_inverse(&prior.b0_cov, jitter, "prior covariance B0")?;
        let mut precision = prior_prec.clone();
        let mut linear = &prior_prec * &prior.b0;
        let d: Vec<f64> = state.delta.iter().map(|v| 1.0 / v).collect();
        // Q_i = (1/W_i) D^{-1} Omega D^{-1}
        let mut qmat = vec![0.0; p * p];
        let mut target = vec![0.0; p];
        let mut qx = vec![0.0; p * k];
        for i in 0..n {
            let inv_w = 1.0 / state.w[i];
            for j in 0..p {
                for l in 0..p {
                    qmat[j * p + l] = inv_w * d[j] * prec.omega(j, l) * d[l];
                }
                target[j] = state.ystar[(i, j)] - state.w[i] * state.delta[j] * q.xi();
            }
            let xi_rows = &data.x[i];
            for j in 0..p {
                for c in 0..k {
                    let mut s = 0.0;
                    for l in 0..p {
                        s += qmat[j * p + l] * xi_rows[l][c];
                    }
                    qx[j * k + c] = s;
                }
            }
            for a in 0..k {
                let mut lin = 0.0;
                for j in 0..p {
                    let xa = xi_rows[j][a];
                    lin += qx[j * k + a] * target[j];
                    for b in a..k {
                        precision[(a, b)] += xa * qx[j * k + b];
                    }
                }
                linear[a] += lin;
            }
        }
        for a in 0..k {
            for b in 0..a {
                precision[(a, b)] = precision[(b, a)];
            }
        }
        let precision_chol = cholesky_jittered(&precision, jitter, "beta conditional precision")?;
        let b1 = precision_chol.solve(&linear);
        Ok(Self { b1, precision_chol })
    }

    /// `B1`.
    pub fn cov(&self) -> DMatrix<f64> {
        let mut c = self.precision_chol.inverse();
        symmetrize(&mut c);
        c
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        // With B1^{-1} = L L', b1 + L^{-T} z has covariance B1.
        let k = self.b1.len();
        let z = DVector::from_fn(k, |_, _| StandardNormal.sample(rng));
        let lt = self.precision_chol.l().transpose();
        let e = lt.solve_upper_triangular(&z).expect("Cholesky factor is nonsingular");
        &self.b1 + e
    }
}

pub fn sample_beta_fc<R: Rng + ?Sized>(
    state: &ChainState,
    data: &ChoiceDataset,
    prior: &PriorSpec,
    q: &QuantileSpec,
    prec: &Precision,
    jitter: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    Ok(FullConditionalBeta::new(state, data, prior, q, prec, jitter)?.sample(rng))
}

/// GIG parameters of `W_i | rest`.
pub fn w_conditional(resid_i: &[f64], delta: &[f64], prec: &Precision) -> GigParams {
    let p = delta.len();
    let mut chi = 0.0;
    for j in 0..p {
        let ej = resid_i[j] / delta[j];
        let mut s = 0.0;
        for l in 0..p {
            s += prec.omega(j, l) * resid_i[l] / delta[l];
        }
        chi += ej * s;
    }
    GigParams {
        lambda: 1.0 - 0.5 * p as f64,
        nu: prec.xi_omega_xi + 2.0,
        chi: chi.max(CHI_FLOOR),
    }
}

/// Draw `W_i`; returns the value and the number of GIG proposals used.
pub fn sample_w_fc<R: Rng + ?Sized>(
    resid_i: &[f64],
    delta: &[f64],
    prec: &Precision,
    rng: &mut R,
) -> Result<(f64, u32)> {
    let params = w_conditional(resid_i, delta, prec);
    Ok(sample_gig_counted(&GigParams::new(params.lambda, params.nu, params.chi)?, rng))
}

/// Truncated-normal conditional of one latent utility.
#[derive(Debug, Clone, PartialEq)]
pub struct YstarConditional {
    pub mean: f64,
    pub var: f64,
    pub interval: TruncInterval,
}

/// Truncation interval of `y*_ij` given the other utilities of the row and the label.
pub fn ystar_interval(row: &[f64], j: usize, label: usize) -> TruncInterval {
    if label == 0 {
        return TruncInterval::below(0.0);
    }
    let others = row
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != j)
        .fold(0.0_f64, |m, (_, &v)| m.max(v));
    if label == j + 1 {
        TruncInterval::above(others)
    } else {
        TruncInterval::below(others)
    }
}

impl YstarConditional {
    /// `xb` is `X_i beta`; `row` holds the current utilities of observation `i`.
    pub fn new(
        row: &[f64],
        xb: &[f64],
        w: f64,
        delta: &[f64],
        prec: &Precision,
        j: usize,
        label: usize,
    ) -> Self {
        let p = row.len();
        let prior_mean = |l: usize| xb[l] + w * delta[l] * prec.xi;
        let ojj = prec.omega(j, j);
        let mut shift = 0.0;
        for l in 0..p {
            if l != j {
                shift += prec.omega(j, l) / ojj * (row[l] - prior_mean(l)) / delta[l];
            }
        }
        Self {
            mean: prior_mean(j) - delta[j] * shift,
            var: w * delta[j] * delta[j] / ojj,
            interval: ystar_interval(row, j, label),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TruncDraw> {
        sample_truncnorm(self.mean, self.var, self.interval, rng)
    }
}

/// Degrees of freedom of the inverse-Wishart conditional of the unnormalised `Phi*`.
pub fn phi_dof(rule: PhiDof, prior: &PriorSpec, n: usize) -> f64 {
    let p = prior.p() as f64;
    match rule {
        PhiDof::Printed => prior.eta + n as f64 + p + 1.0,
        PhiDof::Conjugate => prior.eta + n as f64,
    }
}

/// Scale matrix `Phi0 + sum_i (1/W_i) u_i u_i'` with `u_i = D^{-1}(r_i - W_i D xi) / l`.
pub fn phi_scale(
    state: &ChainState,
    resid: &[f64],
    prior: &PriorSpec,
    q: &QuantileSpec,
) -> DMatrix<f64> {
    let p = prior.p();
    let n = state.w.len();
    let mut s = prior.phi0.clone();
    let mut u = vec![0.0; p];
    for i in 0..n {
        let w = state.w[i];
        for j in 0..p {
            let eps = resid[i * p + j] - w * state.delta[j] * q.xi();
            u[j] = eps / (state.delta[j] * q.l_scale());
        }
        for a in 0..p {
            for b in a..p {
                s[(a, b)] += u[a] * u[b] / w;
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            s[(a, b)] = s[(b, a)];
        }
    }
    s
}

/// Unnormalised draw `Phi* ~ InvWis(df, scale)`.
pub fn sample_phi_star<R: Rng + ?Sized>(
    state: &ChainState,
    resid: &[f64],
    prior: &PriorSpec,
    q: &QuantileSpec,
    dof: PhiDof,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let scale = phi_scale(state, resid, prior, q);
    sample_inverse_wishart(phi_dof(dof, prior, state.w.len()), &scale, rng)
}

/// Correlation matrix of a draw of `Phi*`.
pub fn normalize_phi(phi_star: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let phi = correlation_from_covariance(phi_star);
    if !is_spd(&phi) {
        return Err(McqrError::Decomposition {
            what: "normalised Phi".into(),
            matrix: rows_of(phi_star),
        });
    }
    Ok(phi)
}

pub fn sample_phi_fc<R: Rng + ?Sized>(
    state: &ChainState,
    resid: &[f64],
    prior: &PriorSpec,
    q: &QuantileSpec,
    dof: PhiDof,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    normalize_phi(&sample_phi_star(state, resid, prior, q, dof, rng)?)
}

/// Conditional of `d_j = 1/delta_j` given everything else.
///
/// On `d > 0` the target is proportional to
/// `d^{shape-1} exp(-alpha d) exp(-A d^2 / 2 + B d)`, where
/// `A = sum_i P_i,jj`, `B = sum_i (h_ij - sum_{l != j} P_i,jl d_l)`,
/// `P_i = (1/W_i) diag(r_i) Omega diag(r_i)` and `h_ij = r_ij (Omega xi)_j`.
/// Completing the square per observation gives the means `mu_tilde` and
/// variances `sigma_sq`, whose precision-weighted mean is `mu_star = B / A`.
#[derive(Debug, Clone)]
pub struct DConditional {
    pub j: usize,
    pub a: f64,
    pub b: f64,
    pub shape: f64,
    pub alpha: f64,
    /// Per observation; `NaN` where `r_ij = 0` and the observation carries no information.
    pub mu_tilde: Vec<f64>,
    pub sigma_sq: Vec<f64>,
}

impl DConditional {
    /// `d` holds the current `1/delta` of every coordinate.
    pub fn new(
        resid: &[f64],
        w: &[f64],
        d: &[f64],
        prec: &Precision,
        prior: &PriorSpec,
        shape: DShape,
        j: usize,
    ) -> Self {
        let n = w.len();
        let p = d.len();
        let (a, b, mu_tilde, sigma_sq) = Self::accumulate(resid, w, d, prec, j, n, p, true);
        Self {
            j,
            a,
            b,
            shape: d_shape(shape, prior, n),
            alpha: prior.alpha,
            mu_tilde,
            sigma_sq,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn accumulate(
        resid: &[f64],
        w: &[f64],
        d: &[f64],
        prec: &Precision,
        j: usize,
        n: usize,
        p: usize,
        per_obs: bool,
    ) -> (f64, f64, Vec<f64>, Vec<f64>) {
        let ojj = prec.omega(j, j);
        let oxi = prec.omega_xi[j];
        let (mut a, mut b) = (0.0, 0.0);
        let cap = if per_obs { n } else { 0 };
        let mut mu_tilde = Vec::with_capacity(cap);
        let mut sigma_sq = Vec::with_capacity(cap);
        for i in 0..n {
            let r = &resid[i * p..(i + 1) * p];
            let inv_w = 1.0 / w[i];
            let pjj = r[j] * r[j] * ojj * inv_w;
            let mut cross = 0.0;
            for l in 0..p {
                if l != j {
                    cross += prec.omega(j, l) * r[l] * d[l];
                }
            }
            let bi = r[j] * oxi - r[j] * cross * inv_w;
            a += pjj;
            b += bi;
            if per_obs {
                if pjj > 0.0 {
                    mu_tilde.push(bi / pjj);
                    sigma_sq.push(1.0 / pjj);
                } else {
                    mu_tilde.push(f64::NAN);
                    sigma_sq.push(f64::INFINITY);
                }
            }
        }
        (a, b, mu_tilde, sigma_sq)
    }

    /// Precision-weighted mean of the per-observation means.
    pub fn mu_star(&self) -> f64 {
        self.b / self.a
    }

    /// `log R`, the maximum over `d` of `-1/2 sum_i (d - mu_tilde_i)^2 / sigma_sq_i`.
    pub fn log_bound(&self) -> f64 {
        let m = self.mu_star();
        -0.5 * self
            .mu_tilde
            .iter()
            .zip(&self.sigma_sq)
            .filter(|(mu, _)| mu.is_finite())
            .map(|(mu, s2)| (m - mu) * (m - mu) / s2)
            .sum::<f64>()
    }

    /// `-1/2 sum_i (d - mu_tilde_i)^2 / sigma_sq_i`.
    pub fn log_kernel(&self, d: f64) -> f64 {
        -0.5 * self
            .mu_tilde
            .iter()
            .zip(&self.sigma_sq)
            .filter(|(mu, _)| mu.is_finite())
            .map(|(mu, s2)| (d - mu) * (d - mu) / s2)
            .sum::<f64>()
    }

    /// Unnormalised log target density of `d`.
    pub fn log_target(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * d.ln() - self.alpha * d - 0.5 * self.a * d * d + self.b * d
    }

    /// Gamma proposal rate for the given rule.
    pub fn proposal_rate(&self, rule: DRate) -> f64 {
        proposal_rate(rule, self.a, self.b, self.shape, self.alpha)
    }

    /// Log acceptance probability of a proposed `d` drawn from `Gamma(shape, rate)`.
    pub fn log_acceptance(&self, d: f64, rate: f64) -> f64 {
        let centre = (self.b - self.alpha + rate) / self.a;
        -0.5 * self.a * (d - centre) * (d - centre)
    }
}

pub fn d_shape(rule: DShape, prior: &PriorSpec, n: usize) -> f64 {
    match rule {
        DShape::NPlusK => n as f64 + prior.k_shape,
        DShape::TwiceNMinusOnePlusK => 2.0 * (n as f64 - 1.0) + prior.k_shape,
    }
}

fn proposal_rate(rule: DRate, a: f64, b: f64, shape: f64, alpha: f64) -> f64 {
    match rule {
        DRate::Prior => alpha,
        DRate::Matched => {
            if shape <= 1.0 {
                return alpha;
            }
            // Mode of the target: A d^2 - (B - alpha) d - (shape - 1) = 0.
            let c = b - alpha;
            let disc = (c * c + 4.0 * a * (shape - 1.0)).sqrt();
            let mode = if c > 0.0 {
                (c + disc) / (2.0 * a)
            } else {
                2.0 * (shape - 1.0) / (disc - c)
            };
            (shape - 1.0) / mode
        }
    }
}

/// Outcome of one coordinate update of `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DUpdate {
    pub d: f64,
    pub proposals: u32,
    pub stalled: bool,
}

/// Rejection sampler for one `d_j`. Keeps `current` and flags a stall once
/// `max_attempts` proposals have been rejected.
#[allow(clippy::too_many_arguments)]
pub fn sample_d_coordinate<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    shape: f64,
    alpha: f64,
    rate_rule: DRate,
    current: f64,
    max_attempts: u32,
    rng: &mut R,
) -> Result<DUpdate> {
    if !(a > 0.0) {
        // No residual information on this scale: the target is the gamma part alone.
        let rate = alpha - b;
        if !(rate > 0.0) {
            return Ok(DUpdate {
                d: current,
                proposals: 0,
                stalled: true,
            });
        }
        let g = Gamma::new(shape, 1.0 / rate).map_err(|e| McqrError::Domain(e.to_string()))?;
        return Ok(DUpdate {
            d: g.sample(rng),
            proposals: 1,
            stalled: false,
        });
    }
    let rate = proposal_rate(rate_rule, a, b, shape, alpha);
    let centre = (b - alpha + rate) / a;
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| McqrError::Domain(e.to_string()))?;
    for t in 1..=max_attempts {
        let d: f64 = g.sample(rng);
        let u: f64 = crate::samplers::uniform_open(rng);
        if d > 0.0 && u.ln() <= -0.5 * a * (d - centre) * (d - centre) {
            return Ok(DUpdate {
                d,
                proposals: t,
                stalled: false,
            });
        }
    }
    Ok(DUpdate {
        d: current,
        proposals: max_attempts,
        stalled: true,
    })
}

/// Counters accumulated over the `D` step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DStepStats {
    pub proposals: u64,
    pub stalls: Vec<u64>,
}

/// Update every `delta_j` in ascending order, each conditioned on the current others.
#[allow(clippy::too_many_arguments)]
pub fn sample_d_fc<R: Rng + ?Sized>(
    state: &ChainState,
    resid: &[f64],
    prior: &PriorSpec,
    prec: &Precision,
    config: &GibbsConfig,
    stats: &mut DStepStats,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = state.w.len();
    let p = state.delta.len();
    if stats.stalls.len() != p {
        stats.stalls = vec![0; p];
    }
    let shape = d_shape(config.d_shape, prior, n);
    let mut d: Vec<f64> = state.delta.iter().map(|v| 1.0 / v).collect();
    for j in 0..p {
        let (a, b, _, _) = DConditional::accumulate(resid, &state.w, &d, prec, j, n, p, false);
        let upd = sample_d_coordinate(
            a,
            b,
            shape,
            prior.alpha,
            config.d_rate,
            d[j],
            config.rejection_max_attempts,
            rng,
        )?;
        stats.proposals += u64::from(upd.proposals);
        if upd.stalled {
            stats.stalls[j] += 1;
        }
        d[j] = upd.d;
    }
    Ok(d.iter().map(|v| 1.0 / v).collect())
}
