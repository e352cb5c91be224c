//! Model-level types: quantile parameterisation, datasets, priors, the chain
//! state and the multivariate asymmetric Laplace (MAL) density.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{McqrError, Result};
use crate::linalg::{cholesky_jittered, is_spd, is_symmetric};
use crate::special::ln_bessel_k;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(McqrError::Domain(format!("tau must lie in (0, 1), got {tau}")))
    }
}

/// Quantile vector `xi = (1 - 2 tau) / (tau (1 - tau)) * 1_p`.
pub fn xi_from_tau(tau: f64, p: usize) -> Result<DVector<f64>> {
    check_tau(tau)?;
    if p == 0 {
        return Err(McqrError::Domain("xi requires p >= 1".into()));
    }
    Ok(DVector::from_element(p, (1.0 - 2.0 * tau) / (tau * (1.0 - tau))))
}

/// Scalar `l` with `L = l I`, `l = sqrt(2 / (tau (1 - tau)))`.
pub fn l_scale_from_tau(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok((2.0 / (tau * (1.0 - tau))).sqrt())
}

/// Quantile level together with the skew and scale it determines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QuantileSpec {
    tau: f64,
    xi: f64,
    l_scale: f64,
}

impl QuantileSpec {
    pub fn new(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            tau,
            xi: (1.0 - 2.0 * tau) / (tau * (1.0 - tau)),
            l_scale: (2.0 / (tau * (1.0 - tau))).sqrt(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Common value of every element of the quantile vector.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn xi_vector(&self, p: usize) -> DVector<f64> {
        DVector::from_element(p, self.xi)
    }

    pub fn l_scale(&self) -> f64 {
        self.l_scale
    }

    /// `Sigma = L Phi L`.
    pub fn sigma(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        phi * (self.l_scale * self.l_scale)
    }
}

impl TryFrom<f64> for QuantileSpec {
    type Error = McqrError;
    fn try_from(tau: f64) -> Result<Self> {
        QuantileSpec::new(tau)
    }
}

impl From<QuantileSpec> for f64 {
    fn from(q: QuantileSpec) -> f64 {
        q.tau
    }
}

/// `n` observed choices with one `p x k` design matrix per observation.
///
/// Label `0` is the baseline alternative; label `j >= 1` refers to
/// `alternatives[j - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDataset {
    pub baseline: String,
    pub alternatives: Vec<String>,
    pub coef_names: Vec<String>,
    pub obs_ids: Vec<String>,
    pub y: Vec<usize>,
    /// Row-major `p x k` blocks, one per observation.
    pub x: Vec<Vec<Vec<f64>>>,
}

impl ChoiceDataset {
    pub fn new(
        baseline: String,
        alternatives: Vec<String>,
        coef_names: Vec<String>,
        obs_ids: Vec<String>,
        y: Vec<usize>,
        x: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let p = alternatives.len();
        let k = coef_names.len();
        if p == 0 {
            return Err(McqrError::Domain("dataset needs at least one non-baseline alternative".into()));
        }
        if y.len() != x.len() || y.len() != obs_ids.len() {
            return Err(McqrError::Domain(format!(
                "inconsistent lengths: {} labels, {} design blocks, {} ids",
                y.len(),
                x.len(),
                obs_ids.len()
            )));
        }
        for (i, (&yi, xi)) in y.iter().zip(&x).enumerate() {
            if yi > p {
                return Err(McqrError::Domain(format!("label {yi} of observation {i} exceeds p = {p}")));
            }
            if xi.len() != p || xi.iter().any(|row| row.len() != k) {
                return Err(McqrError::Domain(format!(
                    "design block of observation {i} is not {p}x{k}"
                )));
            }
        }
        Ok(Self {
            baseline,
            alternatives,
            coef_names,
            obs_ids,
            y,
            x,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.alternatives.len()
    }

    pub fn k(&self) -> usize {
        self.coef_names.len()
    }

    pub fn design(&self, i: usize) -> DMatrix<f64> {
        let (p, k) = (self.p(), self.k());
        DMatrix::from_fn(p, k, |r, c| self.x[i][r][c])
    }

    /// `X_i beta` as a plain vector.
    pub fn linear_predictor(&self, i: usize, beta: &[f64]) -> Vec<f64> {
        self.x[i]
            .iter()
            .map(|row| row.iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Hyperparameters of `beta ~ MN(b0, B0)`, `Phi ~ InvWis(eta, Phi0)` and
/// `delta_jj ~ InvGam(k, alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub b0: DVector<f64>,
    pub b0_cov: DMatrix<f64>,
    pub eta: f64,
    pub phi0: DMatrix<f64>,
    pub k_shape: f64,
    pub alpha: f64,
}

impl PriorSpec {
    pub fn new(
        b0: DVector<f64>,
        b0_cov: DMatrix<f64>,
        eta: f64,
        phi0: DMatrix<f64>,
        k_shape: f64,
        alpha: f64,
    ) -> Result<Self> {
        let k = b0.len();
        let p = phi0.nrows();
        if b0_cov.shape() != (k, k) {
            return Err(McqrError::config("B0", format!("expected {k}x{k}, got {:?}", b0_cov.shape())));
        }
        if !is_spd(&b0_cov) {
            return Err(McqrError::config("B0", "must be symmetric positive definite"));
        }
        if !phi0.is_square() || !is_spd(&phi0) {
            return Err(McqrError::config("Phi0", "must be symmetric positive definite"));
        }
        if !(eta > p as f64 - 1.0) {
            return Err(McqrError::config("eta", format!("must exceed p - 1 = {}, got {eta}", p as f64 - 1.0)));
        }
        if !(k_shape > 0.0) {
            return Err(McqrError::config("k", format!("must be positive, got {k_shape}")));
        }
        if !(alpha > 0.0) {
            return Err(McqrError::config("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(Self {
            b0,
            b0_cov,
            eta,
            phi0,
            k_shape,
            alpha,
        })
    }

    /// `b0 = 0, B0 = I, eta = 20, Phi0 = I, k = 10, alpha = 1/2`.
    pub fn default_for(p: usize, k: usize) -> Self {
        Self {
            b0: DVector::zeros(k),
            b0_cov: DMatrix::identity(k, k),
            eta: 20.0,
            phi0: DMatrix::identity(p, p),
            k_shape: 10.0,
            alpha: 0.5,
        }
    }

    pub fn p(&self) -> usize {
        self.phi0.nrows()
    }

    pub fn k(&self) -> usize {
        self.b0.len()
    }
}

/// Current values of every block of the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta: DVector<f64>,
    /// `n x p` latent relative utilities.
    pub ystar: DMatrix<f64>,
    pub w: Vec<f64>,
    pub phi: DMatrix<f64>,
    /// Diagonal of `D`.
    pub delta: Vec<f64>,
}

impl ChainState {
    /// `beta = b0`, chosen utility `1` and all others `-1`, `W = 1`, `Phi = I`, `D = I`.
    pub fn initial(data: &ChoiceDataset, prior: &PriorSpec) -> Self {
        let (n, p) = (data.n(), data.p());
        let ystar = DMatrix::from_fn(n, p, |i, j| if data.y[i] == j + 1 { 1.0 } else { -1.0 });
        Self {
            beta: prior.b0.clone(),
            ystar,
            w: vec![1.0; n],
            phi: DMatrix::identity(p, p),
            delta: vec![1.0; p],
        }
    }

    pub fn trace_d(&self) -> f64 {
        self.delta.iter().sum()
    }

    /// Checks every state invariant, returning a description of the first violation.
    pub fn check_invariants(&self, data: &ChoiceDataset) -> std::result::Result<(), String> {
        let p = self.phi.nrows();
        for j in 0..p {
            if self.phi[(j, j)] != 1.0 {
                return Err(format!("phi[{j},{j}] = {} != 1", self.phi[(j, j)]));
            }
        }
        if !is_symmetric(&self.phi, 0.0) {
            return Err("phi is not symmetric".into());
        }
        if nalgebra::Cholesky::new(self.phi.clone()).is_none() {
            return Err("phi is not positive definite".into());
        }
        if let Some(i) = self.w.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(format!("w[{i}] = {} is not positive", self.w[i]));
        }
        if let Some(j) = self.delta.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(format!("delta[{j}] = {} is not positive", self.delta[j]));
        }
        for i in 0..data.n() {
            let row: Vec<f64> = self.ystar.row(i).iter().copied().collect();
            let got = choice_from_utilities(&row);
            if got != data.y[i] {
                return Err(format!(
                    "row {i}: utilities {row:?} imply choice {got}, observed {}",
                    data.y[i]
                ));
            }
        }
        Ok(())
    }
}

/// Observed choice implied by a vector of relative utilities: the (1-based)
/// index of the maximum if it is positive, otherwise the baseline `0`.
/// Ties go to the lowest index.
pub fn choice_from_utilities(ystar_row: &[f64]) -> usize {
    let mut best = 0usize;
    let mut best_val = 0.0_f64;
    for (j, &v) in ystar_row.iter().enumerate() {
        if v > best_val {
            best = j + 1;
            best_val = v;
        }
    }
    best
}

/// Parameters of `MAL(mu, skew, cov)`. In the model, `skew = D xi` and
/// `cov = D Sigma D`.
#[derive(Debug, Clone, PartialEq)]
pub struct MalParams {
    pub mu: DVector<f64>,
    pub skew: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl MalParams {
    pub fn from_model(mu: DVector<f64>, q: &QuantileSpec, delta: &[f64], phi: &DMatrix<f64>) -> Self {
        let p = delta.len();
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(delta));
        let skew = &d * q.xi_vector(p);
        let cov = &d * q.sigma(phi) * &d;
        Self { mu, skew, cov }
    }
}

/// Log-density of the multivariate asymmetric Laplace law
///
/// `f(y) = 2 exp{(y-mu)' C^-1 s} / ((2 pi)^{p/2} |C|^{1/2}) (m / (2+d))^{nu/2} K_nu(sqrt((2+d) m))`
///
/// with `C = cov`, `s = skew`, `m = (y-mu)' C^-1 (y-mu)`, `d = s' C^-1 s` and
/// `nu = (2 - p) / 2`. At `y = mu` the density is finite only for `p = 1`.
pub fn mal_log_density(y: &DVector<f64>, params: &MalParams) -> Result<f64> {
    let p = params.mu.len();
    if y.len() != p || params.skew.len() != p || params.cov.shape() != (p, p) {
        return Err(McqrError::Domain("MAL dimensions disagree".into()));
    }
    let chol = cholesky_jittered(&params.cov, 0.0, "MAL covariance")?;
    let resid = y - &params.mu;
    let cinv_resid = chol.solve(&resid);
    let cinv_skew = chol.solve(&params.skew);
    let m = resid.dot(&cinv_resid);
    let d = params.skew.dot(&cinv_skew);
    let linear = resid.dot(&cinv_skew);
    let ln_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let nu = (2.0 - p as f64) / 2.0;

    let head = LN_2 + linear - 0.5 * p as f64 * (2.0 * PI).ln() - 0.5 * ln_det;
    if m <= 0.0 {
        if p == 1 {
            // (m/(2+d))^{1/4} K_{1/2}(sqrt((2+d) m)) -> sqrt(pi/2) / sqrt(2+d)
            return Ok(head + 0.5 * (PI / 2.0).ln() - 0.5 * (2.0 + d).ln());
        }
        return Ok(f64::INFINITY);
    }
    let arg = ((2.0 + d) * m).sqrt();
    Ok(head + 0.5 * nu * (m.ln() - (2.0 + d).ln()) + ln_bessel_k(nu, arg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_examples() {
        assert_eq!(xi_from_tau(0.5, 3).unwrap(), DVector::zeros(3));
        let v = xi_from_tau(0.25, 2).unwrap();
        assert!(v.iter().all(|&x| (x - 8.0 / 3.0).abs() < 1e-14));
        let v = xi_from_tau(0.75, 2).unwrap();
        assert!(v.iter().all(|&x| (x + 8.0 / 3.0).abs() < 1e-14));
        assert!(xi_from_tau(0.0, 2).is_err());
        assert!(xi_from_tau(1.0, 2).is_err());
        assert!(xi_from_tau(f64::NAN, 2).is_err());
    }

    #[test]
    fn l_scale_examples() {
        assert!((l_scale_from_tau(0.5).unwrap() - 8f64.sqrt()).abs() < 1e-14);
        assert!((l_scale_from_tau(0.25).unwrap() - 3.265_986_323_710_904).abs() < 1e-12);
        assert!(l_scale_from_tau(-0.1).is_err());
        for &t in &[0.01, 0.2, 0.37, 0.5] {
            let (a, b) = (l_scale_from_tau(t).unwrap(), l_scale_from_tau(1.0 - t).unwrap());
            assert!((a - b).abs() < 1e-14 * a);
        }
    }

    #[test]
    fn choice_examples() {
        assert_eq!(choice_from_utilities(&[-1.0, -2.0, -3.0]), 0);
        assert_eq!(choice_from_utilities(&[2.0, 1.0, 0.5]), 1);
        assert_eq!(choice_from_utilities(&[0.5, 3.0, 3.0 - 1e-12]), 2);
        assert_eq!(choice_from_utilities(&[0.0, 0.0]), 0);
        assert_eq!(choice_from_utilities(&[1.0, 1.0]), 1);
    }

    #[test]
    fn quantile_spec_serde_is_the_bare_tau() {
        let q = QuantileSpec::new(0.25).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), "0.25");
        let back: QuantileSpec = serde_json::from_str("0.25").unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<QuantileSpec>("1.0").is_err());
    }

    #[test]
    fn prior_validation() {
        let p = PriorSpec::default_for(3, 7);
        assert!(PriorSpec::new(p.b0.clone(), p.b0_cov.clone(), 2.0, p.phi0.clone(), 10.0, 0.5).is_err());
        assert!(PriorSpec::new(p.b0.clone(), p.b0_cov.clone(), 2.5, p.phi0.clone(), 10.0, 0.5).is_ok());
        let bad = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            PriorSpec::new(p.b0.clone(), p.b0_cov.clone(), 20.0, bad, 10.0, 0.5),
            Err(McqrError::Config { field, .. }) if field == "Phi0"
        ));
    }

    fn mal_p1(tau: f64) -> MalParams {
        let q = QuantileSpec::new(tau).unwrap();
        MalParams::from_model(DVector::zeros(1), &q, &[1.0], &DMatrix::identity(1, 1))
    }

    #[test]
    fn reduces_to_univariate_ald() {
        // tau (1-tau) exp(-rho_tau(y)) with rho_tau(u) = u (tau - 1{u<0}).
        for &tau in &[0.25, 0.5, 0.75] {
            let params = mal_p1(tau);
            for &y in &[-3.0, -0.7, 0.2, 1.0, 4.5] {
                let rho = y * (tau - if y < 0.0 { 1.0 } else { 0.0 });
                let want = (tau * (1.0 - tau)).ln() - rho;
                let got = mal_log_density(&DVector::from_element(1, y), &params).unwrap();
                assert!((got.exp() - want.exp()).abs() < 1e-8, "tau={tau} y={y}: {got} vs {want}");
            }
            let at_mode = mal_log_density(&DVector::zeros(1), &params).unwrap();
            assert!((at_mode - (tau * (1.0 - tau)).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_case_decreases_away_from_location() {
        let q = QuantileSpec::new(0.5).unwrap();
        let params = MalParams::from_model(DVector::zeros(2), &q, &[1.0, 2.0], &DMatrix::identity(2, 2));
        let v = DVector::from_vec(vec![0.6, -0.8]);
        let mut prev = f64::INFINITY;
        for step in 1..40 {
            let t = step as f64 * 0.25;
            let f = mal_log_density(&(&v * t), &params).unwrap();
            let g = mal_log_density(&(&v * -t), &params).unwrap();
            assert!((f - g).abs() < 1e-10);
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn singular_covariance_is_an_error() {
        let params = MalParams {
            mu: DVector::zeros(2),
            skew: DVector::zeros(2),
            cov: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        };
        assert!(matches!(
            mal_log_density(&DVector::from_vec(vec![1.0, 0.0]), &params),
            Err(McqrError::Decomposition { .. })
        ));
    }
}
