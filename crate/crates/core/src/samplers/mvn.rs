use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{McqrError, Result};
use crate::linalg::{cholesky_jittered, rows_of, symmetrize, DEFAULT_JITTER};

/// Draw from `MN(mean, cov)` as `mean + L z` with `L L' = cov`.
pub fn sample_mvnormal<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let chol = cholesky_jittered(cov, DEFAULT_JITTER, "multivariate normal covariance")?;
    Ok(sample_mvnormal_chol(mean, &chol, rng))
}

pub fn sample_mvnormal_chol<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    chol: &Cholesky<f64, Dyn>,
    rng: &mut R,
) -> DVector<f64> {
    let z = DVector::from_fn(mean.len(), |_, _| StandardNormal.sample(rng));
    mean + chol.l() * z
}

/// Inverse-Wishart draw with density `|X|^{-(df+p+1)/2} exp(-tr(S X^{-1})/2)`,
/// i.e. `X^{-1} ~ Wishart(df, S^{-1})` and `E[X] = S / (df - p - 1)`.
///
/// Bartlett decomposition: with `S = U U'` and `A` lower triangular,
/// `A_ii^2 ~ chi2(df - i)`, `A_ij ~ N(0,1)` below the diagonal,
/// `X = U (A A')^{-1} U'`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    df: f64,
    scale: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let p = scale.nrows();
    if !scale.is_square() || p == 0 {
        return Err(McqrError::Domain("inverse-Wishart scale must be square".into()));
    }
    if !(df > p as f64 - 1.0) {
        return Err(McqrError::Domain(format!(
            "inverse-Wishart degrees of freedom {df} must exceed p - 1 = {}",
            p - 1
        )));
    }
    let u = cholesky_jittered(scale, DEFAULT_JITTER, "inverse-Wishart scale")?;
    let mut a = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let shape = 0.5 * (df - i as f64);
        let chi2 = 2.0 * Gamma::new(shape, 1.0).expect("shape > 0").sample(rng);
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    // X = T T' with T = L A^{-T}, so T' = A^{-1} L'.
    let l = u.l();
    let t_t = a
        .solve_lower_triangular(&l.transpose())
        .ok_or_else(|| McqrError::Decomposition {
            what: "Bartlett factor".into(),
            matrix: rows_of(&a),
        })?;
    let mut x = t_t.transpose() * &t_t;
    symmetrize(&mut x);
    Ok(x)
}
