//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{McqrError, Result};

pub const DEFAULT_JITTER: f64 = 1e-10;

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

/// Cholesky factor of an SPD matrix, retrying once with `jitter * trace * I` added.
pub fn cholesky_jittered(
    m: &DMatrix<f64>,
    jitter: f64,
    what: &str,
) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let n = m.nrows();
    let bump = jitter * m.trace().abs().max(f64::MIN_POSITIVE);
    let jittered = m + DMatrix::<f64>::identity(n, n) * bump;
    Cholesky::new(jittered).ok_or_else(|| McqrError::Decomposition {
        what: what.to_string(),
        matrix: rows_of(m),
    })
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    for r in 0..n {
        for c in (r + 1)..n {
            let scale = m[(r, c)].abs().max(m[(c, r)].abs()).max(1.0);
            if (m[(r, c)] - m[(c, r)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn is_spd(m: &DMatrix<f64>) -> bool {
    is_symmetric(m, 1e-10) && Cholesky::new(m.clone()).is_some()
}

/// Rescales a covariance matrix to the correlation matrix `c_kl / sqrt(c_kk c_ll)`.
///
/// The diagonal is set to exactly one.
pub fn correlation_from_covariance(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    let sd: Vec<f64> = (0..n).map(|i| cov[(i, i)].sqrt()).collect();
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            1.0
        } else {
            cov[(r, c)] / (sd[r] * sd[c])
        }
    })
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn spd_inverse(m: &DMatrix<f64>, jitter: f64, what: &str) -> Result<DMatrix<f64>> {
    let chol = cholesky_jittered(m, jitter, what)?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in (r + 1)..n {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
}

pub fn quad_form(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}
