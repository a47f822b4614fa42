//! The two structural determinant lemmas.
//!
//! Both concern a square A bordered or perturbed by a tall thin V with full
//! column rank, and both reduce to the same ingredients: det(V^T V) from a
//! QR factorization of V, and the compression of A onto the orthogonal
//! complement of V's columns.

use nalgebra::DMatrix;

use super::{esp_all, esp_general, log_det, qr_full, SignLog};
use crate::error::{Error, Result};

fn checked_border(a: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<super::FullQR> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("bordered block A must be square".into()));
    }
    if v.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "border V has {} rows but A is {n}x{n}",
            v.nrows()
        )));
    }
    let r = v.ncols();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "border V must have between 1 and {n} columns, got {r}"
        )));
    }
    let qr = qr_full(v)?;
    if !qr.is_full_rank() {
        return Err(Error::RankDeficient(format!(
            "border V has numerical rank {} < {r}",
            qr.rank
        )));
    }
    Ok(qr)
}

/// Determinant of the bordered saddle-point matrix [[A, V], [V^T, 0]],
/// in (sign, log) form: (-1)^r det(V^T V) det(Q_perp^T A Q_perp).
pub fn saddle_det_log(a: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<SignLog> {
    let qr = checked_border(a, v)?;
    let qperp = qr.q_perp();
    let projected = qperp.transpose() * a * &qperp;
    let det_projected = log_det(&projected)?;
    let sign_r = if v.ncols() % 2 == 0 { SignLog::ONE } else { SignLog::ONE.neg() };
    Ok(sign_r * qr.det_gram_log() * det_projected)
}

/// [`saddle_det_log`] collapsed to a plain f64.
pub fn saddle_det(a: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    Ok(saddle_det_log(a, v)?.value())
}

/// Leading coefficient of the polynomial t -> e_k(A + t V V^T), i.e. the
/// coefficient of t^r: det(V^T V) * e_{k-r}(Q_perp^T A Q_perp).
///
/// For k = n this equals (-1)^r times the saddle-point determinant.
pub fn esp_perturb_leading(a: &DMatrix<f64>, v: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = a.nrows();
    let r = v.ncols();
    if k < r || k > n {
        return Err(Error::InvalidArgument(format!(
            "coefficient index k must satisfy r <= k <= n, got k={k}, r={r}, n={n}"
        )));
    }
    let qr = checked_border(a, v)?;
    let qperp = qr.q_perp();
    let projected = qperp.transpose() * a * &qperp;
    let e = if k == r {
        1.0
    } else {
        let fro = projected.norm();
        let mut asym: f64 = 0.0;
        for i in 0..projected.nrows() {
            for j in (i + 1)..projected.ncols() {
                asym = asym.max((projected[(i, j)] - projected[(j, i)]).abs());
            }
        }
        let esps = if fro == 0.0 || asym <= 1e-12 * fro {
            esp_all(&projected)?
        } else {
            esp_general(&projected)
        };
        esps[k - r - 1]
    };
    Ok(qr.det_gram_log().value() * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Direct determinant of the (n+r) x (n+r) bordered matrix; the oracle
    /// the lemma is checked against.
    pub fn bordered_det_direct(a: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        let r = v.ncols();
        let mut m = DMatrix::<f64>::zeros(n + r, n + r);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, r)).copy_from(v);
        m.view_mut((n, 0), (r, n)).copy_from(&v.transpose());
        log_det(&m).unwrap().value()
    }

    #[test]
    fn identity_bordered_by_ones() {
        let a = DMatrix::<f64>::identity(2, 2);
        let v = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert_relative_eq!(saddle_det(&a, &v).unwrap(), -2.0, max_relative = 1e-14);
        assert_relative_eq!(bordered_det_direct(&a, &v), -2.0, max_relative = 1e-14);
    }

    #[test]
    fn swap_bordered_by_ones() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let v = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert_relative_eq!(saddle_det(&a, &v).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn unit_border_picks_lower_right_block() {
        let a = DMatrix::from_row_slice(2, 2, &[5.0, -2.0, 1.0, 3.5]);
        let v = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        assert_relative_eq!(saddle_det(&a, &v).unwrap(), -3.5, max_relative = 1e-13);
    }

    #[test]
    fn rank_deficient_border_rejected() {
        let a = DMatrix::<f64>::identity(3, 3);
        let v = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(saddle_det(&a, &v), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn perturbation_coefficient_examples() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 2.0]));
        let v = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        // det(A + tVV^T) = (1+t)(2+t) - t^2 = 2 + 3t.
        assert_relative_eq!(esp_perturb_leading(&a, &v, 2).unwrap(), 3.0, max_relative = 1e-13);
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_relative_eq!(esp_perturb_leading(&zero, &v, 2).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn top_coefficient_matches_saddle() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, -1.0, 0.25, 0.0, 0.25, 4.0]);
        let v = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]);
        let lhs = esp_perturb_leading(&a, &v, 3).unwrap();
        let rhs = saddle_det(&a, &v).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }
}
