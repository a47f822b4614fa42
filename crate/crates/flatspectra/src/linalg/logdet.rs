//! Sign-aware log-determinant via partially pivoted LU.
//!
//! The determinants this crate meets scale like eps^(n(n-1)); working in
//! (sign, log) space is not an optimization but the only way to see them
//! at all.

use nalgebra::DMatrix;

use super::SignLog;
use crate::error::{Error, Result};

/// Determinant of a square matrix as (sign, log|det|). A zero pivot at
/// working precision yields sign 0. The determinant of the empty matrix
/// is 1 by convention.
pub fn log_det(m: &DMatrix<f64>) -> Result<SignLog> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "log_det needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut a = m.clone();
    let mut sign = 1i8;
    let mut log_abs = 0.0f64;
    for k in 0..n {
        let mut piv = k;
        let mut piv_mag = a[(k, k)].abs();
        for i in (k + 1)..n {
            let mag = a[(i, k)].abs();
            if mag > piv_mag {
                piv_mag = mag;
                piv = i;
            }
        }
        if piv_mag == 0.0 {
            return Ok(SignLog::ZERO);
        }
        if piv != k {
            a.swap_rows(piv, k);
            sign = -sign;
        }
        let akk = a[(k, k)];
        if akk < 0.0 {
            sign = -sign;
        }
        log_abs += akk.abs().ln();
        for i in (k + 1)..n {
            let f = a[(i, k)] / akk;
            for j in (k + 1)..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    Ok(SignLog { sign, log_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity() {
        let d = log_det(&DMatrix::<f64>::identity(3, 3)).unwrap();
        assert_eq!(d.sign, 1);
        assert_eq!(d.log_abs, 0.0);
    }

    #[test]
    fn tiny_diagonal_without_underflow() {
        let m = DMatrix::from_row_slice(2, 2, &[1e-200, 0.0, 0.0, 1e-200]);
        let d = log_det(&m).unwrap();
        assert_eq!(d.sign, 1);
        assert_relative_eq!(d.log_abs, -400.0 * std::f64::consts::LN_10, max_relative = 1e-14);
    }

    #[test]
    fn swap_matrix_is_negative() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let d = log_det(&m).unwrap();
        assert_eq!(d.sign, -1);
        assert_eq!(d.log_abs, 0.0);
    }

    #[test]
    fn exact_singularity_gives_sign_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let d = log_det(&m).unwrap();
        assert_eq!(d.sign, 0);
        assert_eq!(d.log_abs, f64::NEG_INFINITY);
    }

    #[test]
    fn matches_cofactor_expansion_3x3() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 3.0, 0.5, 4.0, -2.0, 1.0, 0.0, 1.5]);
        // 2*(4*1.5 - (-2)*0) - (-1)*(0.5*1.5 - (-2)*1) + 3*(0.5*0 - 4*1)
        let want = 2.0 * 6.0 + 1.0 * 2.75 + 3.0 * (-4.0);
        let d = log_det(&m).unwrap();
        assert_relative_eq!(d.value(), want, max_relative = 1e-13);
    }

    #[test]
    fn empty_matrix_is_one() {
        let d = log_det(&DMatrix::<f64>::zeros(0, 0)).unwrap();
        assert_eq!(d.sign, 1);
        assert_eq!(d.log_abs, 0.0);
    }
}
