//! Dense deterministic linear algebra.
//!
//! Everything here is written for matrices of modest size (n up to a couple
//! hundred) where determinism and accuracy in extreme dynamic ranges matter
//! more than speed: full Householder QR with a fixed sign convention, a
//! cyclic Jacobi eigensolver, Cholesky, sign-aware log-determinants,
//! elementary symmetric polynomials, and the two structural determinant
//! lemmas (bordered saddle-point matrices and leading coefficients of
//! low-rank ESP perturbations).

mod esp;
mod jacobi;
mod logdet;
mod qr;
mod saddle;

pub use esp::{esp_all, esp_from_values, esp_general, esp_signlog, real_poly_roots};
pub use jacobi::{sym_eig, SymEig};
pub use logdet::log_det;
pub use qr::{numerical_rank, qr_full, FullQR};
pub use saddle::{esp_perturb_leading, saddle_det, saddle_det_log};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A real number stored as (sign, log of absolute value).
///
/// Determinants in this crate scale like eps^(n(n-1)) and worse, far past
/// what f64 can hold, so every determinant-like quantity travels in this
/// form. `sign == 0` encodes an exact zero and carries `log_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignLog {
    pub const ZERO: SignLog = SignLog { sign: 0, log_abs: f64::NEG_INFINITY };
    pub const ONE: SignLog = SignLog { sign: 1, log_abs: 0.0 };

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            SignLog::ZERO
        } else {
            SignLog { sign: if x > 0.0 { 1 } else { -1 }, log_abs: x.abs().ln() }
        }
    }

    /// Back to f64; overflows to +-inf and underflows to 0 as usual.
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.log_abs.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(&self) -> SignLog {
        SignLog { sign: self.sign.abs(), log_abs: self.log_abs }
    }

    pub fn neg(&self) -> SignLog {
        SignLog { sign: -self.sign, log_abs: self.log_abs }
    }

    pub fn recip(&self) -> SignLog {
        SignLog { sign: self.sign, log_abs: -self.log_abs }
    }

    /// Signed addition in log space. Exact cancellation yields ZERO.
    pub fn add(self, other: SignLog) -> SignLog {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log_abs >= other.log_abs { (self, other) } else { (other, self) };
        let rel = (lo.log_abs - hi.log_abs).exp();
        let factor = 1.0 + (lo.sign * hi.sign) as f64 * rel;
        if factor == 0.0 {
            SignLog::ZERO
        } else {
            SignLog { sign: hi.sign, log_abs: hi.log_abs + factor.ln() }
        }
    }
}

impl std::ops::Mul for SignLog {
    type Output = SignLog;
    fn mul(self, rhs: SignLog) -> SignLog {
        let sign = self.sign * rhs.sign;
        if sign == 0 {
            SignLog::ZERO
        } else {
            SignLog { sign, log_abs: self.log_abs + rhs.log_abs }
        }
    }
}

impl std::ops::Div for SignLog {
    type Output = SignLog;
    fn div(self, rhs: SignLog) -> SignLog {
        self * rhs.recip()
    }
}

impl std::fmt::Display for SignLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({:.6})", self.log_abs),
            _ => write!(f, "-exp({:.6})", self.log_abs),
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// with positive diagonal. Fails on non-positive pivots.
pub fn cholesky(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch("Cholesky needs a square matrix".into()));
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return Err(Error::RankDeficient(format!(
                "matrix is not positive definite: Cholesky pivot {j} is {d:.3e}"
            )));
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut acc = s[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(l)
}

/// Principal angles (ascending, in radians) between the column spans of two
/// matrices with orthonormal columns of equal count. Computed from the
/// eigenvalues of (A^T B)^T (A^T B), whose square roots are the cosines.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "principal angles need equal shapes, got {}x{} vs {}x{}",
            a.nrows(), a.ncols(), b.nrows(), b.ncols()
        )));
    }
    let g = a.transpose() * b;
    let gram = g.transpose() * &g;
    let eig = sym_eig(&gram)?;
    Ok(eig
        .values
        .iter()
        .map(|&lam| lam.clamp(0.0, 1.0).sqrt().acos())
        .collect())
}

/// The largest principal angle between two equal-size orthonormal column
/// spans; 0 means identical subspaces.
pub fn largest_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    Ok(principal_angles(a, b)?.last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn signlog_roundtrip_and_ops() {
        let a = SignLog::from_value(-3.0);
        let b = SignLog::from_value(2.0);
        assert_relative_eq!((a * b).value(), -6.0, max_relative = 1e-15);
        assert_relative_eq!((a / b).value(), -1.5, max_relative = 1e-15);
        assert_relative_eq!(a.add(b).value(), -1.0, max_relative = 1e-12);
        assert!(SignLog::from_value(0.0).is_zero());
        assert_eq!(a.add(a.neg()), SignLog::ZERO);
        // Extreme range survives.
        let tiny = SignLog { sign: 1, log_abs: -400.0 * std::f64::consts::LN_10 };
        let product = tiny * tiny;
        assert_eq!(product.sign, 1);
        assert_relative_eq!(product.log_abs, -800.0 * std::f64::consts::LN_10);
    }

    #[test]
    fn cholesky_reconstructs() {
        let s = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, -2.0, 2.0, 5.0, 1.0, -2.0, 1.0, 6.0]);
        let l = cholesky(&s).unwrap();
        let back = &l * l.transpose();
        assert_relative_eq!(back, s, max_relative = 1e-14);
        for i in 0..3 {
            assert!(l[(i, i)] > 0.0);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&s).is_err());
    }

    #[test]
    fn principal_angles_identical_and_orthogonal() {
        let e01 = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let angles = principal_angles(&e01, &e01).unwrap();
        for a in angles {
            assert!(a.abs() < 1e-7);
        }
        let e2 = DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 1.0]);
        let e0 = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert_relative_eq!(
            largest_principal_angle(&e0, &e2).unwrap(),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
    }
}
