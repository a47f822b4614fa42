//! Wronskian matrices: normalized kernel derivatives at coincident points.
//!
//! entry(alpha, beta) = K^{(alpha, beta)}(0, 0) / (alpha! beta!), which is
//! the coefficient of x^alpha y^beta in the Taylor expansion of K(x, y)
//! around (0, 0). Rows and columns follow the canonical multi-index
//! enumeration, so the matrix is blocked by total degree.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{binomial_big, factorial_big, Kernel, KernelFamily, Smoothness};
use crate::error::{Error, Result};
use crate::multiindex::{card_p, MultiIndex, MultiIndexSet};

/// Derivative data of a kernel at the diagonal, indexed by multi-index
/// pairs up to a total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct WronskianMatrix {
    pub degree: usize,
    pub dim: usize,
    pub matrix: DMatrix<f64>,
}

impl WronskianMatrix {
    /// Wrap an externally computed derivative matrix. The size must match
    /// the multi-index count for the degree and the data must be symmetric,
    /// as derivatives of a symmetric kernel are.
    pub fn from_raw(degree: usize, dim: usize, matrix: DMatrix<f64>) -> Result<WronskianMatrix> {
        let n = card_p(degree, dim)?;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "degree {degree} in dimension {dim} indexes {n} monomials, got a {}x{} matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.norm().max(1.0);
        let asym = (&matrix - matrix.transpose()).norm();
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric(asym / scale));
        }
        Ok(WronskianMatrix { degree, dim, matrix })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }
}

/// W_{<= k}: all derivative entries for multi-indices of total degree <= k.
///
/// For a one-dimensional translation kernel sum_j alpha_j (x-y)^j the entry
/// is (-1)^j C(i+j, j) alpha_{i+j}. For a radial kernel the entry is the
/// coefficient of x^alpha y^beta in sum_l f_{2l} (sum_i (x_i - y_i)^2)^l,
/// which collapses to the single term with l = (|alpha| + |beta|)/2.
///
/// Finitely smooth kernels only have derivative data below the odd leading
/// term, so k <= r - 1 is required.
pub fn wronskian_full(kernel: &Kernel, k: usize, d: usize) -> Result<WronskianMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if let Smoothness::Finite(r) = kernel.smoothness {
        if k > r - 1 {
            return Err(Error::DegreeExceedsSmoothness { requested: 2 * k, available: 2 * r - 2 });
        }
    }
    if kernel.family == KernelFamily::TranslationTaylor {
        if d != 1 {
            return Err(Error::InvalidArgument(
                "translation kernels are one-dimensional".into(),
            ));
        }
        let n = k + 1;
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let binom = binomial_big((i + j) as u64, j as u64)
                    .to_f64()
                    .expect("binomial fits in f64");
                w[(i, j)] = sign * binom * kernel.translation_coeff(i + j)?;
            }
        }
        return Ok(WronskianMatrix { degree: k, dim: 1, matrix: w });
    }

    let set = MultiIndexSet::new(k, d)?;
    let n = set.len();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let entry = radial_entry(kernel, &set[i], &set[j])?;
            w[(i, j)] = entry;
            w[(j, i)] = entry;
        }
    }
    Ok(WronskianMatrix { degree: k, dim: d, matrix: w })
}

/// W_{diag s}: the degree-s antidiagonal block over all multi-indices of
/// total degree <= s. entry(alpha, beta) = f_s times the coefficient of
/// x^alpha y^beta in ||x - y||^s when |alpha| + |beta| = s, zero otherwise.
/// Only even s names a polynomial; odd distance powers never expand.
pub fn wronskian_antidiag(kernel: &Kernel, s: usize, d: usize) -> Result<WronskianMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if s % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "antidiagonal blocks exist for even degree only, got {s}"
        )));
    }
    if let Smoothness::Finite(r) = kernel.smoothness {
        if s > 2 * r - 2 {
            return Err(Error::DegreeExceedsSmoothness { requested: s, available: 2 * r - 2 });
        }
    }
    let l = s / 2;
    if kernel.family == KernelFamily::TranslationTaylor {
        if d != 1 {
            return Err(Error::InvalidArgument(
                "translation kernels are one-dimensional".into(),
            ));
        }
        let f_s = kernel.translation_coeff(s)?;
        let n = s + 1;
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let binom = binomial_big(s as u64, i as u64).to_f64().expect("binomial fits in f64");
            w[(i, s - i)] = f_s * sign * binom;
        }
        return Ok(WronskianMatrix { degree: s, dim: 1, matrix: w });
    }

    let f_rational = kernel.even_coeff_rational(l);
    let f_float = kernel.even_coeff(l)?;
    let set = MultiIndexSet::new(s, d)?;
    let n = set.len();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if (set[i].degree() + set[j].degree()) as usize != s {
                continue;
            }
            let Some(factor) = monomial_factor(&set[i], &set[j]) else { continue };
            let entry = match &f_rational {
                Some(f) => rational_to_f64(&(f * BigRational::from(factor))),
                None => f_float * factor.to_f64().expect("factor fits in f64"),
            };
            w[(i, j)] = entry;
            w[(j, i)] = entry;
        }
    }
    Ok(WronskianMatrix { degree: s, dim: d, matrix: w })
}

/// Coefficient of x^alpha y^beta in f applied radially: the expansion of
/// (sum_i (x_i - y_i)^2)^l contributes only at l = (|alpha| + |beta|)/2,
/// so the entry is f_{2l} times one integer factor.
fn radial_entry(kernel: &Kernel, alpha: &MultiIndex, beta: &MultiIndex) -> Result<f64> {
    let Some(factor) = monomial_factor(alpha, beta) else {
        return Ok(0.0);
    };
    let l = ((alpha.degree() + beta.degree()) / 2) as usize;
    match kernel.even_coeff_rational(l) {
        Some(f) => Ok(rational_to_f64(&(f * BigRational::from(factor)))),
        None => Ok(kernel.even_coeff(l)? * factor.to_f64().expect("factor fits in f64")),
    }
}

/// Integer coefficient of x^alpha y^beta in (sum_i (x_i - y_i)^2)^l where
/// 2l = |alpha| + |beta|: the multinomial term with m_i = (alpha_i + beta_i)/2
/// exists only when every coordinate sum is even, and then equals
/// l!/prod(m_i!) * prod C(2 m_i, alpha_i) * (-1)^{|beta|}.
fn monomial_factor(alpha: &MultiIndex, beta: &MultiIndex) -> Option<BigInt> {
    if (alpha.degree() + beta.degree()) % 2 != 0 {
        return None;
    }
    let mut m = Vec::with_capacity(alpha.dim());
    for (&a, &b) in alpha.exps().iter().zip(beta.exps()) {
        let s = a + b;
        if s % 2 != 0 {
            return None;
        }
        m.push(s / 2);
    }
    let l: u32 = m.iter().sum();
    let mut factor = factorial_big(l as u64);
    for &mi in &m {
        factor /= factorial_big(mi as u64);
    }
    for (&mi, &a) in m.iter().zip(alpha.exps()) {
        factor *= binomial_big(2 * mi as u64, a as u64);
    }
    if beta.degree() % 2 == 1 {
        factor = -factor;
    }
    Some(factor)
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().expect("rational representable as f64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn gaussian_degree3_line() {
        let w = wronskian_full(&Kernel::gaussian(), 3, 1).unwrap();
        let want = dmatrix![
            1.0, 0.0, -1.0, 0.0;
            0.0, 2.0, 0.0, -2.0;
            -1.0, 0.0, 3.0, 0.0;
            0.0, -2.0, 0.0, 10.0 / 3.0
        ];
        assert_relative_eq!(w.matrix, want, epsilon = 1e-15);
    }

    #[test]
    fn exponential_degree0_only() {
        let w = wronskian_full(&Kernel::exponential(), 0, 1).unwrap();
        assert_eq!(w.matrix, dmatrix![1.0]);
        assert!(matches!(
            wronskian_full(&Kernel::exponential(), 1, 1),
            Err(Error::DegreeExceedsSmoothness { requested: 2, available: 0 })
        ));
    }

    #[test]
    fn matern2_degree1_plane_is_identity() {
        let w = wronskian_full(&Kernel::matern2(), 1, 2).unwrap();
        assert_eq!(w.matrix, DMatrix::identity(3, 3));
    }

    #[test]
    fn gaussian_degree1_plane() {
        // Coefficient of x_i y_i in -((x_1-y_1)^2 + (x_2-y_2)^2) is +2.
        let w = wronskian_full(&Kernel::gaussian(), 1, 2).unwrap();
        assert_eq!(w.matrix, DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0, 2.0]));
    }

    #[test]
    fn antidiag_degree2_line() {
        for kernel in [Kernel::gaussian(), Kernel::matern2(), Kernel::matern3()] {
            let f2 = kernel.even_coeff(1).unwrap();
            let w = wronskian_antidiag(&kernel, 2, 1).unwrap();
            let want = dmatrix![
                0.0, 0.0, 1.0;
                0.0, -2.0, 0.0;
                1.0, 0.0, 0.0
            ] * f2;
            assert_relative_eq!(w.matrix, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn antidiag_degree0_is_f0() {
        for d in 1..=3 {
            let w = wronskian_antidiag(&Kernel::matern2(), 0, d).unwrap();
            assert_eq!(w.matrix, dmatrix![1.0]);
        }
    }

    #[test]
    fn matern2_antidiag_degree2_plane() {
        // Index order: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
        let f2 = -0.5;
        let w = wronskian_antidiag(&Kernel::matern2(), 2, 2).unwrap();
        let mut want = DMatrix::zeros(6, 6);
        want[(0, 3)] = f2;
        want[(3, 0)] = f2;
        want[(0, 5)] = f2;
        want[(5, 0)] = f2;
        want[(1, 1)] = -2.0 * f2;
        want[(2, 2)] = -2.0 * f2;
        assert_relative_eq!(w.matrix, want, epsilon = 1e-15);
    }

    #[test]
    fn antidiag_gating() {
        assert!(matches!(
            wronskian_antidiag(&Kernel::gaussian(), 3, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            wronskian_antidiag(&Kernel::matern2(), 4, 1),
            Err(Error::DegreeExceedsSmoothness { requested: 4, available: 2 })
        ));
        assert!(wronskian_antidiag(&Kernel::gaussian(), 8, 2).is_ok());
    }

    #[test]
    fn antidiag_matches_block_of_full() {
        // The top antidiagonal of W_{<=s} is exactly W_diag(s), on the
        // degrees where both exist: the full matrix needs data through
        // order 2s (s <= r-1), the block only through s (s <= 2r-2).
        let cases: [(Kernel, &[usize]); 3] = [
            (Kernel::gaussian(), &[0, 2, 4, 6]),
            (Kernel::matern2(), &[0]),
            (Kernel::matern3(), &[0, 2]),
        ];
        for (kernel, degrees) in cases {
            for &s in degrees {
                let full = wronskian_full(&kernel, s, 1).unwrap();
                let anti = wronskian_antidiag(&kernel, s, 1).unwrap();
                for i in 0..=s {
                    for j in 0..=s {
                        let want = if i + j == s { full.matrix[(i, j)] } else { 0.0 };
                        assert_eq!(anti.matrix[(i, j)], want, "kernel at s={s}, ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn radial_wronskian_exactly_symmetric() {
        let w = wronskian_full(&Kernel::gaussian(), 4, 3).unwrap();
        assert_eq!(w.matrix, w.matrix.transpose());
        let w = wronskian_full(&Kernel::matern3(), 2, 2).unwrap();
        assert_eq!(w.matrix, w.matrix.transpose());
    }

    #[test]
    fn translation_matches_radial_on_line() {
        // matern2 data written as a translation sequence gives the same
        // degree-1 Wronskian as the radial construction.
        let t = Kernel::translation_taylor(vec![1.0, 0.0, -0.5, 1.0 / 3.0], false).unwrap();
        let w_t = wronskian_full(&t, 1, 1).unwrap();
        let w_r = wronskian_full(&Kernel::matern2(), 1, 1).unwrap();
        assert_relative_eq!(w_t.matrix, w_r.matrix, epsilon = 1e-15);
        assert!(wronskian_full(&t, 2, 1).is_err());

        // s = 2 sits exactly at the antidiagonal bound 2r - 2 for r = 2.
        let anti_t = wronskian_antidiag(&t, 2, 1).unwrap();
        let anti_r = wronskian_antidiag(&Kernel::matern2(), 2, 1).unwrap();
        assert_relative_eq!(anti_t.matrix, anti_r.matrix, epsilon = 1e-15);
    }

    #[test]
    fn infinite_taylor_data_runs_out() {
        let k = Kernel::radial_taylor(vec![1.0, -1.0], None, Some(Smoothness::Infinite)).unwrap();
        assert!(wronskian_full(&k, 1, 1).is_ok());
        assert!(matches!(
            wronskian_full(&k, 2, 1),
            Err(Error::DegreeExceedsSmoothness { requested: 4, available: 2 })
        ));
    }

    #[test]
    fn raw_matrix_validation() {
        let ok = WronskianMatrix::from_raw(1, 2, DMatrix::identity(3, 3));
        assert!(ok.is_ok());
        assert!(WronskianMatrix::from_raw(1, 2, DMatrix::identity(4, 4)).is_err());
        let mut skew = DMatrix::zeros(3, 3);
        skew[(0, 1)] = 1.0;
        assert!(matches!(
            WronskianMatrix::from_raw(1, 2, skew),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn user_taylor_float_path_matches_rational_path() {
        // The same numbers through the f64 fallback agree with the exact
        // route to machine precision.
        let user = Kernel::radial_taylor(
            vec![1.0, -0.5],
            Some(1.0 / 3.0),
            Some(Smoothness::Finite(2)),
        )
        .unwrap();
        let w_user = wronskian_full(&user, 1, 2).unwrap();
        let w_exact = wronskian_full(&Kernel::matern2(), 1, 2).unwrap();
        assert_relative_eq!(w_user.matrix, w_exact.matrix, epsilon = 1e-14);
    }
}
