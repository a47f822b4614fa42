//! Elementary symmetric polynomials of a spectrum, and real polynomial
//! roots via companion matrices.
//!
//! e_k of an n x n matrix is the sum of its k x k principal minors, equals
//! the k-th elementary symmetric polynomial of the eigenvalues, and appears
//! (with alternating signs) among the characteristic polynomial
//! coefficients. The recurrence below builds the coefficients by
//! multiplying out prod (1 + lambda_i x) one root at a time.

use nalgebra::DMatrix;

use super::{sym_eig, SignLog};
use crate::error::{Error, Result};

/// e_1 .. e_n of a symmetric matrix, from its eigenvalues.
pub fn esp_all(s: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = sym_eig(s)?;
    Ok(esp_from_values(&eig.values))
}

/// e_1 .. e_n of an explicit list of reals.
pub fn esp_from_values(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for &x in vals {
        for k in (1..=n).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e.remove(0);
    e
}

/// The same recurrence in (sign, log) arithmetic. Needed when the inputs
/// are eigenvalue main terms whose products overflow f64 (dynamic ranges
/// past 1e+-250 appear already at moderate n).
pub fn esp_signlog(vals: &[SignLog]) -> Vec<SignLog> {
    let n = vals.len();
    let mut e = vec![SignLog::ZERO; n + 1];
    e[0] = SignLog::ONE;
    for &x in vals {
        for k in (1..=n).rev() {
            e[k] = e[k].add(x * e[k - 1]);
        }
    }
    e.remove(0);
    e
}

/// e_1 .. e_n of a general (possibly asymmetric) square matrix, via trace
/// power sums and Newton's identities. Fine at the small sizes where it is
/// used; symmetric callers should prefer [`esp_all`].
pub fn esp_general(b: &DMatrix<f64>) -> Vec<f64> {
    let n = b.nrows();
    assert_eq!(n, b.ncols(), "esp_general needs a square matrix");
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut p = vec![0.0f64; n + 1];
    for i in 1..=n {
        power *= b;
        p[i] = power.trace();
    }
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        for i in 1..=k {
            let term = e[k - i] * p[i];
            acc += if i % 2 == 1 { term } else { -term };
        }
        e[k] = acc / k as f64;
    }
    e.remove(0);
    e
}

/// All roots of a real polynomial known to have only real roots, as the
/// eigenvalues of the monic polynomial's companion matrix, sorted
/// descending. `coeffs` is highest power first.
///
/// Roots that come back with a nontrivial imaginary part mean the input
/// assumption failed (for this crate: a degenerate main-term group) and are
/// reported as an error, not silently projected.
pub fn real_poly_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.is_empty() || coeffs[0] == 0.0 {
        return Err(Error::InvalidArgument(
            "polynomial needs a nonzero leading coefficient".into(),
        ));
    }
    let m = coeffs.len() - 1;
    if m == 0 {
        return Ok(Vec::new());
    }
    // Monic normalization: lambda^m + a_{m-1} lambda^{m-1} + ... + a_0.
    let a: Vec<f64> = coeffs[1..].iter().map(|c| c / coeffs[0]).collect();
    if m == 1 {
        return Ok(vec![-a[0]]);
    }
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        comp[(i, m - 1)] = -a[m - 1 - i];
    }
    let eigs = comp.complex_eigenvalues();
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let mut roots = Vec::with_capacity(m);
    for z in eigs.iter() {
        if z.im.abs() > 1e-8 * scale {
            return Err(Error::DegenerateMainTerm(format!(
                "companion matrix produced a complex pair {:.6e} +- {:.6e}i",
                z.re, z.im
            )));
        }
        roots.push(z.re);
    }
    roots.sort_by(|x, y| y.partial_cmp(x).expect("finite roots"));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn esp_of_123() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 2.0, 3.0]));
        let e = esp_all(&s).unwrap();
        assert_relative_eq!(e[0], 6.0, epsilon = 1e-13);
        assert_relative_eq!(e[1], 11.0, epsilon = 1e-13);
        assert_relative_eq!(e[2], 6.0, epsilon = 1e-13);
    }

    #[test]
    fn e1_is_trace() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, -3.0, 0.5, 0.0, 0.5, 7.0]);
        let e = esp_all(&s).unwrap();
        assert_relative_eq!(e[0], s.trace(), max_relative = 1e-12);
    }

    #[test]
    fn signlog_recurrence_matches_plain() {
        let vals = [3.0, -1.5, 0.25, 2.0];
        let plain = esp_from_values(&vals);
        let logged = esp_signlog(&vals.iter().map(|&v| SignLog::from_value(v)).collect::<Vec<_>>());
        for (p, l) in plain.iter().zip(logged.iter()) {
            assert_relative_eq!(*p, l.value(), max_relative = 1e-12);
        }
    }

    #[test]
    fn signlog_survives_extreme_range() {
        let vals: Vec<SignLog> = (0..5)
            .map(|i| SignLog { sign: 1, log_abs: -150.0 * (i as f64) * std::f64::consts::LN_10 })
            .collect();
        let e = esp_signlog(&vals);
        // e_5 = product = 10^-(150*(0+1+2+3+4)) = 10^-1500, far below f64.
        assert_eq!(e[4].sign, 1);
        assert_relative_eq!(e[4].log_abs, -1500.0 * std::f64::consts::LN_10, max_relative = 1e-12);
    }

    #[test]
    fn esp_general_agrees_with_symmetric_path() {
        let s = DMatrix::from_row_slice(4, 4, &[
            2.0, 1.0, 0.0, -0.5,
            1.0, -3.0, 0.5, 0.0,
            0.0, 0.5, 7.0, 0.25,
            -0.5, 0.0, 0.25, 1.0,
        ]);
        let via_eig = esp_all(&s).unwrap();
        let via_newton = esp_general(&s);
        for (a, b) in via_eig.iter().zip(via_newton.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn companion_roots_of_quadratic() {
        // 2 lambda^2 - 16 lambda + 30 has roots 5 and 3.
        let roots = real_poly_roots(&[2.0, -16.0, 30.0]).unwrap();
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0], 5.0, max_relative = 1e-12);
        assert_relative_eq!(roots[1], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn companion_rejects_complex_pair() {
        // lambda^2 + 1 = 0.
        assert!(matches!(
            real_poly_roots(&[1.0, 0.0, 1.0]),
            Err(Error::DegenerateMainTerm(_))
        ));
    }

    #[test]
    fn companion_linear_and_degenerate_input() {
        assert_eq!(real_poly_roots(&[2.0, -6.0]).unwrap(), vec![3.0]);
        assert!(real_poly_roots(&[0.0, 1.0]).is_err());
        assert!(real_poly_roots(&[]).is_err());
    }
}
