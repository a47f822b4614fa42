//! Full Householder QR with a deterministic sign convention, plus a
//! column-pivoted variant used only for numerical rank.

use nalgebra::{DMatrix, DVector};

use super::SignLog;
use crate::error::{Error, Result};

/// Full QR factorization M = Q R of an n x m matrix, m <= n.
///
/// Q is n x n orthogonal, R is n x m upper triangular with non-negative
/// diagonal (the sign convention makes factorizations byte-reproducible).
/// The leading m columns of Q span the column space of M when M has full
/// column rank; the trailing n - m columns span its orthogonal complement.
#[derive(Debug, Clone)]
pub struct FullQR {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Numerical rank of the input, from a column-pivoted factorization.
    pub rank: usize,
}

impl FullQR {
    /// First m columns of Q.
    pub fn q_thin(&self) -> DMatrix<f64> {
        self.q.columns(0, self.r.ncols()).into_owned()
    }

    /// Last n - m columns of Q: an orthonormal basis of the complement of
    /// the column span (for full-rank input).
    pub fn q_perp(&self) -> DMatrix<f64> {
        let m = self.r.ncols();
        self.q.columns(m, self.q.ncols() - m).into_owned()
    }

    /// A contiguous slice of Q's columns.
    pub fn q_cols(&self, start: usize, count: usize) -> DMatrix<f64> {
        self.q.columns(start, count).into_owned()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.r.ncols()
    }

    /// det(M^T M) = product of squared R diagonal entries, in sign/log form.
    pub fn det_gram_log(&self) -> SignLog {
        let m = self.r.ncols();
        let mut log = 0.0;
        for i in 0..m {
            let d = self.r[(i, i)];
            if d == 0.0 {
                return SignLog::ZERO;
            }
            log += 2.0 * d.ln();
        }
        SignLog { sign: 1, log_abs: log }
    }
}

/// Householder QR of an n x m matrix with m <= n. Deterministic: identical
/// input bytes give identical output bytes. Rank deficiency is allowed and
/// reported through [`FullQR::rank`].
pub fn qr_full(m: &DMatrix<f64>) -> Result<FullQR> {
    let n = m.nrows();
    let cols = m.ncols();
    if cols > n {
        return Err(Error::InvalidArgument(format!(
            "qr_full needs at least as many rows as columns, got {n}x{cols}"
        )));
    }
    let mut r = m.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    for j in 0..cols {
        householder_step(&mut r, &mut q, j, cols);
    }
    for j in 0..cols {
        for i in (j + 1)..n {
            r[(i, j)] = 0.0;
        }
    }
    // Sign convention: non-negative R diagonal. Flipping row j of R and
    // column j of Q preserves M = Q R.
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            for c in j..cols {
                r[(j, c)] = -r[(j, c)];
            }
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let rank = numerical_rank(m);
    Ok(FullQR { q, r, rank })
}

/// One Householder reflection clearing column j below the diagonal,
/// applied to R (columns j..cols) and accumulated into Q.
fn householder_step(r: &mut DMatrix<f64>, q: &mut DMatrix<f64>, j: usize, cols: usize) {
    let n = r.nrows();
    let tail = n - j;
    let mut v = DVector::<f64>::zeros(tail);
    for i in 0..tail {
        v[i] = r[(j + i, j)];
    }
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    let alpha = if v[0] >= 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let vnorm2 = v.norm_squared();
    if vnorm2 == 0.0 {
        return;
    }
    for c in j..cols {
        let mut w = 0.0;
        for i in 0..tail {
            w += v[i] * r[(j + i, c)];
        }
        let f = 2.0 * w / vnorm2;
        for i in 0..tail {
            r[(j + i, c)] -= f * v[i];
        }
    }
    // Q is empty when the caller only needs R (rank probing).
    for row in 0..q.nrows() {
        let mut w = 0.0;
        for i in 0..tail {
            w += q[(row, j + i)] * v[i];
        }
        let f = 2.0 * w / vnorm2;
        for i in 0..tail {
            q[(row, j + i)] -= f * v[i];
        }
    }
}

/// Numerical rank from column-pivoted Householder QR. A diagonal entry
/// counts toward the rank while it exceeds tau = max(n, m) * machine epsilon
/// * |R_11|, with |R_11| (the largest column norm after pivoting) standing
/// in for the largest singular value.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let n = m.nrows();
    let cols = m.ncols();
    let kmax = n.min(cols);
    if kmax == 0 {
        return 0;
    }
    let mut a = m.clone();
    let mut diag = Vec::with_capacity(kmax);
    for j in 0..kmax {
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..cols {
            let mut s = 0.0;
            for i in j..n {
                s += a[(i, c)] * a[(i, c)];
            }
            if s > best_norm {
                best_norm = s;
                best = c;
            }
        }
        if best != j {
            a.swap_columns(j, best);
        }
        householder_step(&mut a, &mut DMatrix::identity(0, 0), j, cols);
        diag.push(a[(j, j)].abs());
    }
    let sigma_max = diag[0];
    if sigma_max == 0.0 {
        return 0;
    }
    let tau = n.max(cols) as f64 * f64::EPSILON * sigma_max;
    diag.iter().take_while(|&&x| x > tau).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seeded_matrix(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        // Small deterministic fill; quality is irrelevant here.
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        DMatrix::from_fn(n, m, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    #[test]
    fn hand_qr_2x2() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let qr = qr_full(&m).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(qr.q, DMatrix::from_row_slice(2, 2, &[s, -s, s, s]), epsilon = 1e-14);
        assert!(qr.r[(0, 0)] > 0.0 && qr.r[(1, 1)] > 0.0);
        assert_relative_eq!(&qr.q * &qr.r, m, epsilon = 1e-14);
    }

    #[test]
    fn identity_is_fixed_point() {
        let m = DMatrix::<f64>::identity(4, 4);
        let qr = qr_full(&m).unwrap();
        assert_relative_eq!(qr.q, m, epsilon = 1e-15);
        assert_relative_eq!(qr.r, m, epsilon = 1e-15);
    }

    #[test]
    fn ones_column_gives_centering_complement() {
        let m = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 1.0]);
        let qr = qr_full(&m).unwrap();
        let s = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(qr.q_thin(), DMatrix::from_row_slice(3, 1, &[s, s, s]), epsilon = 1e-14);
        // The perp block spans the mean-zero plane: 1^T Q_perp = 0.
        let perp = qr.q_perp();
        for c in 0..2 {
            let col_sum: f64 = (0..3).map(|i| perp[(i, c)]).sum();
            assert!(col_sum.abs() < 1e-13);
        }
    }

    #[test]
    fn orthogonality_reconstruction_and_perp() {
        for seed in 0..8 {
            let m = seeded_matrix(7, 4, seed);
            let qr = qr_full(&m).unwrap();
            let qtq = qr.q.transpose() * &qr.q;
            assert_relative_eq!(qtq, DMatrix::identity(7, 7), epsilon = 1e-12);
            assert_relative_eq!(&qr.q * &qr.r, m, max_relative = 1e-12);
            for i in 0..4 {
                assert!(qr.r[(i, i)] >= 0.0);
            }
            let resid = qr.q_perp().transpose() * &m;
            assert!(resid.amax() < 1e-12);
            assert!(qr.is_full_rank());
        }
    }

    #[test]
    fn determinism_same_bytes() {
        let m = seeded_matrix(6, 3, 42);
        let a = qr_full(&m).unwrap();
        let b = qr_full(&m).unwrap();
        assert_eq!(a.q.as_slice(), b.q.as_slice());
        assert_eq!(a.r.as_slice(), b.r.as_slice());
    }

    #[test]
    fn rank_detects_exact_deficiency() {
        let mut m = seeded_matrix(6, 4, 7);
        let dup = m.column(1).into_owned();
        m.set_column(3, &dup);
        assert_eq!(numerical_rank(&m), 3);
        let qr = qr_full(&m).unwrap();
        assert!(!qr.is_full_rank());
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(5, 3)), 0);
        assert_eq!(numerical_rank(&DMatrix::<f64>::identity(5, 3)), 3);
    }

    #[test]
    fn det_gram_matches_direct() {
        let m = seeded_matrix(5, 3, 3);
        let qr = qr_full(&m).unwrap();
        let gram = m.transpose() * &m;
        let direct = super::super::log_det(&gram).unwrap();
        let viaqr = qr.det_gram_log();
        assert_eq!(direct.sign, viaqr.sign);
        assert_relative_eq!(direct.log_abs, viaqr.log_abs, epsilon = 1e-10);
    }

    #[test]
    fn wide_input_rejected() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(qr_full(&m).is_err());
    }
}
