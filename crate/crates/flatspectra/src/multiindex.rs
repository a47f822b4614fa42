//! Multi-indices and their graded enumeration.
//!
//! A multi-index is a tuple of non-negative integer exponents. The sets used
//! throughout the crate are the full degree balls P_k (all indices of total
//! degree at most k) and the degree shells H_k (total degree exactly k).
//! Everything downstream (Vandermonde blocks, Wronskian rows, eigenvalue
//! group sizes) keys off one fixed enumeration order, so it lives here and
//! nowhere else:
//!
//! indices are listed by increasing total degree, and within each degree by
//! reflected lexicographic order (compare reversed tuples lexicographically).
//! In two variables that starts (0,0), (1,0), (0,1), (2,0), (1,1), (0,2). For
//! degree one in d variables the order is e_1, e_2, ..., e_d.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// A single exponent tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        MultiIndex { exps }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Total degree |alpha|.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    /// x^alpha with the convention 0^0 = 1.
    pub fn monomial_eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.exps.len());
        self.exps
            .iter()
            .zip(x)
            .map(|(&e, &xi)| if e == 0 { 1.0 } else { xi.powi(e as i32) })
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of dimension `dim` and total degree at most `max_degree`,
/// in the crate-wide graded reflected lexicographic order.
#[derive(Debug, Clone)]
pub struct MultiIndexSet {
    dim: usize,
    max_degree: usize,
    indices: Arc<Vec<MultiIndex>>,
}

impl MultiIndexSet {
    /// Enumerates P_{max_degree} in dimension `dim`. Results are cached per
    /// (degree, dimension) pair behind a lock, so repeated calls are cheap.
    pub fn new(max_degree: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        // Guard against enumerations that cannot fit in memory anyway.
        let n = card_p(max_degree, dim)?;
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<MultiIndex>>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let indices = {
            let mut guard = cache.lock().expect("multi-index cache poisoned");
            guard
                .entry((max_degree, dim))
                .or_insert_with(|| {
                    let mut out = Vec::with_capacity(n);
                    for s in 0..=max_degree {
                        shell_reflected_lex(s, dim, &mut out);
                    }
                    Arc::new(out)
                })
                .clone()
        };
        Ok(MultiIndexSet { dim, max_degree, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Start offset of the degree-s block, i.e. #P_{s-1}.
    pub fn block_offset(&self, s: usize) -> usize {
        if s == 0 {
            0
        } else {
            card_p(s - 1, self.dim).expect("offset within an enumerated set cannot overflow")
        }
    }

    /// The indices of total degree exactly s, as a slice of the enumeration.
    pub fn shell(&self, s: usize) -> &[MultiIndex] {
        let lo = self.block_offset(s);
        let hi = self.block_offset(s + 1).min(self.len());
        &self.indices()[lo..hi]
    }

    /// Sum of |alpha| over the set. Equals d * C(k + d, d + 1).
    pub fn degree_weight(&self) -> u64 {
        self.indices.iter().map(|a| a.degree() as u64).sum()
    }
}

impl std::ops::Index<usize> for MultiIndexSet {
    type Output = MultiIndex;
    fn index(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }
}

/// Appends H_s in dimension `dim` to `out`, reflected lexicographically:
/// the last coordinate varies slowest, ascending, and the leading block is
/// enumerated recursively.
fn shell_reflected_lex(s: usize, dim: usize, out: &mut Vec<MultiIndex>) {
    fn rec(s: u32, dim: usize, suffix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if dim == 1 {
            let mut exps = vec![s];
            exps.extend(suffix.iter().rev());
            out.push(MultiIndex::new(exps));
            return;
        }
        for last in 0..=s {
            suffix.push(last);
            rec(s - last, dim - 1, suffix, out);
            suffix.pop();
        }
    }
    rec(s as u32, dim, &mut Vec::new(), out);
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// #P_k = C(k + d, d), the number of multi-indices of degree at most k in
/// d variables. Errors when the count does not fit the platform word.
pub fn card_p(k: usize, d: usize) -> Result<usize> {
    let c = binomial_u128((k + d) as u128, d as u128)
        .ok_or_else(|| Error::Overflow(format!("C({}, {})", k + d, d)))?;
    usize::try_from(c).map_err(|_| Error::Overflow(format!("#P_{k} in dimension {d}")))
}

/// #H_k = C(k + d - 1, d - 1), the number of multi-indices of degree
/// exactly k in d variables.
pub fn card_h(k: usize, d: usize) -> Result<usize> {
    let c = binomial_u128((k + d - 1) as u128, (d - 1) as u128)
        .ok_or_else(|| Error::Overflow(format!("C({}, {})", k + d - 1, d - 1)))?;
    usize::try_from(c).map_err(|_| Error::Overflow(format!("#H_{k} in dimension {d}")))
}

/// M(k, d) = sum of |alpha| over P_k = d * C(k + d, d + 1). This is the
/// degree count that drives determinant exponents.
pub fn degree_weight(k: usize, d: usize) -> Result<u64> {
    let c = binomial_u128((k + d) as u128, (d + 1) as u128)
        .ok_or_else(|| Error::Overflow(format!("C({}, {})", k + d, d + 1)))?;
    let m = (d as u128)
        .checked_mul(c)
        .ok_or_else(|| Error::Overflow(format!("M({k}, {d})")))?;
    u64::try_from(m).map_err(|_| Error::Overflow(format!("M({k}, {d})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(k: usize, d: usize) -> MultiIndexSet {
        MultiIndexSet::new(k, d).unwrap()
    }

    fn exps(s: &MultiIndexSet) -> Vec<Vec<u32>> {
        s.iter().map(|a| a.exps().to_vec()).collect()
    }

    #[test]
    fn order_k2_d2() {
        assert_eq!(
            exps(&set(2, 2)),
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn order_k0_d3() {
        assert_eq!(exps(&set(0, 3)), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn order_k3_d1() {
        assert_eq!(exps(&set(3, 1)), vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn degree_one_block_is_unit_vectors_in_order() {
        for d in 1..=6 {
            let s = set(1, d);
            let shell = s.shell(1);
            assert_eq!(shell.len(), d);
            for (i, a) in shell.iter().enumerate() {
                let mut want = vec![0u32; d];
                want[i] = 1;
                assert_eq!(a.exps(), &want[..], "d={d} position {i}");
            }
        }
    }

    #[test]
    fn cardinalities_match_enumeration_up_to_12() {
        for d in 1..=4 {
            for k in 0..=12 {
                let s = set(k, d);
                assert_eq!(s.len(), card_p(k, d).unwrap(), "P count k={k} d={d}");
                for deg in 0..=k {
                    assert_eq!(
                        s.shell(deg).len(),
                        card_h(deg, d).unwrap(),
                        "H count deg={deg} d={d}"
                    );
                }
            }
        }
        // Spot values.
        assert_eq!(card_p(2, 2).unwrap(), 6);
        assert_eq!(card_p(3, 2).unwrap(), 10);
        assert_eq!(card_h(2, 2).unwrap(), 3);
        assert_eq!(card_h(3, 3).unwrap(), 10);
    }

    #[test]
    fn cardinality_overflow_is_reported() {
        assert!(matches!(card_p(usize::MAX / 2, 64), Err(Error::Overflow(_))));
    }

    #[test]
    fn prefix_property() {
        // The enumeration for degree k starts with the enumeration for k-1.
        for d in 1..=3 {
            let big = set(8, d);
            for k in 0..8 {
                let small = set(k, d);
                assert_eq!(
                    &exps(&big)[..small.len()],
                    &exps(&small)[..],
                    "prefix k={k} d={d}"
                );
            }
        }
    }

    #[test]
    fn gradedness_and_block_offsets() {
        for d in 1..=4 {
            let s = set(7, d);
            let mut prev = 0;
            for a in s.iter() {
                assert!(a.degree() >= prev, "degrees must be non-decreasing");
                prev = a.degree();
            }
            for deg in 0..=7 {
                for a in s.shell(deg) {
                    assert_eq!(a.degree() as usize, deg);
                }
                let want = if deg == 0 { 0 } else { card_p(deg - 1, d).unwrap() };
                assert_eq!(s.block_offset(deg), want);
            }
        }
    }

    #[test]
    fn degree_weight_examples() {
        // Frozen from the sum-over-enumeration oracle below.
        assert_eq!(degree_weight(2, 1).unwrap(), 3); // 0 + 1 + 2
        assert_eq!(degree_weight(0, 3).unwrap(), 0);
        assert_eq!(degree_weight(2, 2).unwrap(), 8); // 0 + 1 + 1 + 2 + 2 + 2
    }

    #[test]
    fn degree_weight_matches_enumeration_oracle() {
        for d in 1..=4 {
            for k in 0..=12 {
                let s = set(k, d);
                assert_eq!(s.degree_weight(), degree_weight(k, d).unwrap(), "k={k} d={d}");
            }
        }
    }

    #[test]
    fn monomial_eval_examples() {
        let a = MultiIndex::new(vec![1, 2]);
        assert_eq!(a.monomial_eval(&[2.0, 3.0]), 18.0);
        let zero = MultiIndex::new(vec![0, 0]);
        assert_eq!(zero.monomial_eval(&[0.0, 0.0]), 1.0);
        let b = MultiIndex::new(vec![1, 0]);
        assert_eq!(b.monomial_eval(&[-2.0, 5.0]), -2.0);
    }
}
