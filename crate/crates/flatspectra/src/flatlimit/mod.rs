//! Flat-limit predictions: what the spectrum of K_eps = f(eps ||x_i - x_j||)
//! does as eps -> 0, computed from the kernel's Taylor data and the point
//! geometry alone.
//!
//! The eigenvalues split into groups by order of eps. For an infinitely
//! smooth kernel the groups sit at eps^0, eps^2, ..., eps^{2k} with
//! multiplicities given by the monomial shell sizes; a kernel of smoothness
//! order r keeps the polynomial groups up to eps^{2(r-1)} and collects all
//! remaining eigenvalues at eps^{2r-1}. The determinant's leading power and
//! coefficient, the main term of every eigenvalue, and the limiting
//! eigenvector subspaces are all predicted in closed form.

mod predict;

pub use predict::{predict_determinant, predict_eigenvalue_groups, predict_eigenvectors};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SignLog;
use crate::multiindex::{card_h, card_p};

/// Which asymptotic regime the (kernel, point count) pair lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// All eigenvalues resolve at even powers of eps. `degree` is the
    /// minimal k with card_P(k, d) >= n.
    Smooth { degree: usize },
    /// The odd term f_{2r-1} cuts the expansion: polynomial groups up to
    /// degree r-1, then one group of order eps^{2r-1}.
    FiniteSmoothness { order: usize },
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Smooth { .. } => write!(f, "smooth"),
            Regime::FiniteSmoothness { order } => write!(f, "finite_smoothness({order})"),
        }
    }
}

/// How strongly a group's outputs are backed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupStatus {
    /// Main terms and subspaces are proved.
    Theorem,
    /// Per-vector limits rest on the unproven individual-eigenvector
    /// conjecture for multivariate groups.
    Conjecture,
    /// A hypothesis (Wronskian nonsingularity or Vandermonde rank) failed;
    /// main terms are withheld.
    Unavailable,
}

impl GroupStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupStatus::Theorem => "theorem",
            GroupStatus::Conjecture => "conjecture",
            GroupStatus::Unavailable => "unavailable",
        }
    }
}

/// One group of eigenvalues sharing the order eps^{order_exponent}.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub order_exponent: usize,
    pub multiplicity: usize,
    /// Main terms, sorted descending; empty when status is Unavailable.
    pub main_terms: Vec<f64>,
    /// Orthonormal basis of the limiting invariant subspace, n x multiplicity.
    pub basis: Option<DMatrix<f64>>,
    /// Individual limiting eigenvectors, aligned column-by-column with
    /// main_terms; withheld when main terms repeat within the group.
    pub per_vector: Option<DMatrix<f64>>,
    pub status: GroupStatus,
    /// Reason for an unavailable group, a withheld per_vector, or other
    /// caveats worth surfacing.
    pub note: Option<String>,
}

/// Outcome of one numerically verified hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Internal consistency residual: |log of the main-term product minus log
/// of the determinant-ratio prediction| for one group.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyCheck {
    pub group: usize,
    /// None when a sign mismatch or an exact zero makes the log residual
    /// meaningless; `note` then says why.
    pub log_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Complete spectral prediction for one (kernel, point set) pair.
#[derive(Debug, Clone)]
pub struct SpectralPrediction {
    pub regime: Regime,
    /// det K_eps = eps^det_exponent (k~ + O(eps)).
    pub det_exponent: u64,
    /// k~ as (sign, log|k~|).
    pub det_main: SignLog,
    pub groups: Vec<EigenGroup>,
    pub assumption_report: Vec<AssumptionCheck>,
    pub consistency: Vec<ConsistencyCheck>,
}

impl SpectralPrediction {
    pub fn n(&self) -> usize {
        self.groups.iter().map(|g| g.multiplicity).sum()
    }

    /// All main terms in eigenvalue order (largest group first), paired
    /// with their order exponents. Unavailable groups contribute nothing.
    pub fn flat_main_terms(&self) -> Vec<(usize, f64)> {
        self.groups
            .iter()
            .flat_map(|g| g.main_terms.iter().map(|&t| (g.order_exponent, t)))
            .collect()
    }

    /// Serialization used by the command-line tools: regime, determinant
    /// data, and per-group records.
    pub fn to_json_string(&self) -> Result<String> {
        #[derive(Serialize)]
        struct GroupJson<'a> {
            #[serde(rename = "L")]
            l: usize,
            multiplicity: usize,
            main_terms: &'a [f64],
            status: GroupStatus,
            #[serde(skip_serializing_if = "Option::is_none")]
            note: &'a Option<String>,
        }
        #[derive(Serialize)]
        struct PredictionJson<'a> {
            regime: String,
            det_exponent: u64,
            det_sign: i8,
            #[serde(skip_serializing_if = "Option::is_none")]
            det_log: Option<f64>,
            groups: Vec<GroupJson<'a>>,
            assumptions: &'a [AssumptionCheck],
            consistency: &'a [ConsistencyCheck],
        }
        let view = PredictionJson {
            regime: self.regime.to_string(),
            det_exponent: self.det_exponent,
            det_sign: self.det_main.sign,
            det_log: (self.det_main.sign != 0).then_some(self.det_main.log_abs),
            groups: self
                .groups
                .iter()
                .map(|g| GroupJson {
                    l: g.order_exponent,
                    multiplicity: g.multiplicity,
                    main_terms: &g.main_terms,
                    status: g.status,
                    note: &g.note,
                })
                .collect(),
            assumptions: &self.assumption_report,
            consistency: &self.consistency,
        };
        Ok(serde_json::to_string_pretty(&view)?)
    }
}

/// Group skeleton before any main terms are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GroupKind {
    /// Shell of monomials of this total degree.
    Polynomial(usize),
    /// Everything past the polynomial groups, order eps^{2r-1}.
    Final(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GroupSpec {
    pub exponent: usize,
    pub multiplicity: usize,
    pub kind: GroupKind,
}

/// Minimal k with card_P(k, d) >= n.
pub(crate) fn minimal_degree(n: usize, d: usize) -> Result<usize> {
    let mut k = 0;
    while card_p(k, d)? < n {
        k += 1;
    }
    Ok(k)
}

/// Decide the regime and the group layout for n points in dimension d.
pub(crate) fn layout(
    kernel: &crate::kernels::Kernel,
    n: usize,
    d: usize,
) -> Result<(Regime, Vec<GroupSpec>)> {
    use crate::kernels::Smoothness;
    let finite_order = match kernel.smoothness {
        Smoothness::Infinite => None,
        Smoothness::Finite(r) => (n > card_p(r - 1, d)?).then_some(r),
    };
    match finite_order {
        Some(r) => {
            let mut groups = Vec::with_capacity(r + 1);
            for s in 0..r {
                groups.push(GroupSpec {
                    exponent: 2 * s,
                    multiplicity: card_h(s, d)?,
                    kind: GroupKind::Polynomial(s),
                });
            }
            groups.push(GroupSpec {
                exponent: 2 * r - 1,
                multiplicity: n - card_p(r - 1, d)?,
                kind: GroupKind::Final(r),
            });
            Ok((Regime::FiniteSmoothness { order: r }, groups))
        }
        None => {
            let k = minimal_degree(n, d)?;
            let mut groups = Vec::with_capacity(k + 1);
            for s in 0..k {
                groups.push(GroupSpec {
                    exponent: 2 * s,
                    multiplicity: card_h(s, d)?,
                    kind: GroupKind::Polynomial(s),
                });
            }
            let filled = if k == 0 { 0 } else { card_p(k - 1, d)? };
            groups.push(GroupSpec {
                exponent: 2 * k,
                multiplicity: n - filled,
                kind: GroupKind::Polynomial(k),
            });
            Ok((Regime::Smooth { degree: k }, groups))
        }
    }
}

/// Main terms of individual eigenvalues from the main terms of the
/// elementary symmetric polynomials.
///
/// With eigenvalue orders grouped as `multiplicities` (summing to the
/// length of `esp_main`), a group of size 1 after s eigenvalues has main
/// term e~_{s+1}/e~_s, and a group of size m has main terms equal to the
/// roots of
///   q(t) = e~_s t^m - e~_{s+1} t^{m-1} + ... + (-1)^m e~_{s+m},
/// with e~_0 = 1. Both need e~_s != 0.
pub fn extract_main_terms(esp_main: &[f64], multiplicities: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n: usize = multiplicities.iter().sum();
    if n != esp_main.len() {
        return Err(Error::DimensionMismatch(format!(
            "multiplicities sum to {n}, but {} ESP main terms were given",
            esp_main.len()
        )));
    }
    if multiplicities.iter().any(|&m| m == 0) {
        return Err(Error::InvalidArgument("group multiplicities must be >= 1".into()));
    }
    let e = |i: usize| if i == 0 { 1.0 } else { esp_main[i - 1] };
    let mut out = Vec::with_capacity(multiplicities.len());
    let mut s = 0;
    for &m in multiplicities {
        if e(s) == 0.0 {
            return Err(Error::DegenerateMainTerm(format!(
                "ESP main term e~_{s} is zero; the group after it has no well-defined main terms"
            )));
        }
        if m == 1 {
            out.push(vec![e(s + 1) / e(s)]);
        } else {
            let coeffs: Vec<f64> = (0..=m)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * e(s + j)
                })
                .collect();
            let mut roots = crate::linalg::real_poly_roots(&coeffs)?;
            roots.sort_by(|a, b| b.partial_cmp(a).expect("roots are finite"));
            out.push(roots);
        }
        s += m;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use approx::assert_relative_eq;

    #[test]
    fn layout_smooth_ten_points_plane() {
        // card_P(3, 2) = 10 exactly: four groups of shell sizes 1, 2, 3, 4.
        let (regime, groups) = layout(&Kernel::gaussian(), 10, 2).unwrap();
        assert_eq!(regime, Regime::Smooth { degree: 3 });
        let mults: Vec<usize> = groups.iter().map(|g| g.multiplicity).collect();
        let exps: Vec<usize> = groups.iter().map(|g| g.exponent).collect();
        assert_eq!(mults, vec![1, 2, 3, 4]);
        assert_eq!(exps, vec![0, 2, 4, 6]);
    }

    #[test]
    fn layout_truncates_last_smooth_group() {
        let (regime, groups) = layout(&Kernel::gaussian(), 5, 2).unwrap();
        assert_eq!(regime, Regime::Smooth { degree: 2 });
        let mults: Vec<usize> = groups.iter().map(|g| g.multiplicity).collect();
        assert_eq!(mults, vec![1, 2, 2]);
    }

    #[test]
    fn layout_finite_smoothness() {
        let (regime, groups) = layout(&Kernel::matern2(), 6, 1).unwrap();
        assert_eq!(regime, Regime::FiniteSmoothness { order: 2 });
        let spec: Vec<(usize, usize)> =
            groups.iter().map(|g| (g.exponent, g.multiplicity)).collect();
        assert_eq!(spec, vec![(0, 1), (2, 1), (3, 4)]);
    }

    #[test]
    fn layout_finite_kernel_with_few_points_is_smooth() {
        // n <= card_P(r-1, d): every eigenvalue resolves before the odd
        // term matters.
        let (regime, groups) = layout(&Kernel::matern3(), 3, 1).unwrap();
        assert_eq!(regime, Regime::Smooth { degree: 2 });
        assert_eq!(groups.len(), 3);
    }

    #[test]
    fn layout_single_point() {
        for kernel in [Kernel::gaussian(), Kernel::exponential()] {
            let (regime, groups) = layout(&kernel, 1, 3).unwrap();
            assert_eq!(regime, Regime::Smooth { degree: 0 });
            assert_eq!(groups.len(), 1);
            assert_eq!(groups[0].multiplicity, 1);
            assert_eq!(groups[0].exponent, 0);
        }
    }

    #[test]
    fn extract_separated_ratios() {
        let out = extract_main_terms(&[6.0, 11.0, 6.0], &[1, 1, 1]).unwrap();
        assert_eq!(out[0], vec![6.0]);
        assert_relative_eq!(out[1][0], 11.0 / 6.0);
        // The product of main terms telescopes back to e~_3 = 6, which
        // forces the third ratio to be e~_3/e~_2.
        assert_relative_eq!(out[2][0], 6.0 / 11.0);
    }

    #[test]
    fn extract_grouped_roots() {
        // lambda = (2; 3 eps, 5 eps): e~ = (2, 2*3 + 2*5, 2*15).
        let out = extract_main_terms(&[2.0, 16.0, 30.0], &[1, 2]).unwrap();
        assert_eq!(out[0], vec![2.0]);
        assert_relative_eq!(out[1][0], 5.0, max_relative = 1e-12);
        assert_relative_eq!(out[1][1], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn extract_single_group() {
        let out = extract_main_terms(&[7.0], &[1]).unwrap();
        assert_eq!(out, vec![vec![7.0]]);
    }

    #[test]
    fn extract_rejects_zero_division() {
        let err = extract_main_terms(&[0.0, 1.0], &[1, 1]).unwrap_err();
        assert!(matches!(err, Error::DegenerateMainTerm(_)));
        assert!(extract_main_terms(&[1.0, 2.0], &[1, 1, 1]).is_err());
    }

    #[test]
    fn regime_display() {
        assert_eq!(Regime::Smooth { degree: 3 }.to_string(), "smooth");
        assert_eq!(
            Regime::FiniteSmoothness { order: 2 }.to_string(),
            "finite_smoothness(2)"
        );
    }
}
