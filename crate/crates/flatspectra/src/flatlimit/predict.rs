//! Determinant, eigenvalue-group, and eigenvector predictions.

use nalgebra::DMatrix;

use super::{
    layout, AssumptionCheck, ConsistencyCheck, EigenGroup, GroupKind, GroupSpec, GroupStatus,
    Regime, SpectralPrediction,
};
use crate::error::{Error, Result};
use crate::kernels::{wronskian_full, Kernel};
use crate::linalg::{log_det, qr_full, sym_eig, FullQR, SignLog};
use crate::matrices::{distance_power, is_unisolvent, vandermonde, PointSet, VandermondeMatrix};
use crate::multiindex::{card_p, degree_weight};

/// A Wronskian or projected matrix counts as nonsingular when its smallest
/// eigenvalue magnitude exceeds this fraction of the largest.
const HYPOTHESIS_TOL: f64 = 1e-10;
/// Main terms closer than this (relative to the group's largest magnitude)
/// are treated as repeated, which blocks per-vector prediction.
const REPEAT_GAP_TOL: f64 = 1e-9;

/// Leading power and coefficient of det K_eps as eps -> 0:
/// det K_eps = eps^L (k~ + O(eps)), returned as (L, (sign, log|k~|)).
pub fn predict_determinant(kernel: &Kernel, x: &PointSet) -> Result<(u64, SignLog)> {
    let ws = Workspace::build(kernel, x)?;
    ws.determinant(kernel, x)
}

/// Group structure with main terms; bases and per-vector data left empty.
pub fn predict_eigenvalue_groups(kernel: &Kernel, x: &PointSet) -> Result<SpectralPrediction> {
    predict(kernel, x, false)
}

/// Full prediction including limiting subspace bases and, where theory or
/// conjecture pins them down, individual limiting eigenvectors.
pub fn predict_eigenvectors(kernel: &Kernel, x: &PointSet) -> Result<SpectralPrediction> {
    predict(kernel, x, true)
}

/// Shared precomputation: layout, Vandermonde and Wronskian data through
/// the highest degree any formula touches, and hypothesis verdicts.
struct Workspace {
    regime: Regime,
    specs: Vec<GroupSpec>,
    /// Highest Wronskian degree used: k for smooth, r-1 for finite.
    smax: usize,
    vfull: VandermondeMatrix,
    wfull: DMatrix<f64>,
    /// Per degree s: is W_{<=s} numerically nonsingular, with detail.
    w_ok: Vec<(bool, String)>,
    /// Per degree s: is V_{<=s} numerically full rank, with detail.
    v_ok: Vec<(bool, String)>,
}

impl Workspace {
    fn build(kernel: &Kernel, x: &PointSet) -> Result<Workspace> {
        let (n, d) = (x.len(), x.dim());
        let (regime, specs) = layout(kernel, n, d)?;
        let smax = match regime {
            Regime::Smooth { degree } => degree,
            Regime::FiniteSmoothness { order } => order - 1,
        };
        let vfull = vandermonde(x, smax)?;
        let wfull = wronskian_full(kernel, smax, d)?.matrix;
        let mut w_ok = Vec::with_capacity(smax + 1);
        let mut v_ok = Vec::with_capacity(smax + 1);
        for s in 0..=smax {
            let m = card_p(s, d)?;
            let block = wfull.view((0, 0), (m, m)).into_owned();
            let eig = sym_eig(&block)?;
            let hi = eig.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let lo = eig.values.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
            let ok = hi > 0.0 && lo > HYPOTHESIS_TOL * hi;
            w_ok.push((ok, format!("min|eig|/max|eig| = {:.3e}", if hi > 0.0 { lo / hi } else { 0.0 })));

            let u = is_unisolvent(x, s)?;
            v_ok.push((u.unisolvent, format!("rank {} of {}", u.rank, u.required)));
        }
        Ok(Workspace { regime, specs, smax, vfull, wfull, w_ok, v_ok })
    }

    fn w_leading(&self, s: usize, d: usize) -> Result<DMatrix<f64>> {
        let m = card_p(s, d)?;
        Ok(self.wfull.view((0, 0), (m, m)).into_owned())
    }

    /// QR of the tallest Vandermonde block the theorems partition: V_{<=k-1}
    /// for smooth degree k >= 1, V_{<=r-1} for finite smoothness. None only
    /// for a single point (degree 0, nothing to factor).
    fn polynomial_qr(&self) -> Result<Option<FullQR>> {
        let poly = match self.regime {
            Regime::Smooth { degree: 0 } => return Ok(None),
            Regime::Smooth { degree } => degree - 1,
            Regime::FiniteSmoothness { order } => order - 1,
        };
        Ok(Some(qr_full(&self.vfull.leading(poly))?))
    }

    fn assumption_report(&self) -> Vec<AssumptionCheck> {
        let mut out = Vec::with_capacity(2 * (self.smax + 1));
        for s in 0..=self.smax {
            out.push(AssumptionCheck {
                name: format!("det W_{{<={s}}} != 0"),
                passed: self.w_ok[s].0,
                detail: self.w_ok[s].1.clone(),
            });
            out.push(AssumptionCheck {
                name: format!("V_{{<={s}}} full rank"),
                passed: self.v_ok[s].0,
                detail: self.v_ok[s].1.clone(),
            });
        }
        out
    }

    fn determinant(&self, kernel: &Kernel, x: &PointSet) -> Result<(u64, SignLog)> {
        let (n, d) = (x.len(), x.dim());
        match self.regime {
            Regime::Smooth { degree: 0 } => Ok((0, SignLog::from_value(kernel.f0()))),
            Regime::Smooth { degree: k } => {
                if !self.v_ok[k - 1].0 {
                    return Err(Error::DegenerateGeometry(format!(
                        "V_{{<={}}} is rank deficient ({})",
                        k - 1,
                        self.v_ok[k - 1].1
                    )));
                }
                let np = card_p(k, d)?;
                let m = degree_weight(k, d)?;
                let w_k = self.w_leading(k, d)?;
                if n == np {
                    let exponent = m.checked_mul(2).ok_or_else(exponent_overflow)?;
                    let dv = log_det(&self.vfull.matrix)?;
                    let main = dv * dv * log_det(&w_k)?;
                    Ok((exponent, main))
                } else {
                    let ell = (np - n) as u64;
                    let exponent = m
                        .checked_sub((k as u64).checked_mul(ell).ok_or_else(exponent_overflow)?)
                        .and_then(|v| v.checked_mul(2))
                        .ok_or_else(exponent_overflow)?;
                    let qr = self
                        .polynomial_qr()?
                        .expect("degree k >= 1 has a polynomial QR");
                    let projected = qr.q_perp().transpose() * self.vfull.block(k);
                    let p1 = card_p(k - 1, d)?;
                    let hk = np - p1;
                    // Y W Y^T with Y = blkdiag(I, Q_perp^T V_k), assembled
                    // blockwise: [[W11, W12 B^T], [B W21, B W22 B^T]].
                    let w11 = w_k.view((0, 0), (p1, p1)).into_owned();
                    let w12 = w_k.view((0, p1), (p1, hk)).into_owned();
                    let w22 = w_k.view((p1, p1), (hk, hk)).into_owned();
                    let top_right = &w12 * projected.transpose();
                    let mut ywy = DMatrix::zeros(n, n);
                    ywy.view_mut((0, 0), (p1, p1)).copy_from(&w11);
                    ywy.view_mut((0, p1), (p1, n - p1)).copy_from(&top_right);
                    ywy.view_mut((p1, 0), (n - p1, p1)).copy_from(&top_right.transpose());
                    ywy.view_mut((p1, p1), (n - p1, n - p1))
                        .copy_from(&(&projected * w22 * projected.transpose()));
                    let main = log_det(&ywy)? * qr.det_gram_log();
                    Ok((exponent, main))
                }
            }
            Regime::FiniteSmoothness { order: r } => {
                if !self.v_ok[r - 1].0 {
                    return Err(Error::DegenerateGeometry(format!(
                        "V_{{<={}}} is rank deficient ({})",
                        r - 1,
                        self.v_ok[r - 1].1
                    )));
                }
                let np = card_p(r - 1, d)?;
                let n_extra = (n - np) as u64;
                let exponent = degree_weight(r - 1, d)?
                    .checked_mul(2)
                    .and_then(|v| v.checked_add((2 * r as u64 - 1).checked_mul(n_extra)?))
                    .ok_or_else(exponent_overflow)?;
                let f_odd = kernel
                    .odd_leading
                    .ok_or_else(|| Error::InvalidArgument("finite smoothness needs f_{2r-1}".into()))?;
                let qr = self.polynomial_qr()?.expect("finite order r >= 1 has a QR");
                let q_perp = qr.q_perp();
                let dmat = distance_power(x, 2 * r - 1);
                let projected = (q_perp.transpose() * dmat * q_perp) * f_odd;
                let main = log_det(&self.w_leading(r - 1, d)?)?
                    * qr.det_gram_log()
                    * log_det(&projected)?;
                Ok((exponent, main))
            }
        }
    }
}

fn exponent_overflow() -> Error {
    Error::Overflow("determinant exponent exceeds u64".into())
}

/// Schur complement of the leading `split` block: for W = [[A, B], [B^T, D]],
/// returns D - B^T A^{-1} B. None when A fails to invert.
fn schur_trailing(w: &DMatrix<f64>, split: usize) -> Option<DMatrix<f64>> {
    let m = w.nrows() - split;
    let d_block = w.view((split, split), (m, m)).into_owned();
    if split == 0 {
        return Some(d_block);
    }
    let a = w.view((0, 0), (split, split)).into_owned();
    let b = w.view((0, split), (split, m)).into_owned();
    let solved = a.lu().solve(&b)?;
    Some(d_block - b.transpose() * solved)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// True when some consecutive pair of (descending) main terms is closer
/// than the repeat tolerance, making individual eigenvectors ambiguous.
fn has_repeats(values: &[f64]) -> bool {
    let scale = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if scale == 0.0 {
        return values.len() > 1;
    }
    values.windows(2).any(|w| (w[0] - w[1]).abs() < REPEAT_GAP_TOL * scale)
}

fn predict(kernel: &Kernel, x: &PointSet, want_vectors: bool) -> Result<SpectralPrediction> {
    let (n, d) = (x.len(), x.dim());
    let ws = Workspace::build(kernel, x)?;
    let (det_exponent, det_main) = ws.determinant(kernel, x)?;
    let qr = ws.polynomial_qr()?;

    let last_poly = match ws.regime {
        Regime::Smooth { degree } => degree,
        Regime::FiniteSmoothness { order } => order - 1,
    };

    let mut groups = Vec::with_capacity(ws.specs.len());
    for spec in &ws.specs {
        let group = match spec.kind {
            GroupKind::Polynomial(0) => {
                let basis = want_vectors.then(|| match &qr {
                    Some(qr) => qr.q_cols(0, 1),
                    None => DMatrix::identity(n, 1),
                });
                EigenGroup {
                    order_exponent: spec.exponent,
                    multiplicity: spec.multiplicity,
                    main_terms: vec![n as f64 * kernel.f0()],
                    per_vector: basis.clone(),
                    basis,
                    status: GroupStatus::Theorem,
                    note: None,
                }
            }
            GroupKind::Polynomial(s) => {
                polynomial_group(&ws, qr.as_ref(), spec, s, d, last_poly, want_vectors)?
            }
            GroupKind::Final(r) => {
                final_group(kernel, x, &ws, qr.as_ref(), spec, r, want_vectors)?
            }
        };
        groups.push(group);
    }

    let consistency = consistency_checks(&ws, &groups, det_main, last_poly, d)?;
    Ok(SpectralPrediction {
        regime: ws.regime,
        det_exponent,
        det_main,
        groups,
        assumption_report: ws.assumption_report(),
        consistency,
    })
}

/// Main terms and vectors for the degree-s polynomial group, s >= 1:
/// eigenvalues of Q_s^T V_s W~ V_s^T Q_s with W~ the Schur complement of
/// W_{<=s-1} inside W_{<=s}.
fn polynomial_group(
    ws: &Workspace,
    qr: Option<&FullQR>,
    spec: &GroupSpec,
    s: usize,
    d: usize,
    last_poly: usize,
    want_vectors: bool,
) -> Result<EigenGroup> {
    let qr = qr.expect("degree >= 1 group implies a polynomial QR");
    let main_ok = ws.w_ok[s - 1].0 && ws.v_ok[s - 1].0;
    // The subspace theorem for group s < last reads one degree higher than
    // the main-term theorem; the last group's subspace needs only s - 1.
    let is_last_smooth = matches!(ws.regime, Regime::Smooth { .. }) && s == last_poly;
    let basis_ok = if is_last_smooth {
        ws.w_ok[s - 1].0 && ws.v_ok[s - 1].0
    } else {
        ws.w_ok[s].0 && ws.v_ok[s].0
    };
    let conjecture_ok = s <= ws.smax && ws.w_ok[s].0 && ws.v_ok[s].0;

    if !main_ok {
        let reason = format!(
            "hypotheses for the degree-{s} group failed: det W_{{<={}}} ({}), V_{{<={}}} ({})",
            s - 1,
            ws.w_ok[s - 1].1,
            s - 1,
            ws.v_ok[s - 1].1
        );
        let basis = (want_vectors && basis_ok)
            .then(|| qr.q_cols(card_p(s - 1, d).expect("checked"), spec.multiplicity));
        return Ok(EigenGroup {
            order_exponent: spec.exponent,
            multiplicity: spec.multiplicity,
            main_terms: Vec::new(),
            basis,
            per_vector: None,
            status: GroupStatus::Unavailable,
            note: Some(reason),
        });
    }

    let p_prev = card_p(s - 1, d)?;
    let w_s = ws.w_leading(s, d)?;
    let Some(wtilde) = schur_trailing(&w_s, p_prev) else {
        return Ok(EigenGroup {
            order_exponent: spec.exponent,
            multiplicity: spec.multiplicity,
            main_terms: Vec::new(),
            basis: None,
            per_vector: None,
            status: GroupStatus::Unavailable,
            note: Some(format!("W_{{<={}}} could not be inverted for the Schur complement", s - 1)),
        });
    };
    let q_s = qr.q_cols(p_prev, spec.multiplicity);
    let v_s = ws.vfull.block(s);
    let projected = q_s.transpose() * &v_s;
    let g = symmetrize(&projected * wtilde * projected.transpose());
    let eig = sym_eig(&g)?;
    let main_terms = eig.values.clone();

    let mut status = GroupStatus::Theorem;
    let mut note: Option<String> = None;
    let mut basis = None;
    let mut per_vector = None;
    if want_vectors {
        if basis_ok {
            basis = Some(q_s.clone());
        } else {
            note = Some(format!(
                "subspace withheld: needs det W_{{<={s}}} != 0 and V_{{<={s}}} full rank"
            ));
        }
        if basis.is_some() {
            if d == 1 {
                per_vector = basis.clone();
            } else if has_repeats(&main_terms) {
                note = Some(format!(
                    "per-vector limits withheld: repeated main terms in the degree-{s} group"
                ));
            } else if conjecture_ok {
                per_vector = Some(&q_s * &eig.vectors);
                status = GroupStatus::Conjecture;
                note = Some(
                    "individual eigenvectors rest on the multivariate per-vector conjecture"
                        .to_string(),
                );
            }
        }
    }
    Ok(EigenGroup {
        order_exponent: spec.exponent,
        multiplicity: spec.multiplicity,
        main_terms,
        basis,
        per_vector,
        status,
        note,
    })
}

/// The eps^{2r-1} group of a finitely smooth kernel: eigenvalues of
/// f_{2r-1} Q_perp^T D_{(2r-1)} Q_perp, eigenvectors Q_perp U.
fn final_group(
    kernel: &Kernel,
    x: &PointSet,
    ws: &Workspace,
    qr: Option<&FullQR>,
    spec: &GroupSpec,
    r: usize,
    want_vectors: bool,
) -> Result<EigenGroup> {
    let qr = qr.expect("finite smoothness implies a polynomial QR");
    if !(ws.w_ok[r - 1].0 && ws.v_ok[r - 1].0) {
        return Ok(EigenGroup {
            order_exponent: spec.exponent,
            multiplicity: spec.multiplicity,
            main_terms: Vec::new(),
            basis: None,
            per_vector: None,
            status: GroupStatus::Unavailable,
            note: Some(format!(
                "hypotheses for the final group failed: det W_{{<={}}} ({}), V_{{<={}}} ({})",
                r - 1,
                ws.w_ok[r - 1].1,
                r - 1,
                ws.v_ok[r - 1].1
            )),
        });
    }
    let f_odd = kernel
        .odd_leading
        .ok_or_else(|| Error::InvalidArgument("finite smoothness needs f_{2r-1}".into()))?;
    let q_perp = qr.q_perp();
    let dmat = distance_power(x, 2 * r - 1);
    let g = symmetrize((q_perp.transpose() * dmat * &q_perp) * f_odd);
    let eig = sym_eig(&g)?;
    let main_terms = eig.values.clone();

    let mut note = None;
    let mut basis = None;
    let mut per_vector = None;
    if want_vectors {
        basis = Some(q_perp.clone());
        let hi = main_terms.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let lo = main_terms.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
        if !(hi > 0.0 && lo > HYPOTHESIS_TOL * hi) {
            note = Some(
                "per-vector limits withheld: projected distance matrix is numerically singular"
                    .to_string(),
            );
        } else if has_repeats(&main_terms) {
            note = Some(
                "per-vector limits withheld: repeated main terms in the final group".to_string(),
            );
        } else {
            per_vector = Some(&q_perp * &eig.vectors);
        }
    }
    Ok(EigenGroup {
        order_exponent: spec.exponent,
        multiplicity: spec.multiplicity,
        main_terms,
        basis,
        per_vector,
        status: GroupStatus::Theorem,
        note,
    })
}

/// Cumulative main-term products checked against the determinant-ratio
/// predictions: through polynomial group s (s strictly below the truncated
/// smooth group), the product of all main terms so far must equal
/// det(V_{<=s}^T V_{<=s}) det(W_{<=s}); the product over every group must
/// equal the determinant main term.
fn consistency_checks(
    ws: &Workspace,
    groups: &[EigenGroup],
    det_main: SignLog,
    last_poly: usize,
    d: usize,
) -> Result<Vec<ConsistencyCheck>> {
    let mut out = Vec::new();
    let mut product = SignLog::ONE;
    let mut all_available = true;
    for (idx, (spec, group)) in ws.specs.iter().zip(groups).enumerate() {
        if group.status == GroupStatus::Unavailable {
            all_available = false;
            break;
        }
        for &t in &group.main_terms {
            product = product * SignLog::from_value(t);
        }
        let prefix_applies = match spec.kind {
            GroupKind::Polynomial(s) => {
                s >= 1
                    && (s < last_poly || matches!(ws.regime, Regime::FiniteSmoothness { .. }))
                    && ws.w_ok[s].0
                    && ws.v_ok[s].0
            }
            GroupKind::Final(_) => false,
        };
        if prefix_applies {
            let GroupKind::Polynomial(s) = spec.kind else { unreachable!() };
            let gram = qr_full(&ws.vfull.leading(s))?.det_gram_log();
            let expected = gram * log_det(&ws.w_leading(s, d)?)?;
            out.push(residual(idx, product, expected, "cumulative main terms vs det(V'V) det(W)"));
        }
    }
    if all_available {
        out.push(residual(
            groups.len() - 1,
            product,
            det_main,
            "product of all main terms vs determinant main term",
        ));
    }
    Ok(out)
}

fn residual(group: usize, lhs: SignLog, rhs: SignLog, label: &str) -> ConsistencyCheck {
    if lhs.is_zero() || rhs.is_zero() {
        return ConsistencyCheck {
            group,
            log_residual: None,
            note: Some(format!("{label}: a side is exactly zero")),
        };
    }
    if lhs.sign != rhs.sign {
        return ConsistencyCheck {
            group,
            log_residual: None,
            note: Some(format!("{label}: sign mismatch")),
        };
    }
    ConsistencyCheck {
        group,
        log_residual: Some((lhs.log_abs - rhs.log_abs).abs()),
        note: Some(label.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Smoothness;
    use crate::linalg::{cholesky, largest_principal_angle};
    use approx::assert_relative_eq;

    fn line(values: &[f64]) -> PointSet {
        PointSet::from_values(values).unwrap()
    }

    #[test]
    fn determinant_exponential_two_points() {
        let (exp, main) = predict_determinant(&Kernel::exponential(), &line(&[0.0, 1.0])).unwrap();
        assert_eq!(exp, 1);
        assert_eq!(main.sign, 1);
        assert_relative_eq!(main.log_abs, 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn determinant_gaussian_two_points() {
        let (exp, main) = predict_determinant(&Kernel::gaussian(), &line(&[0.0, 1.0])).unwrap();
        assert_eq!(exp, 2);
        assert_eq!(main.sign, 1);
        assert_relative_eq!(main.log_abs, 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn determinant_single_point() {
        for kernel in [Kernel::gaussian(), Kernel::exponential(), Kernel::matern2()] {
            let (exp, main) = predict_determinant(&kernel, &line(&[0.3])).unwrap();
            assert_eq!(exp, 0);
            assert_relative_eq!(main.value(), 1.0);
        }
    }

    #[test]
    fn determinant_exponents_by_regime() {
        // Smooth on a line: eps^{n(n-1)}.
        let x = line(&[0.0, 0.3, 0.55, 0.81, 1.0]);
        let (exp, _) = predict_determinant(&Kernel::gaussian(), &x).unwrap();
        assert_eq!(exp, 20);
        // Finite smoothness r on a line: eps^{n(2r-1) - r^2}.
        let (exp, _) = predict_determinant(&Kernel::matern2(), &x).unwrap();
        assert_eq!(exp, 11);
        let (exp, _) = predict_determinant(&Kernel::exponential(), &x).unwrap();
        assert_eq!(exp, 4);
    }

    #[test]
    fn determinant_rejects_degenerate_geometry() {
        let x = PointSet::new(2, vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]])
            .unwrap();
        // Collinear points: V_{<=1} is rank deficient and k = 2 needs it.
        let err = predict_determinant(&Kernel::gaussian(), &x).unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry(_)));
    }

    #[test]
    fn groups_gaussian_two_points() {
        let p = predict_eigenvalue_groups(&Kernel::gaussian(), &line(&[0.0, 1.0])).unwrap();
        assert!(matches!(p.regime, Regime::Smooth { degree: 1 }));
        assert_eq!(p.det_exponent, 2);
        let spec: Vec<(usize, usize)> =
            p.groups.iter().map(|g| (g.order_exponent, g.multiplicity)).collect();
        assert_eq!(spec, vec![(0, 1), (2, 1)]);
        assert_relative_eq!(p.groups[0].main_terms[0], 2.0);
        assert_relative_eq!(p.groups[1].main_terms[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn groups_exponential_two_points() {
        let p = predict_eigenvalue_groups(&Kernel::exponential(), &line(&[0.0, 1.0])).unwrap();
        assert!(matches!(p.regime, Regime::FiniteSmoothness { order: 1 }));
        let spec: Vec<(usize, usize)> =
            p.groups.iter().map(|g| (g.order_exponent, g.multiplicity)).collect();
        assert_eq!(spec, vec![(0, 1), (1, 1)]);
        assert_relative_eq!(p.groups[0].main_terms[0], 2.0);
        assert_relative_eq!(p.groups[1].main_terms[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ten_seeded_points_in_square_match_shell_structure() {
        let x = PointSet::random_uniform(10, 2, 31).unwrap();
        let p = predict_eigenvalue_groups(&Kernel::gaussian(), &x).unwrap();
        let mults: Vec<usize> = p.groups.iter().map(|g| g.multiplicity).collect();
        let exps: Vec<usize> = p.groups.iter().map(|g| g.order_exponent).collect();
        assert_eq!(mults, vec![1, 2, 3, 4]);
        assert_eq!(exps, vec![0, 2, 4, 6]);
        assert_relative_eq!(p.groups[0].main_terms[0], 10.0);
    }

    #[test]
    fn main_term_products_are_consistent() {
        // Smooth square, smooth truncated, and finite-smoothness cases.
        let cases: Vec<(Kernel, PointSet)> = vec![
            (Kernel::gaussian(), line(&[0.0, 0.21, 0.47, 0.62, 0.88, 1.0])),
            (Kernel::gaussian(), PointSet::random_uniform(5, 2, 17).unwrap()),
            (Kernel::matern2(), line(&[0.0, 0.21, 0.47, 0.62, 0.88, 1.0])),
            (Kernel::matern3(), PointSet::random_uniform(7, 2, 23).unwrap()),
            (Kernel::exponential(), PointSet::random_uniform(6, 3, 9).unwrap()),
        ];
        for (kernel, x) in cases {
            let p = predict_eigenvalue_groups(&kernel, &x).unwrap();
            assert!(!p.consistency.is_empty());
            for c in &p.consistency {
                let r = c.log_residual.unwrap_or_else(|| {
                    panic!("consistency check {c:?} lost its residual")
                });
                assert!(r <= 1e-8, "group {}: residual {r:.3e}", c.group);
            }
            // Exponent bookkeeping: det exponent is the multiplicity-weighted
            // sum of group orders.
            let total: u64 = p
                .groups
                .iter()
                .map(|g| (g.order_exponent * g.multiplicity) as u64)
                .sum();
            assert_eq!(p.det_exponent, total);
        }
    }

    #[test]
    fn final_group_terms_positive_for_builtin_kernels() {
        for d in 1..=2 {
            let x = PointSet::random_uniform(9, d, 41).unwrap();
            for kernel in [Kernel::exponential(), Kernel::matern2(), Kernel::matern3()] {
                let p = predict_eigenvalue_groups(&kernel, &x).unwrap();
                let last = p.groups.last().unwrap();
                assert!(!last.main_terms.is_empty());
                for &t in &last.main_terms {
                    assert!(t > 0.0, "d = {d}, term {t}");
                }
            }
        }
    }

    #[test]
    fn one_dimensional_ratio_shortcut() {
        // In one dimension the group matrix is 1x1 and equals the squared
        // last diagonals of the Vandermonde R factor and the Wronskian
        // Cholesky factor.
        let x = line(&[0.05, 0.31, 0.46, 0.72, 0.94]);
        let kernel = Kernel::gaussian();
        let p = predict_eigenvalue_groups(&kernel, &x).unwrap();
        for s in 1..=4usize {
            let v = vandermonde(&x, s).unwrap();
            let r = qr_full(&v.leading(s)).unwrap();
            let w = wronskian_full(&kernel, s, 1).unwrap();
            let c = cholesky(&w.matrix).unwrap();
            let want = r.r[(s, s)].powi(2) * c[(s, s)].powi(2);
            assert_relative_eq!(p.groups[s].main_terms[0], want, max_relative = 1e-10);
        }
    }

    #[test]
    fn vectors_gaussian_two_points() {
        let p = predict_eigenvectors(&Kernel::gaussian(), &line(&[0.0, 1.0])).unwrap();
        let v0 = p.groups[0].per_vector.as_ref().unwrap();
        let v1 = p.groups[1].per_vector.as_ref().unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_relative_eq!(v0.column(0).into_owned(), nalgebra::dvector![s, s], epsilon = 1e-14);
        assert_relative_eq!(
            v1.column(0).map(|x| x.abs()),
            nalgebra::dvector![s, s],
            epsilon = 1e-14
        );
        assert!(v1[(0, 0)] * v1[(1, 0)] < 0.0);
        assert_eq!(p.groups[0].status, GroupStatus::Theorem);
    }

    #[test]
    fn vectors_exponential_projected_distance() {
        // The final-group vectors match the eigenvectors of the doubly
        // projected distance matrix P D_(1) P, P = I - 11'/n.
        let x = line(&[0.04, 0.33, 0.58, 0.79, 0.92]);
        let n = 5;
        let p = predict_eigenvectors(&Kernel::exponential(), &x).unwrap();
        let g0 = &p.groups[0];
        let ones = DMatrix::from_element(n, 1, 1.0 / (n as f64).sqrt());
        assert_relative_eq!(g0.basis.as_ref().unwrap(), &ones, epsilon = 1e-12);

        let proj = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
        let pdp = symmetrize(&proj * distance_power(&x, 1) * &proj);
        let eig = sym_eig(&pdp).unwrap();
        let vectors = p.groups[1].per_vector.as_ref().unwrap();
        let terms = &p.groups[1].main_terms;
        // P D P has the n-r nonzero eigenvalues f_1 * lambda with f_1 = -1,
        // so its ascending tail aligns with the predicted descending terms.
        for j in 0..vectors.ncols() {
            let predicted = vectors.column(j);
            let direct = eig.vectors.column(n - 1 - j);
            let align = predicted.dot(&direct).abs();
            assert_relative_eq!(align, 1.0, epsilon = 1e-10);
            assert_relative_eq!(-eig.values[n - 1 - j], terms[j], max_relative = 1e-10);
        }
    }

    #[test]
    fn vectors_discrete_orthogonal_polynomials() {
        // Smooth 1d: all limiting eigenvectors are the Q columns of the
        // Vandermonde QR, and every per-vector status is theorem.
        let x = PointSet::random_uniform(10, 1, 77).unwrap();
        let p = predict_eigenvectors(&Kernel::gaussian(), &x).unwrap();
        let v = vandermonde(&x, 9).unwrap();
        let q = qr_full(&v.matrix).unwrap();
        for (s, g) in p.groups.iter().enumerate() {
            assert_eq!(g.status, GroupStatus::Theorem);
            let pv = g.per_vector.as_ref().unwrap();
            let align = pv.column(0).dot(&q.q.column(s)).abs();
            assert_relative_eq!(align, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn bases_orthonormal_and_mutually_orthogonal() {
        let x = PointSet::random_uniform(8, 2, 13).unwrap();
        for kernel in [Kernel::gaussian(), Kernel::matern2()] {
            let p = predict_eigenvectors(&kernel, &x).unwrap();
            let bases: Vec<&DMatrix<f64>> =
                p.groups.iter().filter_map(|g| g.basis.as_ref()).collect();
            assert_eq!(bases.len(), p.groups.len());
            for (i, a) in bases.iter().enumerate() {
                let gram = a.transpose() * *a;
                assert_relative_eq!(gram, DMatrix::identity(a.ncols(), a.ncols()), epsilon = 1e-12);
                for b in &bases[i + 1..] {
                    assert!((a.transpose() * *b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conjecture_flag_only_in_higher_dimension() {
        let x2 = PointSet::random_uniform(6, 2, 3).unwrap();
        let p2 = predict_eigenvectors(&Kernel::gaussian(), &x2).unwrap();
        assert!(p2.groups.iter().any(|g| g.status == GroupStatus::Conjecture));
        let x1 = PointSet::random_uniform(6, 1, 3).unwrap();
        let p1 = predict_eigenvectors(&Kernel::gaussian(), &x1).unwrap();
        assert!(p1.groups.iter().all(|g| g.status == GroupStatus::Theorem));
    }

    #[test]
    fn repeated_main_terms_withhold_per_vector() {
        // Square corners: the two degree-1 main terms coincide by symmetry.
        let x = PointSet::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let p = predict_eigenvectors(&Kernel::gaussian(), &x).unwrap();
        let g1 = &p.groups[1];
        assert_eq!(g1.multiplicity, 2);
        assert_relative_eq!(g1.main_terms[0], g1.main_terms[1], epsilon = 1e-12);
        assert!(g1.basis.is_some());
        assert!(g1.per_vector.is_none());
        assert!(g1.note.as_ref().unwrap().contains("repeated"));
    }

    #[test]
    fn exactly_singular_wronskian_downgrades_group() {
        // f_2 = 0 makes W_{<=1} singular: the degree-2 group loses its
        // main terms while lower groups survive.
        let kernel =
            Kernel::radial_taylor(vec![1.0, 0.0, 1.0], None, Some(Smoothness::Infinite)).unwrap();
        let x = line(&[0.1, 0.4, 0.9]);
        let p = predict_eigenvalue_groups(&kernel, &x).unwrap();
        assert_eq!(p.groups[0].status, GroupStatus::Theorem);
        assert_eq!(p.groups[2].status, GroupStatus::Unavailable);
        assert!(p.groups[2].main_terms.is_empty());
        assert!(p.assumption_report.iter().any(|c| !c.passed));
    }

    #[test]
    fn affine_invariance_on_a_line() {
        let base = [0.12, 0.29, 0.55, 0.71, 0.9];
        let shifted: Vec<f64> = base.iter().map(|v| v + 3.7).collect();
        let pa = predict_eigenvectors(&Kernel::gaussian(), &line(&base)).unwrap();
        let pb = predict_eigenvectors(&Kernel::gaussian(), &line(&shifted)).unwrap();
        for (ga, gb) in pa.groups.iter().zip(&pb.groups) {
            assert_eq!(ga.order_exponent, gb.order_exponent);
            assert_eq!(ga.multiplicity, gb.multiplicity);
        }
        // Cumulative bases span the degree-s polynomials on either set.
        let vb = vandermonde(&line(&shifted), 4).unwrap();
        let qb = qr_full(&vb.matrix).unwrap();
        let mut qa_cols: Vec<DMatrix<f64>> = Vec::new();
        for g in &pa.groups {
            qa_cols.push(g.basis.clone().unwrap());
        }
        for s in 0..=4usize {
            let width: usize = (0..=s).map(|i| qa_cols[i].ncols()).sum();
            let mut stacked = DMatrix::zeros(5, width);
            let mut at = 0;
            for q in &qa_cols[..=s] {
                stacked.view_mut((0, at), (5, q.ncols())).copy_from(q);
                at += q.ncols();
            }
            // The cosine-based angle bottoms out near sqrt(machine eps).
            let angle = largest_principal_angle(&stacked, &qb.q_cols(0, width)).unwrap();
            assert!(angle <= 1e-7, "s = {s}, angle {angle:.3e}");
        }
    }

    #[test]
    fn single_point_prediction() {
        let p = predict_eigenvectors(&Kernel::matern2(), &line(&[0.4])).unwrap();
        assert_eq!(p.groups.len(), 1);
        assert_eq!(p.groups[0].main_terms, vec![1.0]);
        assert_eq!(p.det_exponent, 0);
        assert_eq!(p.groups[0].basis.as_ref().unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn json_serialization_shape() {
        let p = predict_eigenvalue_groups(&Kernel::gaussian(), &line(&[0.0, 1.0])).unwrap();
        let text = p.to_json_string().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["regime"], "smooth");
        assert_eq!(v["det_exponent"], 2);
        assert_eq!(v["det_sign"], 1);
        assert!(v["det_log"].is_number());
        assert_eq!(v["groups"][0]["L"], 0);
        assert_eq!(v["groups"][0]["multiplicity"], 1);
        assert_eq!(v["groups"][0]["status"], "theorem");
        assert!(v["groups"][1]["main_terms"][0].is_number());
        assert!(v["assumptions"].as_array().is_some());
    }

    #[test]
    fn determinant_matches_main_term_product_in_log_space() {
        let x = PointSet::random_uniform(6, 2, 57).unwrap();
        for kernel in [Kernel::gaussian(), Kernel::matern2()] {
            let p = predict_eigenvalue_groups(&kernel, &x).unwrap();
            let mut product = SignLog::ONE;
            for g in &p.groups {
                for &t in &g.main_terms {
                    product = product * SignLog::from_value(t);
                }
            }
            assert_eq!(product.sign, p.det_main.sign);
            assert_relative_eq!(product.log_abs, p.det_main.log_abs, epsilon = 1e-8);
        }
    }
}
