//! Lemma-level property suites runnable from the CLI: each structural
//! identity is exercised on seeded instances against an independent oracle.

use nalgebra::DMatrix;

use crate::flatlimit::{extract_main_terms, predict_eigenvalue_groups};
use crate::kernels::{wronskian_antidiag, wronskian_full, Kernel};
use crate::linalg::{esp_all, esp_perturb_leading, log_det, qr_full, saddle_det, sym_eig};
use crate::matrices::{distance_power, uniform_unit, vandermonde, PointSet};

use super::{verify, CheckResult, EpsGrid};

fn rand_sym(n: usize, state: &mut u64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = 2.0 * uniform_unit(state) - 1.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn rand_mat(rows: usize, cols: usize, state: &mut u64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| 2.0 * uniform_unit(state) - 1.0)
}

fn check(name: &str, threshold: f64, observed: f64, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.to_string(), passed, threshold, observed, detail }
}

fn bordered_det_direct(a: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let r = v.ncols();
    let mut m = DMatrix::<f64>::zeros(n + r, n + r);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, r)).copy_from(v);
    m.view_mut((n, 0), (r, n)).copy_from(&v.transpose());
    log_det(&m).expect("square by construction").value()
}

fn saddle_lemma_check() -> CheckResult {
    let mut state = 0xDEAD_0001u64;
    let mut worst: f64 = 0.0;
    for trial in 0..40usize {
        let n = 2 + trial % 7;
        let r = 1 + trial % (n - 1).min(4);
        let a = rand_sym(n, &mut state);
        let v = rand_mat(n, r, &mut state);
        let lemma = saddle_det(&a, &v).expect("full-rank random border");
        let direct = bordered_det_direct(&a, &v);
        worst = worst.max((lemma - direct).abs() / direct.abs().max(1e-30));
    }
    check(
        "saddle determinant lemma",
        1e-10,
        worst,
        worst <= 1e-10,
        "bordered [[A, V], [V', 0]] vs det(V'V) det(Qp' A Qp) on 40 seeded instances".into(),
    )
}

/// Coefficient of t^r in e_k(A + t V V') by polynomial interpolation:
/// sample at t = 0..=r and take the r-th finite difference over r!.
fn esp_coefficient_oracle(a: &DMatrix<f64>, v: &DMatrix<f64>, k: usize) -> f64 {
    let r = v.ncols();
    let samples: Vec<f64> = (0..=r)
        .map(|t| {
            let shifted = a + v * v.transpose() * t as f64;
            esp_all(&shifted).expect("symmetric")[k - 1]
        })
        .collect();
    let mut diff = samples;
    for _ in 0..r {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let r_fact: f64 = (1..=r).map(|i| i as f64).product();
    diff[0] / r_fact
}

fn esp_perturbation_check() -> CheckResult {
    let mut state = 0xDEAD_0002u64;
    let mut worst: f64 = 0.0;
    for trial in 0..25 {
        let n = 3 + trial % 6;
        let r = 1 + trial % 3.min(n - 1);
        let k = r + trial % (n - r + 1);
        let a = rand_sym(n, &mut state);
        let v = rand_mat(n, r, &mut state);
        let fast = esp_perturb_leading(&a, &v, k).expect("full-rank random border");
        let slow = esp_coefficient_oracle(&a, &v, k);
        worst = worst.max((fast - slow).abs() / slow.abs().max(1e-12));
    }
    check(
        "esp leading coefficient",
        1e-9,
        worst,
        worst <= 1e-9,
        "coefficient of t^r in e_k(A + tVV') vs interpolation oracle on 25 seeded instances"
            .into(),
    )
}

/// e_k as the sum of k x k principal minors, by direct enumeration.
fn esp_minor_oracle(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut sums = vec![0.0f64; n];
    for mask in 1u32..(1 << n) {
        let rows: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let k = rows.len();
        let minor = DMatrix::from_fn(k, k, |i, j| a[(rows[i], rows[j])]);
        sums[k - 1] += minor.determinant();
    }
    sums
}

fn esp_minors_check() -> CheckResult {
    let mut state = 0xDEAD_0003u64;
    let mut worst: f64 = 0.0;
    for trial in 0..12 {
        let n = 2 + trial % 5;
        let a = rand_sym(n, &mut state);
        let fast = esp_all(&a).expect("symmetric");
        let slow = esp_minor_oracle(&a);
        for (f, s) in fast.iter().zip(&slow) {
            worst = worst.max((f - s).abs() / s.abs().max(1e-12));
        }
    }
    check(
        "esp vs principal minors",
        1e-9,
        worst,
        worst <= 1e-9,
        "esp_all against brute-force principal-minor sums, n <= 6".into(),
    )
}

fn distance_identity_check() -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut seed = 5u64;
    // Each kernel contributes the antidiagonal degrees its smoothness
    // admits: 2l <= 2r - 2.
    let cases: Vec<(Kernel, Vec<usize>)> = vec![
        (Kernel::gaussian(), vec![0, 1, 2, 3]),
        (Kernel::matern2(), vec![0, 1]),
        (Kernel::matern3(), vec![0, 1, 2]),
    ];
    for d in 1..=3usize {
        let x = PointSet::random_uniform(8, d, 100 + seed).unwrap();
        seed += 1;
        for (kernel, ells) in &cases {
            for &ell in ells {
                let f = kernel.even_coeff(ell).unwrap();
                let lhs = distance_power(&x, 2 * ell) * f;
                let v = vandermonde(&x, 2 * ell).unwrap();
                let w = wronskian_antidiag(kernel, 2 * ell, d).unwrap();
                let rhs = &v.matrix * w.matrix * v.matrix.transpose();
                let err = (&lhs - &rhs).norm() / lhs.norm().max(1e-30);
                worst = worst.max(err);
            }
        }
    }
    check(
        "distance power identity",
        1e-10,
        worst,
        worst <= 1e-10,
        "f_2l D_(2l) = V W V' for d in 1..3 and every admissible l".into(),
    )
}

fn conditional_pd_check() -> CheckResult {
    let mut min_eig = f64::INFINITY;
    for r in 1..=3usize {
        for d in 1..=2usize {
            let x = PointSet::random_uniform(12, d, (10 * r + d) as u64).unwrap();
            let v = vandermonde(&x, r - 1).unwrap();
            let b = qr_full(&v.matrix).unwrap().q_perp();
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let m = (b.transpose() * distance_power(&x, 2 * r - 1) * &b) * sign;
            let eig = sym_eig(&(&m + m.transpose()).scale(0.5)).unwrap();
            min_eig = min_eig.min(*eig.values.last().unwrap());
        }
    }
    check(
        "conditional positive definiteness",
        0.0,
        min_eig,
        min_eig > 0.0,
        "(-1)^r B' D_(2r-1) B has positive spectrum for r in 1..3, d in 1..2".into(),
    )
}

fn antidiag_embedding_check() -> CheckResult {
    let kernel = Kernel::gaussian();
    let mut worst: f64 = 0.0;
    for d in 1..=3usize {
        for s in [0usize, 2, 4] {
            let full = wronskian_full(&kernel, s, d).unwrap();
            let anti = wronskian_antidiag(&kernel, s, d).unwrap();
            let set = crate::multiindex::MultiIndexSet::new(s, d).unwrap();
            for i in 0..set.len() {
                for j in 0..set.len() {
                    let want = if (set[i].degree() + set[j].degree()) as usize == s {
                        full.matrix[(i, j)]
                    } else {
                        0.0
                    };
                    worst = worst.max((anti.matrix[(i, j)] - want).abs());
                }
            }
        }
    }
    check(
        "antidiagonal block embedding",
        0.0,
        worst,
        worst == 0.0,
        "antidiagonal Wronskian equals the degree-s antidiagonal of the full one, exactly".into(),
    )
}

fn main_term_extraction_check() -> CheckResult {
    let a = extract_main_terms(&[6.0, 11.0, 6.0], &[1, 1, 1]);
    let b = extract_main_terms(&[2.0, 16.0, 30.0], &[1, 2]);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    match a {
        Ok(terms) => {
            let flat: Vec<f64> = terms.into_iter().flatten().collect();
            for (got, want) in flat.iter().zip(&[6.0, 11.0 / 6.0, 6.0 / 11.0]) {
                worst = worst.max((got - want).abs() / want.abs());
            }
        }
        Err(_) => ok = false,
    }
    match b {
        Ok(terms) => {
            let flat: Vec<f64> = terms.into_iter().flatten().collect();
            for (got, want) in flat.iter().zip(&[2.0, 5.0, 3.0]) {
                worst = worst.max((got - want).abs() / want.abs());
            }
        }
        Err(_) => ok = false,
    }
    check(
        "main term extraction",
        1e-12,
        worst,
        ok && worst <= 1e-12,
        "ratio and companion-root recovery of grouped main terms".into(),
    )
}

fn prediction_consistency_check() -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut all_present = true;
    let cases: Vec<(Kernel, PointSet)> = vec![
        (Kernel::gaussian(), PointSet::random_uniform(6, 2, 8).unwrap()),
        (Kernel::matern2(), PointSet::random_uniform(7, 1, 21).unwrap()),
    ];
    for (kernel, x) in cases {
        let p = predict_eigenvalue_groups(&kernel, &x).unwrap();
        if p.consistency.is_empty() {
            all_present = false;
        }
        for c in &p.consistency {
            match c.log_residual {
                Some(r) => worst = worst.max(r),
                None => all_present = false,
            }
        }
    }
    check(
        "prediction internal consistency",
        1e-8,
        worst,
        all_present && worst <= 1e-8,
        "cumulative main-term products vs determinant ratios, log space".into(),
    )
}

fn richardson_main_term_check() -> CheckResult {
    let x = PointSet::from_values(&[0.0, 1.0]).unwrap();
    let report = verify(&Kernel::exponential(), &x, &EpsGrid::default()).unwrap();
    let err = report.groups[1].main_term_rel_error[0].unwrap_or(f64::INFINITY);
    check(
        "extrapolated main term",
        1e-4,
        err,
        err <= 1e-4,
        "lambda_2 / eps of the exponential pair vs its predicted limit 1".into(),
    )
}

/// The lemma-level property suites behind the library, as named pass/fail
/// checks. Deterministic and fast enough for interactive use.
pub fn selftest() -> Vec<CheckResult> {
    vec![
        saddle_lemma_check(),
        esp_perturbation_check(),
        esp_minors_check(),
        distance_identity_check(),
        conditional_pd_check(),
        antidiag_embedding_check(),
        main_term_extraction_check(),
        prediction_consistency_check(),
        richardson_main_term_check(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let results = selftest();
        assert_eq!(results.len(), 9);
        for r in &results {
            assert!(r.passed, "{}: observed {:.3e} (threshold {:.3e}): {}",
                r.name, r.observed, r.threshold, r.detail);
        }
    }
}
