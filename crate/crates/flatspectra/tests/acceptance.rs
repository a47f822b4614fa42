//! End-to-end acceptance checks.
//!
//! Each test pins one advertised guarantee of the crate, prints a single
//! PASS/FAIL line with the observed worst-case metric, and asserts the
//! pinned tolerance. Every instance is seeded, so failures reproduce
//! deterministically. The whole suite is sized to run in seconds.

use flatspectra::flatlimit::{predict_determinant, predict_eigenvalue_groups, predict_eigenvectors};
use flatspectra::harness::{empirical_spectrum, verify, EpsGrid};
use flatspectra::kernels::{wronskian_antidiag, Kernel};
use flatspectra::linalg::{esp_all, esp_perturb_leading, qr_full, saddle_det, sym_eig};
use flatspectra::matrices::{distance_power, kernel_matrix, vandermonde, PointSet};
use flatspectra::nalgebra::DMatrix;

/// Deterministic matrix with entries in (-1, 1).
fn rand_mat(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let x = PointSet::random_uniform(rows, cols, seed).expect("random points");
    DMatrix::from_fn(rows, cols, |i, j| 2.0 * x.point(i)[j] - 1.0)
}

fn rand_sym(n: usize, seed: u64) -> DMatrix<f64> {
    let m = rand_mat(n, n, seed);
    (&m + m.transpose()) * 0.5
}

fn report(number: usize, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    println!("acceptance {number}: {verdict} - {detail}");
    assert!(passed, "acceptance {number} failed: {detail}");
}

/// Criterion 1: the bordered saddle determinant shortcut agrees with the
/// direct (n+r) x (n+r) determinant on 200 seeded instances.
#[test]
fn saddle_determinant_matches_direct() {
    let mut worst = 0.0f64;
    for trial in 0..200u64 {
        let n = 2 + (trial as usize) % 9;
        let r = 1 + (trial as usize) % n.min(4);
        let a = rand_sym(n, 1_000 + trial);
        let v = rand_mat(n, r, 5_000 + trial);
        let shortcut = saddle_det(&a, &v).expect("saddle determinant");
        let mut m = DMatrix::<f64>::zeros(n + r, n + r);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((0, n), (n, r)).copy_from(&v);
        m.view_mut((n, 0), (r, n)).copy_from(&v.transpose());
        let direct = m.determinant();
        let rel = (shortcut - direct).abs() / direct.abs().max(1e-300);
        worst = worst.max(rel);
    }
    report(
        1,
        worst <= 1e-10,
        &format!("saddle determinant vs direct bordered determinant, 200 instances, max rel err {worst:.2e} (tol 1e-10)"),
    );
}

/// Leading coefficient of t^r in e_k(A + t V V^T) by polynomial
/// interpolation: e_k of a rank-r update is a degree-r polynomial in t,
/// so the r-th finite difference over t = 0..=r divided by r! is exact.
fn esp_leading_coeff_oracle(a: &DMatrix<f64>, v: &DMatrix<f64>, k: usize) -> f64 {
    let r = v.ncols();
    let vvt = v * v.transpose();
    let mut acc = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=r {
        let e = esp_all(&(a + &vvt * j as f64)).expect("esp of symmetric matrix");
        let sign = if (r - j) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * e[k - 1];
        binom = binom * (r - j) as f64 / (j + 1) as f64;
    }
    let mut rfact = 1.0;
    for i in 2..=r {
        rfact *= i as f64;
    }
    acc / rfact
}

/// Criterion 2: the closed-form leading ESP coefficient of a rank-r
/// perturbation agrees with the interpolation oracle on 100 instances.
#[test]
fn esp_perturbation_coefficient_matches_oracle() {
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let n = 2 + (trial as usize) % 7;
        let r = 1 + (trial as usize) % n.min(3);
        let k = r + (trial as usize) % (n - r + 1);
        let a = rand_sym(n, 300 + trial);
        let v = rand_mat(n, r, 900 + trial);
        let fast = esp_perturb_leading(&a, &v, k).expect("leading coefficient");
        let oracle = esp_leading_coeff_oracle(&a, &v, k);
        let rel = (fast - oracle).abs() / oracle.abs().max(1e-300);
        worst = worst.max(rel);
    }
    report(
        2,
        worst <= 1e-9,
        &format!("rank-r ESP leading coefficient vs interpolation oracle, 100 instances, max rel err {worst:.2e} (tol 1e-9)"),
    );
}

/// Criterion 3: elementary symmetric polynomials of the spectrum equal
/// sums of principal minors, enumerated by brute force.
#[test]
fn esp_matches_principal_minors() {
    let mut worst = 0.0f64;
    for n in 2..=8usize {
        let a = rand_sym(n, 40 + n as u64);
        let esp = esp_all(&a).expect("esp");
        let mut sums = vec![0.0f64; n + 1];
        for mask in 1u32..(1 << n) {
            let rows: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let sub = DMatrix::from_fn(rows.len(), rows.len(), |i, j| a[(rows[i], rows[j])]);
            sums[rows.len()] += sub.determinant();
        }
        for k in 1..=n {
            let rel = (esp[k - 1] - sums[k]).abs() / sums[k].abs().max(1.0);
            worst = worst.max(rel);
        }
    }
    report(
        3,
        worst <= 1e-9,
        &format!("esp_all vs principal-minor sums, n = 2..8, max rel err {worst:.2e} (tol 1e-9)"),
    );
}

/// Criterion 4: the even distance-power identity
/// f_{2l} * D_(2l) = V_{<=2l} W_antidiag(2l) V_{<=2l}^T.
#[test]
fn distance_power_identity() {
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for (kernel, lmax) in [
        (Kernel::gaussian(), 3usize),
        (Kernel::matern2(), 1),
        (Kernel::matern3(), 2),
    ] {
        for d in 1..=3usize {
            for l in 0..=lmax {
                let x = PointSet::random_uniform(7, d, 60 + (d * 4 + l) as u64).expect("points");
                let f2l = kernel.even_coeff(l).expect("even coefficient");
                let lhs = distance_power(&x, 2 * l) * f2l;
                let v = vandermonde(&x, 2 * l).expect("vandermonde").matrix;
                let w = wronskian_antidiag(&kernel, 2 * l, d).expect("wronskian").matrix;
                let rhs = &v * w * v.transpose();
                let rel = (&lhs - &rhs).norm() / rhs.norm();
                worst = worst.max(rel);
                cases += 1;
            }
        }
    }
    report(
        4,
        worst <= 1e-10,
        &format!("f_2l D_(2l) = V W V^T over {cases} (kernel, d, l) cases, max rel Frobenius err {worst:.2e} (tol 1e-10)"),
    );
}

/// Criterion 5: conditional positive definiteness of odd distance powers:
/// (-1)^r B^T D_(2r-1) B is positive definite on the complement of the
/// degree-(r-1) polynomial column space.
#[test]
fn odd_distance_powers_conditionally_definite() {
    let mut least = f64::INFINITY;
    for r in 1..=3usize {
        for d in 1..=2usize {
            for n in [8usize, 20] {
                let x = PointSet::random_uniform(n, d, (80 + r * 2 + d) as u64).expect("points");
                let v = vandermonde(&x, r - 1).expect("vandermonde").matrix;
                let b = qr_full(&v).expect("qr").q_perp();
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                let m = b.transpose() * distance_power(&x, 2 * r - 1) * &b * sign;
                let sym = (&m + m.transpose()) * 0.5;
                let eig = sym_eig(&sym).expect("eigenvalues");
                least = least.min(*eig.values.last().expect("nonempty"));
            }
        }
    }
    report(
        5,
        least > 0.0,
        &format!("(-1)^r B^T D_(2r-1) B positive definite for r = 1..3, d = 1..2, n up to 20, min eigenvalue {least:.3e} (must be > 0)"),
    );
}

/// Criterion 6: log |det K_eps| - L log eps - log |ktilde| falls to zero
/// linearly in eps, and its Richardson-extrapolated intercept vanishes.
#[test]
fn determinant_expansions() {
    let configs: [(&str, usize, usize); 11] = [
        ("gaussian", 1, 5),
        ("gaussian", 2, 6),
        ("gaussian", 2, 5),
        ("exponential", 1, 2),
        ("exponential", 1, 5),
        ("exponential", 1, 8),
        ("matern2", 1, 2),
        ("matern2", 1, 5),
        ("matern2", 1, 8),
        ("exponential", 2, 10),
        ("matern2", 2, 10),
    ];
    let mut worst = 0.0f64;
    let mut all_bounded = true;
    for (name, d, n) in configs {
        let kernel = Kernel::from_name(name).expect("kernel");
        let x = PointSet::random_uniform(n, d, 2).expect("points");
        let rep = verify(&kernel, &x, &EpsGrid::default()).expect("verification report");
        let intercept = rep.det_intercept.expect("extrapolated intercept").abs();
        worst = worst.max(intercept);
        match rep.checks.iter().find(|c| c.name == "determinant residual bound") {
            Some(bound) => all_bounded &= bound.passed,
            None => {
                // The whole spectrum is resolved only above the fit window;
                // gate the decay rate of the two deepest residuals instead.
                let m = rep.det_residuals.len();
                assert!(m >= 2, "too few determinant residuals for {name} d={d} n={n}");
                let (e1, r1) = rep.det_residuals[m - 1];
                let (e2, r2) = rep.det_residuals[m - 2];
                let slope = (r1.abs() / r2.abs()).ln() / (e1 / e2).ln();
                all_bounded &= slope >= 0.8;
            }
        }
    }
    report(
        6,
        worst <= 1e-3 && all_bounded,
        &format!("determinant residual bounded by C*eps on 11 configurations, max |extrapolated intercept| {worst:.2e} log units (tol 1e-3)"),
    );
}

fn slope_config(name: &str, d: usize, n: usize, seed: u64, expected: &[f64]) -> (f64, bool) {
    let kernel = Kernel::from_name(name).expect("kernel");
    let x = PointSet::random_uniform(n, d, seed).expect("points");
    let rep = verify(&kernel, &x, &EpsGrid::default()).expect("verification report");
    assert_eq!(
        rep.slopes.iter().map(|s| s.predicted).collect::<Vec<_>>(),
        expected,
        "predicted exponent layout for {name} d={d} n={n}"
    );
    let mut worst = 0.0f64;
    let mut all_fit = true;
    for s in &rep.slopes {
        match s.fitted {
            Some(f) => worst = worst.max((f - s.predicted).abs()),
            None => all_fit = false,
        }
    }
    (worst, all_fit)
}

/// Criterion 7: fitted log-log slopes match the predicted exponents to
/// within 0.05 on four kernel/geometry configurations.
#[test]
fn eigenvalue_order_slopes() {
    let mut worst = 0.0f64;
    let mut all_fit = true;
    let mut run = |name, d, n, seed, expected: &[f64]| {
        let (w, fit) = slope_config(name, d, n, seed, expected);
        worst = worst.max(w);
        all_fit &= fit;
    };
    run("gaussian", 1, 6, 11, &[0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    run("gaussian", 2, 10, 11, &[0.0, 2.0, 2.0, 4.0, 4.0, 4.0, 6.0, 6.0, 6.0, 6.0]);
    run("exponential", 1, 10, 3, &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    let matern3_expected: Vec<f64> =
        [0.0, 2.0, 2.0, 4.0, 4.0, 4.0].iter().copied().chain(std::iter::repeat(5.0).take(14)).collect();
    run("matern3", 2, 20, 5, &matern3_expected);
    report(
        7,
        worst <= 0.05 && all_fit,
        &format!("fitted eigenvalue slopes on 4 configurations (46 curves), max |fitted - predicted| {worst:.3} (tol 0.05)"),
    );
}

/// g(eps) = T + c1 eps^p + c2 eps^(p+q) + ...; eliminate both correction
/// terms from three samples.
fn extrapolate3(e: [f64; 3], g: [f64; 3], p: i32, q: i32) -> f64 {
    let pair = |i: usize, j: usize| -> (f64, f64) {
        let (ei, ej) = (e[i], e[j]);
        let u = (ej.powi(p) * g[i] - ei.powi(p) * g[j]) / (ej.powi(p) - ei.powi(p));
        let y = ei.powi(p) * ej.powi(p) * (ej.powi(q) - ei.powi(q)) / (ej.powi(p) - ei.powi(p));
        (u, y)
    };
    let (ua, ya) = pair(2, 1);
    let (ub, yb) = pair(1, 0);
    (yb * ua - ya * ub) / (yb - ya)
}

/// Criterion 8: Richardson-extrapolated lambda_i(eps) / eps^L matches the
/// predicted main terms. Each eigenvalue curve is extrapolated from the
/// three smallest scales at which it clears 1e4 * machEps * lambda_1;
/// curves that never collect three such scales sit below the double
/// precision noise floor and are excluded (and counted).
#[test]
fn eigenvalue_main_terms() {
    let configs: [(&str, usize, usize, u64, i32, usize); 4] = [
        ("gaussian", 1, 6, 11, 2, 1),
        ("gaussian", 2, 10, 11, 2, 0),
        ("exponential", 1, 10, 3, 1, 0),
        ("matern3", 2, 20, 5, 1, 0),
    ];
    let mut worst = 0.0f64;
    let mut gated = 0usize;
    let mut excluded = 0usize;
    let mut exclusions_expected = true;
    for (name, d, n, seed, p, allowed_below_floor) in configs {
        let kernel = Kernel::from_name(name).expect("kernel");
        let x = PointSet::random_uniform(n, d, seed).expect("points");
        let pred = predict_eigenvalue_groups(&kernel, &x).expect("prediction");
        let grid = EpsGrid::default();
        let emp = empirical_spectrum(&kernel, &x, &grid).expect("empirical spectra");
        let mut offset = 0usize;
        let mut below = 0usize;
        for group in &pred.groups {
            let l = group.order_exponent as i32;
            for j in 0..group.multiplicity {
                let i = offset + j;
                let usable: Vec<usize> = (0..grid.len())
                    .filter(|&t| emp[t].values[i] >= 1e4 * f64::EPSILON * emp[t].values[0])
                    .collect();
                if usable.len() < 3 {
                    below += 1;
                    continue;
                }
                let pick = [usable[usable.len() - 1], usable[usable.len() - 2], usable[usable.len() - 3]];
                let e = pick.map(|t| grid.values()[t]);
                let g = pick.map(|t| emp[t].values[i] / grid.values()[t].powi(l));
                let extr = extrapolate3(e, g, p, p);
                let rel = ((extr - group.main_terms[j]) / group.main_terms[j]).abs();
                worst = worst.max(rel);
                gated += 1;
            }
            offset += group.multiplicity;
        }
        excluded += below;
        exclusions_expected &= below == allowed_below_floor;
    }
    report(
        8,
        worst <= 1e-3 && exclusions_expected,
        &format!("extrapolated main terms on {gated} curves across 4 configurations, max rel err {worst:.2e} (tol 1e-3); {excluded} curve below the noise floor excluded"),
    );
}

fn spectrum_at(kernel: &Kernel, x: &PointSet, eps: f64) -> flatspectra::linalg::SymEig {
    let grid = EpsGrid::new(vec![eps]).expect("grid");
    empirical_spectrum(kernel, x, &grid).expect("spectrum").remove(0)
}

/// Criterion 9: limiting eigenvectors. (a) univariate smooth per-vector
/// alignment, (b) finite-smoothness final-group per-vector alignment,
/// (c) multivariate smooth subspace angles (gated) with the per-vector
/// conjecture alignments reported but not gated.
#[test]
fn limiting_eigenvectors() {
    // (a) first four eigenvectors, gaussian d=1 n=10 at eps = 1e-2.
    let gaussian = Kernel::gaussian();
    let x = PointSet::random_uniform(10, 1, 928).expect("points");
    let pred = predict_eigenvectors(&gaussian, &x).expect("prediction");
    let eig = spectrum_at(&gaussian, &x, 1e-2);
    let mut worst_a = 1.0f64;
    for s in 0..4 {
        let pv = pred.groups[s].per_vector.as_ref().expect("per-vector basis");
        worst_a = worst_a.min(eig.vectors.column(s).dot(&pv.column(0)).abs());
    }

    // (b) final-group per-vector alignment for the exponential kernel at
    // eps = 1e-3, d = 1 and d = 2.
    let exponential = Kernel::exponential();
    let mut worst_b = 1.0f64;
    for d in 1..=2usize {
        let x = PointSet::random_uniform(10, d, 3).expect("points");
        let pred = predict_eigenvectors(&exponential, &x).expect("prediction");
        let eig = spectrum_at(&exponential, &x, 1e-3);
        let last = pred.groups.last().expect("final group");
        let pv = last.per_vector.as_ref().expect("per-vector basis");
        let offset = pred.n() - last.multiplicity;
        for j in 0..last.multiplicity {
            worst_b = worst_b.min(eig.vectors.column(offset + j).dot(&pv.column(j)).abs());
        }
    }

    // (c) gaussian d=2 n=10 at eps = 1e-2: gate the subspace angles, report
    // the per-vector conjecture alignments.
    let x2 = PointSet::random_uniform(10, 2, 11).expect("points");
    let pred2 = predict_eigenvectors(&gaussian, &x2).expect("prediction");
    let eig2 = spectrum_at(&gaussian, &x2, 1e-2);
    let mut worst_angle = 0.0f64;
    let mut conj_lo = 1.0f64;
    let mut conj_hi = 0.0f64;
    let mut offset = 0usize;
    for group in &pred2.groups {
        let basis = group.basis.as_ref().expect("subspace basis");
        let block = eig2.vectors.columns(offset, group.multiplicity).into_owned();
        let angle = flatspectra::linalg::largest_principal_angle(&block, basis).expect("angle");
        worst_angle = worst_angle.max(angle);
        if let Some(pv) = &group.per_vector {
            for j in 0..group.multiplicity {
                let dot = eig2.vectors.column(offset + j).dot(&pv.column(j)).abs();
                conj_lo = conj_lo.min(dot);
                conj_hi = conj_hi.max(dot);
            }
        }
        offset += group.multiplicity;
    }

    report(
        9,
        worst_a >= 0.999 && worst_b >= 0.999 && worst_angle <= 1e-2,
        &format!("eigenvector limits: univariate alignment {worst_a:.6} (>= 0.999), final-group alignment {worst_b:.6} (>= 0.999), multivariate subspace angle {worst_angle:.2e} (<= 1e-2); ungated per-vector conjecture alignments span {conj_lo:.3}..{conj_hi:.3}"),
    );
}

/// Criterion 10: the two-point exponential determinant. The general main
/// term gives det K_eps = 2 eps + O(eps^2); the direct determinant
/// 1 - exp(-2 eps) confirms it. A naive specialization of the closed-form
/// two-point determinant suggests -4 for the same coefficient; that value
/// contradicts the direct computation and stays an open question.
#[test]
fn two_point_exponential_determinant() {
    let kernel = Kernel::exponential();
    let x = PointSet::from_values(&[0.0, 1.0]).expect("points");
    let (exponent, main) = predict_determinant(&kernel, &x).expect("determinant prediction");
    let predicted = main.value();

    let eps = 1e-6;
    let direct = kernel_matrix(&kernel, &x, eps).expect("kernel matrix").determinant();
    let observed = direct / eps;
    let agrees = exponent == 1 && (predicted - 2.0).abs() <= 1e-12 && (observed - 2.0).abs() <= 1e-5;
    report(
        10,
        agrees,
        &format!("two-point exponential determinant: predicted {predicted:+.1} * eps^{exponent}, direct det/eps = {observed:.6} at eps = 1e-6 (the -4 candidate is rejected)"),
    );
}
