//! Randomized structural properties.
//!
//! Each block states an identity or invariant that must hold for every
//! well-formed input, then lets proptest hunt for counterexamples over
//! randomized matrices and point sets. Case counts are kept small: the
//! checks are exact identities, not statistical estimates, so breadth of
//! shapes matters more than volume.

use flatspectra::kernels::{wronskian_antidiag, wronskian_full, Kernel};
use flatspectra::linalg::{esp_from_values, log_det, qr_full, saddle_det, sym_eig};
use flatspectra::matrices::{distance_power, kernel_matrix, vandermonde, PointSet};
use flatspectra::multiindex::{card_p, MultiIndexSet};
use flatspectra::nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(n, n).prop_map(|m| (&m + m.transpose()) * 0.5)
}

/// Points with pairwise separation >= 0.05: proptest shrinking gravitates
/// toward repeated coordinates, and near-coincident pairs push strict
/// sign or rank assertions below the f64 noise floor (a separation delta
/// enters the odd-power definiteness gap as delta^(2r-1)).
fn points(n: usize, d: usize) -> impl Strategy<Value = PointSet> {
    proptest::collection::vec(-1.0f64..1.0, n * d)
        .prop_filter_map("pairwise separated points", move |v| {
            let rows: Vec<Vec<f64>> = v.chunks(d).map(<[f64]>::to_vec).collect();
            let x = PointSet::new(d, rows).ok()?;
            let sep = (0..x.len())
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .all(|(i, j)| x.distance(i, j) >= 5e-2);
            sep.then_some(x)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn multiindex_enumeration_is_graded_with_prefix(k in 0usize..8, d in 1usize..5) {
        let all = MultiIndexSet::new(k, d).unwrap();
        prop_assert_eq!(all.len(), card_p(k, d).unwrap());
        let mut degree = 0u32;
        for alpha in all.iter() {
            prop_assert!(alpha.degree() >= degree, "degrees must be non-decreasing");
            degree = alpha.degree();
        }
        if k > 0 {
            let prefix = MultiIndexSet::new(k - 1, d).unwrap();
            prop_assert_eq!(&all.indices()[..prefix.len()], prefix.indices());
        }
    }

    #[test]
    fn qr_reconstructs_and_orthonormalizes(n in 1usize..8, extra in 0usize..4, seed in any::<u64>()) {
        // cols <= rows so the thin factor spans the full column space.
        let rows = n + extra;
        let m = {
            let x = PointSet::random_uniform(rows, n, seed | 1).unwrap();
            DMatrix::from_fn(rows, n, |i, j| 2.0 * x.point(i)[j] - 1.0)
        };
        let qr = qr_full(&m).unwrap();
        let q = qr.q_cols(0, rows);
        let qtq = q.transpose() * &q;
        prop_assert!((qtq - DMatrix::<f64>::identity(rows, rows)).norm() <= 1e-12 * rows as f64);
        let thin = qr.q_thin();
        let r = thin.transpose() * &m;
        for i in 0..r.nrows() {
            for j in 0..i.min(r.ncols()) {
                prop_assert!(r[(i, j)].abs() <= 1e-12, "R must be upper triangular");
            }
        }
        prop_assert!((&thin * &r - &m).norm() <= 1e-10 * (1.0 + m.norm()));
    }

    #[test]
    fn jacobi_eigendecomposition_is_exact(m in (2usize..8).prop_flat_map(symmetric)) {
        let n = m.nrows();
        let eig = sym_eig(&m).unwrap();
        for w in eig.values.windows(2) {
            prop_assert!(w[0] >= w[1], "eigenvalues must be descending");
        }
        let vtv = eig.vectors.transpose() * &eig.vectors;
        prop_assert!((vtv - DMatrix::<f64>::identity(n, n)).norm() <= 1e-12 * n as f64);
        for j in 0..n {
            let v = eig.vectors.column(j);
            let residual = (&m * v - v * eig.values[j]).norm();
            prop_assert!(residual <= 1e-12 * (1.0 + m.norm()), "residual {residual}");
        }
    }

    #[test]
    fn signed_log_determinant_matches_lu(m in (1usize..7).prop_flat_map(|n| matrix(n, n))) {
        let direct = m.determinant();
        let sl = log_det(&m).unwrap();
        // Below the gate cond(m) >= ~1/|det| makes both LU determinants
        // agree only to machEps * cond, so nothing is checkable there.
        if direct.abs() > 1e-6 {
            prop_assert_eq!(sl.sign as f64, direct.signum());
            prop_assert!((sl.log_abs - direct.abs().ln()).abs() <= 1e-7);
        }
    }

    #[test]
    fn esp_generating_function_identity(vals in proptest::collection::vec(-2.0f64..2.0, 1..8)) {
        // prod (1 + v_i t) = 1 + sum_k e_k t^k, checked at a few probe points.
        let esp = esp_from_values(&vals);
        for t in [0.25f64, -0.5, 1.0] {
            let lhs: f64 = vals.iter().map(|v| 1.0 + v * t).product();
            let rhs: f64 = 1.0 + esp.iter().enumerate().map(|(k, e)| e * t.powi(k as i32 + 1)).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn saddle_determinant_equals_bordered(
        n in 2usize..7,
        r in 1usize..4,
        seed in any::<u64>(),
    ) {
        let r = r.min(n);
        let a = {
            let x = PointSet::random_uniform(n, n, seed | 1).unwrap();
            let m = DMatrix::from_fn(n, n, |i, j| 2.0 * x.point(i)[j] - 1.0);
            (&m + m.transpose()) * 0.5
        };
        let v = {
            let x = PointSet::random_uniform(n, r, seed.wrapping_add(9) | 1).unwrap();
            DMatrix::from_fn(n, r, |i, j| 2.0 * x.point(i)[j] - 1.0)
        };
        let mut bordered = DMatrix::<f64>::zeros(n + r, n + r);
        bordered.view_mut((0, 0), (n, n)).copy_from(&a);
        bordered.view_mut((0, n), (n, r)).copy_from(&v);
        bordered.view_mut((n, 0), (r, n)).copy_from(&v.transpose());
        let direct = bordered.determinant();
        let fast = saddle_det(&a, &v).unwrap();
        // Floor the denominator at 1e-3: both routes carry ~1e-15 absolute
        // rounding from O(1) entries, which dominates smaller determinants.
        prop_assert!((fast - direct).abs() <= 1e-10 * direct.abs().max(1e-3));
    }

    #[test]
    fn wronskian_is_symmetric(k in 0usize..5, d in 1usize..4, which in 0usize..4) {
        let kernel = match which {
            0 => Kernel::gaussian(),
            1 => Kernel::exponential(),
            2 => Kernel::matern2(),
            _ => Kernel::matern3(),
        };
        let limit = kernel.smoothness.order().map_or(k, |r| k.min(r - 1));
        let w = wronskian_full(&kernel, limit, d).unwrap().matrix;
        prop_assert!((&w - w.transpose()).norm() == 0.0, "exact symmetry");
    }

    #[test]
    fn even_distance_powers_factor_through_vandermonde(
        x in (2usize..8).prop_flat_map(|n| points(n, 2)),
        l in 0usize..4,
    ) {
        let kernel = Kernel::gaussian();
        let f2l = kernel.even_coeff(l).unwrap();
        let lhs = distance_power(&x, 2 * l) * f2l;
        let v = vandermonde(&x, 2 * l).unwrap().matrix;
        let w = wronskian_antidiag(&kernel, 2 * l, 2).unwrap().matrix;
        let rhs = &v * &w * v.transpose();
        // Near-coincident points cancel the product down from O(1) terms,
        // so the error bound must scale with the summand magnitude, not
        // the result: |V| |W| |V^T| bounds the accumulated rounding.
        let cancel = v.abs() * w.abs() * v.abs().transpose();
        prop_assert!((&lhs - &rhs).norm() <= 1e-13 * cancel.norm());
    }

    #[test]
    fn odd_distance_powers_conditionally_definite(
        x in (7usize..12).prop_flat_map(|n| points(n, 2)),
        r in 1usize..4,
    ) {
        let v = vandermonde(&x, r - 1).unwrap().matrix;
        let b = qr_full(&v).unwrap().q_perp();
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let m = b.transpose() * distance_power(&x, 2 * r - 1) * &b * sign;
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym_eig(&sym).unwrap();
        prop_assert!(*eig.values.last().unwrap() > 0.0);
    }

    #[test]
    fn flat_kernel_matrix_is_rank_one(seed in any::<u64>(), n in 2usize..9) {
        let x = PointSet::random_uniform(n, 1, seed | 1).unwrap();
        let kernel = Kernel::gaussian();
        let k0 = kernel_matrix(&kernel, &x, 0.0).unwrap();
        let eig = sym_eig(&k0).unwrap();
        prop_assert!((eig.values[0] - n as f64).abs() <= 1e-12 * n as f64);
        for &v in &eig.values[1..] {
            prop_assert!(v.abs() <= 1e-12 * n as f64);
        }
    }

    #[test]
    fn univariate_prediction_is_translation_invariant(
        seed in any::<u64>(),
        shift in -2.0f64..2.0,
    ) {
        let kernel = Kernel::gaussian();
        let base = PointSet::random_uniform(5, 1, seed | 1).unwrap();
        // A near-coincident pair makes the trailing Vandermonde blocks nearly
        // dependent, and the recovered spans then differ by more than the
        // angle tolerance for reasons of conditioning, not correctness.
        prop_assume!((0..base.len())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .all(|(i, j)| base.distance(i, j) >= 1e-3));
        let moved = PointSet::new(
            1,
            base.iter().map(|p| vec![p[0] + shift]).collect(),
        ).unwrap();
        let a = flatspectra::flatlimit::predict_eigenvectors(&kernel, &base).unwrap();
        let b = flatspectra::flatlimit::predict_eigenvectors(&kernel, &moved).unwrap();
        prop_assert_eq!(a.groups.len(), b.groups.len());
        for (ga, gb) in a.groups.iter().zip(&b.groups) {
            prop_assert_eq!(ga.order_exponent, gb.order_exponent);
            prop_assert_eq!(ga.multiplicity, gb.multiplicity);
        }
        // The span of the leading polynomial blocks is translation invariant:
        // both equal the column space of the Vandermonde prefix.
        for s in 0..a.groups.len() {
            let width: usize = a.groups[..=s].iter().map(|g| g.multiplicity).sum();
            let qa = a.groups[..=s].iter().fold(DMatrix::<f64>::zeros(5, 0), |acc, g| {
                let mut m = DMatrix::<f64>::zeros(5, acc.ncols() + g.multiplicity);
                m.columns_mut(0, acc.ncols()).copy_from(&acc);
                m.columns_mut(acc.ncols(), g.multiplicity).copy_from(g.basis.as_ref().unwrap());
                m
            });
            let qb = b.groups[..=s].iter().fold(DMatrix::<f64>::zeros(5, 0), |acc, g| {
                let mut m = DMatrix::<f64>::zeros(5, acc.ncols() + g.multiplicity);
                m.columns_mut(0, acc.ncols()).copy_from(&acc);
                m.columns_mut(acc.ncols(), g.multiplicity).copy_from(g.basis.as_ref().unwrap());
                m
            });
            let angle = flatspectra::linalg::largest_principal_angle(&qa, &qb).unwrap();
            prop_assert!(angle <= 1e-7, "span through degree {s} moved by {angle} (width {width})");
        }
    }
}
