//! CSV emission: everything needed to re-plot eigenvalue decay curves,
//! their predicted asymptotes, and eigenvector convergence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flatlimit::predict_eigenvectors;
use crate::kernels::Kernel;
use crate::matrices::PointSet;

use super::{compare, empirical_spectrum, fmt_f64, EpsGrid};

/// Writes eigencurves.csv, predictions.csv, vectors_pred.csv,
/// vectors_emp_at_eps.csv, and angles.csv into `out_dir`, returning the
/// paths written. Floats carry 17 significant digits.
pub fn figures(
    kernel: &Kernel,
    x: &PointSet,
    grid: &EpsGrid,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let pred = predict_eigenvectors(kernel, x)?;
    let emp = empirical_spectrum(kernel, x, grid)?;
    let report = compare(&pred, &emp, grid)?;
    let n = x.len();

    std::fs::create_dir_all(out_dir).map_err(|e| io_at(out_dir, e))?;
    let mut written = Vec::new();

    let mut text = String::from("eps");
    for i in 1..=n {
        write!(text, ",lambda_{i}").unwrap();
    }
    text.push('\n');
    for (t, &eps) in grid.values().iter().enumerate() {
        text.push_str(&fmt_f64(eps));
        for v in &report.eigenvalues[t] {
            text.push(',');
            text.push_str(&fmt_f64(*v));
        }
        text.push('\n');
    }
    written.push(write_file(out_dir, "eigencurves.csv", &text)?);

    let mut text = String::from("group,L,main_term,status\n");
    for (gi, g) in pred.groups.iter().enumerate() {
        if g.main_terms.is_empty() {
            writeln!(text, "{gi},{},,{}", g.order_exponent, g.status.as_str()).unwrap();
        }
        for &term in &g.main_terms {
            writeln!(
                text,
                "{gi},{},{},{}",
                g.order_exponent,
                fmt_f64(term),
                g.status.as_str()
            )
            .unwrap();
        }
    }
    written.push(write_file(out_dir, "predictions.csv", &text)?);

    let mut text = String::from("point");
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for (gi, g) in pred.groups.iter().enumerate() {
        if let Some(pv) = &g.per_vector {
            for j in 0..pv.ncols() {
                write!(text, ",g{gi}_v{}", j + 1).unwrap();
                columns.push((gi, j));
            }
        }
    }
    text.push('\n');
    for i in 0..n {
        write!(text, "{i}").unwrap();
        for &(gi, j) in &columns {
            let pv = pred.groups[gi].per_vector.as_ref().expect("column came from a per_vector");
            text.push(',');
            text.push_str(&fmt_f64(pv[(i, j)]));
        }
        text.push('\n');
    }
    written.push(write_file(out_dir, "vectors_pred.csv", &text)?);

    let eps_last = *grid.values().last().expect("grid is non-empty");
    let last = emp.last().expect("grid is non-empty");
    let mut text = format!("# eps = {}\npoint", fmt_f64(eps_last));
    for i in 1..=n {
        write!(text, ",v_{i}").unwrap();
    }
    text.push('\n');
    for i in 0..n {
        write!(text, "{i}").unwrap();
        for j in 0..n {
            text.push(',');
            text.push_str(&fmt_f64(last.vectors[(i, j)]));
        }
        text.push('\n');
    }
    written.push(write_file(out_dir, "vectors_emp_at_eps.csv", &text)?);

    let mut text = String::from("eps,group,angle\n");
    for g in &report.groups {
        for &(eps, angle) in &g.subspace_angles {
            writeln!(text, "{},{},{}", fmt_f64(eps), g.group, fmt_f64(angle)).unwrap();
        }
    }
    written.push(write_file(out_dir, "angles.csv", &text)?);

    Ok(written)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| io_at(&path, e))?;
    Ok(path)
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::PointSet;

    #[test]
    fn figures_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let x = PointSet::random_uniform(5, 1, 11).unwrap();
        let grid = EpsGrid::geometric(1.0, 1e-3, 13).unwrap();
        let written = figures(&Kernel::gaussian(), &x, &grid, dir.path()).unwrap();
        assert_eq!(written.len(), 5);

        let curves = std::fs::read_to_string(dir.path().join("eigencurves.csv")).unwrap();
        let mut lines = curves.lines();
        assert_eq!(lines.next().unwrap(), "eps,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5");
        assert_eq!(curves.lines().count(), 14);
        // Bit-stable round-trip through 17 significant digits.
        let first_data = curves.lines().nth(1).unwrap();
        let eps: f64 = first_data.split(',').next().unwrap().parse().unwrap();
        assert_eq!(eps, 1.0);
        let lam1: f64 = first_data.split(',').nth(1).unwrap().parse().unwrap();
        let direct = empirical_spectrum(&Kernel::gaussian(), &x, &grid).unwrap()[0].values[0];
        assert_eq!(lam1, direct);

        let preds = std::fs::read_to_string(dir.path().join("predictions.csv")).unwrap();
        assert_eq!(preds.lines().next().unwrap(), "group,L,main_term,status");
        assert_eq!(preds.lines().count(), 6);
        assert!(preds.lines().all(|l| l == "group,L,main_term,status" || l.contains("theorem")));

        let angles = std::fs::read_to_string(dir.path().join("angles.csv")).unwrap();
        assert_eq!(angles.lines().next().unwrap(), "eps,group,angle");
        assert!(angles.lines().count() > 5);

        let vecs = std::fs::read_to_string(dir.path().join("vectors_pred.csv")).unwrap();
        assert_eq!(vecs.lines().next().unwrap(), "point,g0_v1,g1_v1,g2_v1,g3_v1,g4_v1");

        let emp_vecs =
            std::fs::read_to_string(dir.path().join("vectors_emp_at_eps.csv")).unwrap();
        assert!(emp_vecs.starts_with("# eps = "));
    }
}
