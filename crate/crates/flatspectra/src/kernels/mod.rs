//! Kernels and their Taylor data at the diagonal.
//!
//! A radial kernel is K(x, y) = f(||x - y||_2) for a profile f with
//! f(t) = f_0 + f_2 t^2 + ... + f_{2r-2} t^{2r-2} + t^{2r-1}(f_{2r-1} + O(t)).
//!
//! The scaled family used throughout is K_eps(x, y) = f(eps ||x - y||_2).
//! The index r of the first nonvanishing odd coefficient is the smoothness
//! order: it decides how many derivatives the kernel has across the
//! diagonal and which perturbation regime the flat limit lands in. The
//! Gaussian has no odd terms at all (r infinite); the exponential kernel
//! e^{-t} has r = 1; the Matern profiles (1+t)e^{-t} and (1+t+t^2/3)e^{-t}
//! have r = 2 and r = 3.
//!
//! Profiles can also be given as raw Taylor data: radial (even coefficients
//! plus one odd leading term) or, in one dimension, a full translation
//! expansion K(x, y) = sum_j alpha_j (x-y)^j. Taylor-specified kernels
//! carry predictions but no exact evaluator, so the empirical harness
//! refuses them.

mod wronskian;

pub use wronskian::{wronskian_antidiag, wronskian_full, WronskianMatrix};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian,
    Exponential,
    Matern2,
    Matern3,
    RadialTaylor,
    TranslationTaylor,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Exponential => "exponential",
            KernelFamily::Matern2 => "matern2",
            KernelFamily::Matern3 => "matern3",
            KernelFamily::RadialTaylor => "radial_taylor",
            KernelFamily::TranslationTaylor => "translation_taylor",
        }
    }
}

/// Smoothness order of the radial profile: `Finite(r)` means f_{2r-1} is
/// the first nonzero odd Taylor coefficient; `Infinite` means there is none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoothness {
    Finite(usize),
    Infinite,
}

impl Smoothness {
    pub fn order(&self) -> Option<usize> {
        match self {
            Smoothness::Finite(r) => Some(*r),
            Smoothness::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub family: KernelFamily,
    /// Even radial coefficients f_0, f_2, ... for radial families (empty
    /// for the Gaussian, whose coefficients follow a closed rule), or the
    /// full alpha_0, alpha_1, ... sequence for translation kernels.
    coeffs: Vec<f64>,
    /// f_{2r-1} for finitely smooth kernels.
    pub odd_leading: Option<f64>,
    pub smoothness: Smoothness,
    /// Whether an exact closed-form evaluator exists.
    pub evaluable: bool,
    /// Set when the data looks inconsistent with positive definiteness
    /// (currently: f_0 <= 0). Advisory only.
    pub warning: Option<String>,
}

impl Kernel {
    /// f(t) = exp(-t^2). Even coefficients (-1)^nu / nu!, no odd terms.
    pub fn gaussian() -> Kernel {
        Kernel {
            family: KernelFamily::Gaussian,
            coeffs: Vec::new(),
            odd_leading: None,
            smoothness: Smoothness::Infinite,
            evaluable: true,
            warning: None,
        }
    }

    /// f(t) = exp(-t): f_0 = 1, f_1 = -1, smoothness order 1.
    pub fn exponential() -> Kernel {
        Kernel {
            family: KernelFamily::Exponential,
            coeffs: vec![1.0],
            odd_leading: Some(-1.0),
            smoothness: Smoothness::Finite(1),
            evaluable: true,
            warning: None,
        }
    }

    /// f(t) = (1 + t) exp(-t): f_2 = -1/2, f_3 = 1/3, smoothness order 2.
    pub fn matern2() -> Kernel {
        Kernel {
            family: KernelFamily::Matern2,
            coeffs: vec![1.0, -0.5],
            odd_leading: Some(1.0 / 3.0),
            smoothness: Smoothness::Finite(2),
            evaluable: true,
            warning: None,
        }
    }

    /// f(t) = (1 + t + t^2/3) exp(-t): f_2 = -1/6, f_4 = 1/24, f_5 = -1/45,
    /// smoothness order 3.
    pub fn matern3() -> Kernel {
        Kernel {
            family: KernelFamily::Matern3,
            coeffs: vec![1.0, -1.0 / 6.0, 1.0 / 24.0],
            odd_leading: Some(-1.0 / 45.0),
            smoothness: Smoothness::Finite(3),
            evaluable: true,
            warning: None,
        }
    }

    /// Radial profile from raw Taylor data: even coefficients f_0, f_2, ...
    /// plus an optional odd leading term f_{2r-1} whose index is fixed by
    /// the declared smoothness. No closed form is attached, so the kernel
    /// is not evaluable.
    pub fn radial_taylor(
        even_coeffs: Vec<f64>,
        odd_leading: Option<f64>,
        smoothness: Option<Smoothness>,
    ) -> Result<Kernel> {
        if even_coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "radial Taylor data needs at least f_0".into(),
            ));
        }
        let smoothness = match smoothness {
            Some(Smoothness::Infinite) => {
                if odd_leading.is_some_and(|c| c != 0.0) {
                    return Err(Error::InvalidArgument(
                        "an infinitely smooth profile cannot carry a nonzero odd coefficient"
                            .into(),
                    ));
                }
                Smoothness::Infinite
            }
            Some(Smoothness::Finite(r)) => {
                if r == 0 {
                    return Err(Error::InvalidArgument("smoothness order must be >= 1".into()));
                }
                if !odd_leading.is_some_and(|c| c != 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "smoothness order {r} requires a nonzero odd leading coefficient f_{}",
                        2 * r - 1
                    )));
                }
                Smoothness::Finite(r)
            }
            // Without a declared order the odd coefficient has no index, and
            // without any odd data the profile could be anything between
            // C^1 and analytic.
            None => return Err(Error::AmbiguousSmoothness),
        };
        let warning = pd_warning(even_coeffs[0]);
        Ok(Kernel {
            family: KernelFamily::RadialTaylor,
            coeffs: even_coeffs,
            odd_leading: if matches!(smoothness, Smoothness::Infinite) { None } else { odd_leading },
            smoothness,
            evaluable: false,
            warning,
        })
    }

    /// One-dimensional translation kernel K(x, y) = sum_j alpha_j (x-y)^j
    /// from its full coefficient sequence. The smoothness order is detected
    /// as p+1 where alpha_{2p+1} is the first nonzero odd coefficient;
    /// with no nonzero odd coefficient the caller must declare the profile
    /// infinitely smooth, otherwise the data is ambiguous.
    pub fn translation_taylor(coeffs: Vec<f64>, infinite: bool) -> Result<Kernel> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "translation Taylor data needs at least alpha_0".into(),
            ));
        }
        let first_odd = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .step_by(2)
            .find(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (j, c));
        let (smoothness, odd_leading) = match (first_odd, infinite) {
            (Some((j, _)), true) => {
                return Err(Error::InvalidArgument(format!(
                    "declared infinitely smooth but alpha_{j} is nonzero"
                )));
            }
            (Some((j, c)), false) => (Smoothness::Finite((j + 1) / 2), Some(c)),
            (None, true) => (Smoothness::Infinite, None),
            (None, false) => return Err(Error::AmbiguousSmoothness),
        };
        let warning = pd_warning(coeffs[0]);
        Ok(Kernel {
            family: KernelFamily::TranslationTaylor,
            coeffs,
            odd_leading,
            smoothness,
            evaluable: false,
            warning,
        })
    }

    /// Built-in family by name.
    pub fn from_name(name: &str) -> Result<Kernel> {
        match name {
            "gaussian" => Ok(Kernel::gaussian()),
            "exponential" => Ok(Kernel::exponential()),
            "matern2" => Ok(Kernel::matern2()),
            "matern3" => Ok(Kernel::matern3()),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel '{other}' (expected gaussian, exponential, matern2, matern3, or a spec file)"
            ))),
        }
    }

    /// Kernel from a JSON spec string. Unknown keys are rejected.
    pub fn from_spec_str(json: &str) -> Result<Kernel> {
        let spec: KernelSpec = serde_json::from_str(json)?;
        spec.build()
    }

    pub fn from_spec_file(path: &std::path::Path) -> Result<Kernel> {
        let text = std::fs::read_to_string(path)?;
        Kernel::from_spec_str(&text)
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.family, KernelFamily::TranslationTaylor)
    }

    /// f(0), the kernel value at coincident points.
    pub fn f0(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 1.0,
            _ => self.coeffs[0],
        }
    }

    /// Even radial coefficient f_{2l}. Errors when the profile has no
    /// derivative data at that order.
    pub fn even_coeff(&self, l: usize) -> Result<f64> {
        match self.family {
            KernelFamily::TranslationTaylor => Err(Error::InvalidArgument(
                "translation kernels index coefficients by plain degree, not even order".into(),
            )),
            KernelFamily::Gaussian => {
                let mut c = 1.0;
                for i in 1..=l {
                    c = -c / i as f64;
                }
                Ok(c)
            }
            _ => self.coeffs.get(l).copied().ok_or(Error::DegreeExceedsSmoothness {
                requested: 2 * l,
                available: 2 * (self.coeffs.len() - 1),
            }),
        }
    }

    /// Exact rational value of f_{2l} for the built-in families.
    pub(crate) fn even_coeff_rational(&self, l: usize) -> Option<BigRational> {
        let big = |n: i64, d: u64| Some(BigRational::new(BigInt::from(n), BigInt::from(d)));
        match self.family {
            KernelFamily::Gaussian => {
                let sign = if l % 2 == 0 { 1 } else { -1 };
                Some(BigRational::new(BigInt::from(sign), factorial_big(l as u64)))
            }
            KernelFamily::Exponential => match l {
                0 => big(1, 1),
                _ => None,
            },
            KernelFamily::Matern2 => match l {
                0 => big(1, 1),
                1 => big(-1, 2),
                _ => None,
            },
            KernelFamily::Matern3 => match l {
                0 => big(1, 1),
                1 => big(-1, 6),
                2 => big(1, 24),
                _ => None,
            },
            _ => None,
        }
    }

    /// alpha_j for translation kernels.
    pub fn translation_coeff(&self, j: usize) -> Result<f64> {
        if self.family != KernelFamily::TranslationTaylor {
            return Err(Error::InvalidArgument(
                "only translation kernels carry a plain-degree coefficient sequence".into(),
            ));
        }
        self.coeffs.get(j).copied().ok_or(Error::DegreeExceedsSmoothness {
            requested: j,
            available: self.coeffs.len() - 1,
        })
    }

    /// The radial profile f(t) in closed form.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self.family {
            KernelFamily::Gaussian => Ok((-t * t).exp()),
            KernelFamily::Exponential => Ok((-t).exp()),
            KernelFamily::Matern2 => Ok((1.0 + t) * (-t).exp()),
            KernelFamily::Matern3 => Ok((1.0 + t + t * t / 3.0) * (-t).exp()),
            other => Err(Error::NoExactEvaluator(other.name().to_string())),
        }
    }

    /// K_eps(x, y) = f(eps ||x - y||_2).
    pub fn eval_scaled(&self, x: &[f64], y: &[f64], eps: f64) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "points of dimension {} and {}",
                x.len(),
                y.len()
            )));
        }
        if eps < 0.0 {
            return Err(Error::InvalidArgument("eps must be non-negative".into()));
        }
        let dist = x
            .iter()
            .zip(y)
            .fold(0.0f64, |acc, (&a, &b)| acc.hypot(a - b));
        self.eval(eps * dist)
    }
}

fn pd_warning(f0: f64) -> Option<String> {
    (f0 <= 0.0).then(|| format!(
        "f_0 = {f0} is not positive; a positive definite kernel has f(0) > 0"
    ))
}

pub(crate) fn factorial_big(n: u64) -> BigInt {
    let mut acc = BigInt::from(1u32);
    for i in 2..=n {
        acc *= i;
    }
    acc
}

pub(crate) fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// On-disk kernel description.
///
/// {"family": "...", "even_coeffs": [...], "odd_leading": x, "smoothness": r | "infinite"}
///
/// Built-in families take no further fields. `radial_taylor` takes all
/// three. `translation_taylor` puts its full coefficient sequence in
/// `even_coeffs` and accepts only the "infinite" smoothness marker (the
/// finite order is detected, not declared).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelSpec {
    family: String,
    #[serde(default)]
    even_coeffs: Option<Vec<f64>>,
    #[serde(default)]
    odd_leading: Option<f64>,
    #[serde(default)]
    smoothness: Option<SmoothnessSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SmoothnessSpec {
    Order(usize),
    Marker(String),
}

impl SmoothnessSpec {
    fn resolve(self) -> Result<Smoothness> {
        match self {
            SmoothnessSpec::Order(r) => Ok(Smoothness::Finite(r)),
            SmoothnessSpec::Marker(s) if s == "infinite" => Ok(Smoothness::Infinite),
            SmoothnessSpec::Marker(s) => Err(Error::Parse(format!(
                "smoothness must be a positive integer or \"infinite\", got \"{s}\""
            ))),
        }
    }
}

impl KernelSpec {
    fn build(self) -> Result<Kernel> {
        match self.family.as_str() {
            "gaussian" | "exponential" | "matern2" | "matern3" => {
                if self.even_coeffs.is_some() || self.odd_leading.is_some() || self.smoothness.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "family '{}' is built in and takes no Taylor data",
                        self.family
                    )));
                }
                Kernel::from_name(&self.family)
            }
            "radial_taylor" => {
                let even = self.even_coeffs.ok_or_else(|| {
                    Error::InvalidArgument("radial_taylor requires even_coeffs".into())
                })?;
                let smoothness = self.smoothness.map(SmoothnessSpec::resolve).transpose()?;
                Kernel::radial_taylor(even, self.odd_leading, smoothness)
            }
            "translation_taylor" => {
                let coeffs = self.even_coeffs.ok_or_else(|| {
                    Error::InvalidArgument(
                        "translation_taylor requires its coefficient sequence in even_coeffs"
                            .into(),
                    )
                })?;
                if self.odd_leading.is_some() {
                    return Err(Error::InvalidArgument(
                        "translation_taylor detects its odd leading coefficient; do not supply one"
                            .into(),
                    ));
                }
                let infinite = match self.smoothness.map(SmoothnessSpec::resolve).transpose()? {
                    None => false,
                    Some(Smoothness::Infinite) => true,
                    Some(Smoothness::Finite(_)) => {
                        return Err(Error::InvalidArgument(
                            "translation_taylor smoothness is detected from the coefficients; only the \"infinite\" marker is accepted".into(),
                        ))
                    }
                };
                Kernel::translation_taylor(coeffs, infinite)
            }
            other => Err(Error::InvalidArgument(format!("unknown kernel family '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_taylor_data() {
        let e = Kernel::exponential();
        assert_eq!(e.f0(), 1.0);
        assert_eq!(e.odd_leading, Some(-1.0));
        assert_eq!(e.smoothness, Smoothness::Finite(1));

        let m2 = Kernel::matern2();
        assert_eq!(m2.even_coeff(0).unwrap(), 1.0);
        assert_eq!(m2.even_coeff(1).unwrap(), -0.5);
        assert_relative_eq!(m2.odd_leading.unwrap(), 1.0 / 3.0);
        assert_eq!(m2.smoothness, Smoothness::Finite(2));

        let g = Kernel::gaussian();
        for nu in 0..10 {
            let want = (0..nu).fold(1.0f64, |acc, i| -acc / (i + 1) as f64);
            assert_relative_eq!(g.even_coeff(nu).unwrap(), want);
        }
        assert_eq!(g.smoothness, Smoothness::Infinite);

        let m3 = Kernel::matern3();
        assert_eq!(m3.smoothness, Smoothness::Finite(3));
        assert_relative_eq!(m3.even_coeff(1).unwrap(), -1.0 / 6.0);
        assert_relative_eq!(m3.even_coeff(2).unwrap(), 1.0 / 24.0);
        assert_relative_eq!(m3.odd_leading.unwrap(), -1.0 / 45.0);
    }

    #[test]
    fn matern3_taylor_matches_closed_form() {
        // Finite differences of the closed form pin the stored data.
        let m3 = Kernel::matern3();
        let h = 1e-3;
        let probe = |t: f64| m3.eval(t).unwrap();
        // f(t) + f(-t) picks out the even part; the stored coefficients
        // must reproduce it to O(h^6) at small t.
        let even_probe = 0.5 * (probe(h) + probe(-h));
        let even_series = 1.0 - h * h / 6.0 + h.powi(4) / 24.0;
        assert_relative_eq!(even_probe, even_series, epsilon = 1e-12);
        let odd_probe = 0.5 * (probe(h) - probe(-h));
        let odd_series = -h.powi(5) / 45.0;
        assert_relative_eq!(odd_probe, odd_series, epsilon = 1e-12);
    }

    #[test]
    fn eval_closed_forms() {
        let g = Kernel::gaussian();
        assert_eq!(g.eval_scaled(&[0.0], &[1.0], 0.0).unwrap(), 1.0);
        let e = Kernel::exponential();
        assert_relative_eq!(e.eval_scaled(&[0.0], &[1.0], 2.0).unwrap(), (-2.0f64).exp());
        let m2 = Kernel::matern2();
        assert_relative_eq!(
            m2.eval_scaled(&[0.0, 0.0], &[3.0, 4.0], 0.1).unwrap(),
            1.5 * (-0.5f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn taylor_kernels_not_evaluable() {
        let k = Kernel::radial_taylor(vec![1.0, -0.5], Some(1.0 / 3.0), Some(Smoothness::Finite(2)))
            .unwrap();
        assert!(!k.evaluable);
        assert!(matches!(k.eval(0.5), Err(Error::NoExactEvaluator(_))));
    }

    #[test]
    fn radial_taylor_smoothness_declared() {
        let k = Kernel::radial_taylor(vec![1.0, -0.5], Some(1.0 / 3.0), Some(Smoothness::Finite(2)))
            .unwrap();
        assert_eq!(k.smoothness, Smoothness::Finite(2));
        // Same rule as KernelSpec::build: no declaration is ambiguous.
        assert!(matches!(
            Kernel::radial_taylor(vec![1.0, -0.5], None, None),
            Err(Error::AmbiguousSmoothness)
        ));
    }

    #[test]
    fn translation_detection() {
        // matern2 written as a translation expansion in |x-y| would not be
        // smooth; but any 1d data sequence with the same numbers detects
        // the first odd nonzero at index 3, hence order 2.
        let k = Kernel::translation_taylor(vec![1.0, 0.0, -0.5, 1.0 / 3.0], false).unwrap();
        assert_eq!(k.smoothness, Smoothness::Finite(2));
        assert_relative_eq!(k.odd_leading.unwrap(), 1.0 / 3.0);

        let even_only = Kernel::translation_taylor(vec![1.0, 0.0, -0.5], false);
        assert!(matches!(even_only, Err(Error::AmbiguousSmoothness)));
        let declared = Kernel::translation_taylor(vec![1.0, 0.0, -0.5], true).unwrap();
        assert_eq!(declared.smoothness, Smoothness::Infinite);
    }

    #[test]
    fn pd_warning_on_nonpositive_f0() {
        let k = Kernel::radial_taylor(vec![-1.0], Some(2.0), Some(Smoothness::Finite(1))).unwrap();
        assert!(k.warning.is_some());
        assert!(Kernel::gaussian().warning.is_none());
    }

    #[test]
    fn json_spec_roundtrip() {
        let k = Kernel::from_spec_str(r#"{"family": "matern2"}"#).unwrap();
        assert_eq!(k.family, KernelFamily::Matern2);

        let k = Kernel::from_spec_str(
            r#"{"family": "radial_taylor", "even_coeffs": [1.0, -0.5], "odd_leading": 0.3333333333333333, "smoothness": 2}"#,
        )
        .unwrap();
        assert_eq!(k.smoothness, Smoothness::Finite(2));

        let k = Kernel::from_spec_str(
            r#"{"family": "radial_taylor", "even_coeffs": [1.0, -1.0], "smoothness": "infinite"}"#,
        )
        .unwrap();
        assert_eq!(k.smoothness, Smoothness::Infinite);

        let k = Kernel::from_spec_str(
            r#"{"family": "translation_taylor", "even_coeffs": [1.0, -1.0, 0.5]}"#,
        )
        .unwrap();
        assert_eq!(k.smoothness, Smoothness::Finite(1));
    }

    #[test]
    fn json_spec_rejects_junk() {
        assert!(Kernel::from_spec_str(r#"{"family": "gaussian", "extra": 1}"#).is_err());
        assert!(Kernel::from_spec_str(r#"{"family": "gaussian", "even_coeffs": [1.0]}"#).is_err());
        assert!(Kernel::from_spec_str(r#"{"family": "nope"}"#).is_err());
        assert!(Kernel::from_spec_str(r#"{"family": "radial_taylor"}"#).is_err());
        assert!(
            Kernel::from_spec_str(r#"{"family": "radial_taylor", "even_coeffs": [1.0], "smoothness": "sometimes"}"#)
                .is_err()
        );
    }

    #[test]
    fn combinatorial_helpers() {
        assert_eq!(factorial_big(5), BigInt::from(120u32));
        assert_eq!(binomial_big(6, 3), BigInt::from(20u32));
        assert_eq!(binomial_big(3, 5), BigInt::from(0u32));
    }
}
