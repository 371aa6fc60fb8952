//! Root-based Mahler measure of univariate polynomials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::roots::{roots, RootSet};

/// Roots this close to the unit circle contribute exactly zero.
pub const ON_CIRCLE_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Jensen,
    CircleQuadrature,
    TorusQmc,
    MonteCarlo,
    /// Closed form, e.g. a monomial `a·x^k` whose log-modulus is constant.
    Exact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Jensen => "jensen",
            Method::CircleQuadrature => "circle-quadrature",
            Method::TorusQmc => "torus-qmc",
            Method::MonteCarlo => "monte-carlo",
            Method::Exact => "exact",
        }
    }
}

/// A numerical value with its error estimate and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    /// Integrand evaluations, samples, or root-finder iterations.
    pub effort: u64,
    pub seed: Option<u64>,
    /// False when the requested tolerance was not reached; `value` is then
    /// the best available estimate and `error_estimate` the achieved error.
    pub converged: bool,
}

impl MeasureResult {
    pub fn exact(value: f64) -> Self {
        MeasureResult {
            value,
            error_estimate: 0.0,
            method: Method::Exact,
            effort: 0,
            seed: None,
            converged: true,
        }
    }
}

fn log_contribution(modulus: f64) -> f64 {
    if (modulus - 1.0).abs() < ON_CIRCLE_BAND {
        0.0
    } else {
        modulus.ln().max(0.0)
    }
}

/// Jensen sum `log|a| + Σ max(0, log|ρ|)` over a computed root set, with
/// the error propagated from the per-root error bounds.
pub fn jensen_sum(rs: &RootSet) -> (f64, f64) {
    let mut value = rs.leading.norm().ln();
    let mut err = 0.0;
    let mut magnitude = value.abs();
    for r in &rs.roots {
        let m = r.multiplicity as f64;
        let rho = r.value.norm();
        let c = m * log_contribution(rho);
        value += c;
        magnitude += c.abs();
        let e = r.error_bound;
        if e.is_finite() {
            let hi = (rho + e).ln().max(0.0);
            let lo = if rho > e { (rho - e).ln().max(0.0) } else { 0.0 };
            err += m * (hi - lo);
        } else {
            err = f64::INFINITY;
        }
    }
    let n = rs.degree() as f64;
    err += 4.0 * (n + 1.0) * f64::EPSILON * magnitude.max(1.0);
    (value, err)
}

/// Mahler measure of a univariate polynomial by Jensen's formula.
pub fn mahler_univariate(p: &Polynomial, tol: f64) -> Result<MeasureResult> {
    if p.nvars() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.nvars(),
        });
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.is_monomial() {
        let c = p.leading_coefficient()?;
        return Ok(MeasureResult {
            method: Method::Jensen,
            ..MeasureResult::exact(c.norm().ln())
        });
    }
    let rs = roots(p, tol)?;
    let (value, error_estimate) = jensen_sum(&rs);
    Ok(MeasureResult {
        value,
        error_estimate,
        method: Method::Jensen,
        effort: rs.iterations as u64,
        seed: None,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::DEFAULT_TOL;
    use crate::text::parse_poly;
    use proptest::prelude::*;

    fn m(s: &str) -> MeasureResult {
        mahler_univariate(&parse_poly(s).unwrap(), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn examples() {
        assert!((m("x - 2").value - 2f64.ln()).abs() < 1e-15);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((m("x^2 - x - 1").value - golden.ln()).abs() < 1e-14);
        for n in 1..=10 {
            let r = m(&format!("x^{n} - 1"));
            assert_eq!(r.value, 0.0, "x^{n} - 1");
            assert!(r.error_estimate < 1e-12);
        }
        assert_eq!(m("7").value, 7f64.ln());
        assert_eq!(m("-3*x^4").value, 3f64.ln());
    }

    #[test]
    fn errors() {
        assert_eq!(
            mahler_univariate(&Polynomial::zero(1), 1e-12),
            Err(Error::ZeroPolynomial)
        );
        assert!(matches!(
            mahler_univariate(&parse_poly("x + y").unwrap(), 1e-12),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn repeated_roots_on_circle() {
        let r = m("(1 + x)^2*(1 + x^3)");
        assert!(r.value.abs() < 1e-9, "{r:?}");
    }

    fn arb_univariate() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(-6i32..=6, 2..9).prop_filter_map("nonconstant", |c| {
            let p = Polynomial::from_real_coeffs(&c.iter().map(|&v| v as f64).collect::<Vec<_>>());
            (p.degree().unwrap().unwrap_or(0) >= 1).then_some(p)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn multiplicative(a in arb_univariate(), b in arb_univariate()) {
            let ma = mahler_univariate(&a, DEFAULT_TOL).unwrap();
            let mb = mahler_univariate(&b, DEFAULT_TOL).unwrap();
            let mab = mahler_univariate(&(&a * &b), DEFAULT_TOL).unwrap();
            let err = ma.error_estimate + mb.error_estimate + mab.error_estimate;
            prop_assert!((mab.value - ma.value - mb.value).abs() <= err,
                "{} vs {} + {} (err {})", mab.value, ma.value, mb.value, err);
        }

        #[test]
        fn scaling(a in arb_univariate(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let c = num_complex::Complex64::new(re, im);
            prop_assume!(c.norm() > 1e-3);
            let ma = mahler_univariate(&a, DEFAULT_TOL).unwrap();
            let mc = mahler_univariate(&a.scale(c).unwrap(), DEFAULT_TOL).unwrap();
            prop_assert!((mc.value - ma.value - c.norm().ln()).abs() <= 1e-10);
        }
    }
}
