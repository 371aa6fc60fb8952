//! Classical, higher, multiple and generalized Mahler measures.
//!
//! Every request is first reduced to the variables its polynomials actually
//! use. With none left the answer is a closed form; with one the integral is
//! taken on the circle, split at the root angles; otherwise it is estimated
//! by randomized QMC on the torus.

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jensen::{mahler_univariate, MeasureResult};
use crate::poly::{Evaluator, Polynomial};
use crate::quadrature::{integrate_circle, integrate_torus_qmc, QuadConfig};
use crate::roots::{roots, roots_near_circle, RootSet};

/// Root-finder tolerances tried in turn before giving up.
const ROOT_TOLS: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Roots this close to the circle become quadrature breakpoints.
const BREAKPOINT_BAND: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Classic,
    Higher(u32),
    Multiple,
    Max,
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Classic => f.write_str("classic"),
            MeasureKind::Higher(s) => write!(f, "higher-{s}"),
            MeasureKind::Multiple => f.write_str("multiple"),
            MeasureKind::Max => f.write_str("max"),
        }
    }
}

impl Serialize for MeasureKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRequest {
    pub polys: Vec<Polynomial>,
    pub kind: MeasureKind,
    pub cfg: QuadConfig,
}

impl MeasureRequest {
    pub fn new(polys: Vec<Polynomial>, kind: MeasureKind, cfg: QuadConfig) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::InvalidParameter("no polynomials given".into()));
        }
        if matches!(kind, MeasureKind::Classic | MeasureKind::Higher(_)) && polys.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "{kind} measure takes exactly one polynomial"
            )));
        }
        if let MeasureKind::Higher(0) = kind {
            return Err(Error::InvalidParameter("s must be positive".into()));
        }
        if polys.iter().any(Polynomial::is_zero) {
            return Err(Error::ZeroPolynomial);
        }
        cfg.validate()?;
        Ok(MeasureRequest { polys, kind, cfg })
    }

    pub fn compute(&self) -> Result<MeasureResult> {
        match self.kind {
            MeasureKind::Classic => mahler(&self.polys[0], &self.cfg),
            MeasureKind::Higher(s) => higher_mahler(&self.polys[0], s, &self.cfg),
            MeasureKind::Multiple => multiple_mahler(&self.polys, &self.cfg),
            MeasureKind::Max => generalized_mahler(&self.polys, &self.cfg),
        }
    }
}

/// Roots at the first tolerance in [`ROOT_TOLS`] that converges.
pub(crate) fn roots_with_fallback(p: &Polynomial) -> Result<RootSet> {
    let mut last = None;
    for tol in ROOT_TOLS {
        match roots(p, tol) {
            Err(e @ Error::NonConvergence { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one tolerance"))
}

/// The inputs in a canonical order, so that symmetric measures are
/// bit-for-bit invariant under permutation.
fn canonical_order(polys: &[Polynomial]) -> Vec<Polynomial> {
    let mut keyed: Vec<(String, &Polynomial)> = polys.iter().map(|p| (p.to_string(), p)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p.clone()).collect()
}

/// Lifts to a common variable count and drops variables nobody uses.
/// Returns the reduced polynomials and their dimension, 0 if all constant.
fn reduce(polys: &[Polynomial]) -> Result<(Vec<Polynomial>, usize)> {
    if polys.is_empty() {
        return Err(Error::InvalidParameter("no polynomials given".into()));
    }
    if polys.iter().any(Polynomial::is_zero) {
        return Err(Error::ZeroPolynomial);
    }
    let n = polys.iter().map(Polynomial::nvars).max().unwrap_or(1);
    let lifted = polys.iter().map(|p| p.lift(n)).collect::<Result<Vec<_>>>()?;
    let mut used: Vec<usize> = lifted.iter().flat_map(|p| p.used_variables()).collect();
    used.sort_unstable();
    used.dedup();
    if used.is_empty() {
        return Ok((lifted, 0));
    }
    let reduced = lifted
        .iter()
        .map(|p| p.restrict_to(&used))
        .collect::<Result<Vec<_>>>()?;
    Ok((reduced, used.len()))
}

fn constant_term(p: &Polynomial) -> Complex64 {
    p.coeff(&vec![0; p.nvars()])
}

/// Coefficient of a monomial `a·x^k`.
fn monomial_coeff(p: &Polynomial) -> Option<Complex64> {
    p.is_monomial()
        .then(|| p.terms().next().map(|(_, &c)| c))
        .flatten()
}

#[derive(Debug, Clone, Copy)]
enum Combine {
    Product,
    Power(u32),
    Max,
}

impl Combine {
    fn apply(self, logs: impl Iterator<Item = f64>) -> f64 {
        match self {
            Combine::Product => logs.product(),
            Combine::Power(s) => logs.map(|l| l.powi(s as i32)).product(),
            Combine::Max => logs.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// `log|P(e^{iθ})|` in factored form `log|a| + Σ m log|e^{iθ} - ρ|`, which
/// stays accurate right up to the roots.
struct FactoredLog {
    log_lead: f64,
    roots: Vec<(Complex64, f64)>,
}

impl FactoredLog {
    fn eval(&self, theta: f64) -> f64 {
        let z = Complex64::cis(theta);
        self.log_lead
            + self
                .roots
                .iter()
                .map(|&(r, m)| m * (z - r).norm().max(f64::MIN_POSITIVE).ln())
                .sum::<f64>()
    }
}

/// Factored logs of univariate polynomials, the union of their near-circle
/// root angles, and the root-finding effort.
fn factor_all(polys: &[Polynomial]) -> Result<(Vec<FactoredLog>, Vec<f64>, u64)> {
    let mut logs = Vec::with_capacity(polys.len());
    let mut angles = Vec::new();
    let mut effort = 0u64;
    for p in polys {
        if p.is_constant() {
            logs.push(FactoredLog {
                log_lead: constant_term(p).norm().ln(),
                roots: Vec::new(),
            });
            continue;
        }
        let rs = roots_with_fallback(p)?;
        effort += rs.iterations as u64;
        angles.extend(roots_near_circle(&rs, BREAKPOINT_BAND));
        logs.push(FactoredLog {
            log_lead: rs.leading.norm().ln(),
            roots: rs
                .roots
                .iter()
                .filter(|r| r.value.norm() > 0.0)
                .map(|r| (r.value, r.multiplicity as f64))
                .collect(),
        });
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    Ok((logs, angles, effort))
}

fn integrate(polys: &[Polynomial], combine: Combine, cfg: &QuadConfig) -> Result<MeasureResult> {
    cfg.validate()?;
    let (reduced, dim) = reduce(polys)?;
    match dim {
        0 => Ok(MeasureResult::exact(
            combine.apply(reduced.iter().map(|p| constant_term(p).norm().ln())),
        )),
        1 => {
            let (logs, angles, effort) = factor_all(&reduced)?;
            let mut r = integrate_circle(
                |t| combine.apply(logs.iter().map(|l| l.eval(t))),
                &angles,
                cfg,
            )?;
            r.effort += effort;
            Ok(r)
        }
        _ => {
            let evs: Vec<Evaluator> = reduced.iter().map(Evaluator::new).collect();
            integrate_torus_qmc(
                |a| combine.apply(evs.iter().map(|e| e.log_abs(a))),
                dim,
                cfg,
            )
        }
    }
}

/// `m(P)`: Jensen's formula for one variable, torus QMC for more.
pub fn mahler(p: &Polynomial, cfg: &QuadConfig) -> Result<MeasureResult> {
    cfg.validate()?;
    let (reduced, dim) = reduce(std::slice::from_ref(p))?;
    let q = &reduced[0];
    if let Some(a) = monomial_coeff(q) {
        return Ok(MeasureResult::exact(a.norm().ln()));
    }
    match dim {
        1 => {
            let mut last = None;
            for tol in ROOT_TOLS {
                match mahler_univariate(q, tol) {
                    Err(e @ Error::NonConvergence { .. }) => last = Some(e),
                    other => return other,
                }
            }
            Err(last.expect("at least one tolerance"))
        }
        _ => integrate(&reduced, Combine::Product, cfg),
    }
}

/// `m_s(P) = ∫ log^s|P|`.
pub fn higher_mahler(p: &Polynomial, s: u32, cfg: &QuadConfig) -> Result<MeasureResult> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be positive".into()));
    }
    if s == 1 {
        return mahler(p, cfg);
    }
    cfg.validate()?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if let Some(a) = monomial_coeff(p) {
        return Ok(MeasureResult::exact(a.norm().ln().powi(s as i32)));
    }
    integrate(std::slice::from_ref(p), Combine::Power(s), cfg)
}

/// `m(P₁, …, P_s) = ∫ log|P₁| ⋯ log|P_s|`. Monomial factors have constant
/// log-modulus and are pulled out of the integral.
pub fn multiple_mahler(polys: &[Polynomial], cfg: &QuadConfig) -> Result<MeasureResult> {
    cfg.validate()?;
    if polys.is_empty() {
        return Err(Error::InvalidParameter("no polynomials given".into()));
    }
    if polys.iter().any(Polynomial::is_zero) {
        return Err(Error::ZeroPolynomial);
    }
    let mut factor = 1.0;
    let mut rest = Vec::new();
    for p in &canonical_order(polys) {
        match monomial_coeff(p) {
            Some(a) => factor *= a.norm().ln(),
            None => rest.push(p.clone()),
        }
    }
    if rest.is_empty() || factor == 0.0 {
        return Ok(MeasureResult::exact(factor));
    }
    let mut r = integrate(&rest, Combine::Product, cfg)?;
    r.value *= factor;
    r.error_estimate *= factor.abs();
    Ok(r)
}

/// `m_max(P₁, …, P_s) = ∫ max_i log|P_i|`.
///
/// On the circle the breakpoints are the union of every polynomial's
/// near-circle root angles, a superset of where the maximum is singular.
pub fn generalized_mahler(polys: &[Polynomial], cfg: &QuadConfig) -> Result<MeasureResult> {
    if polys.len() == 1 {
        return mahler(&polys[0], cfg);
    }
    integrate(&canonical_order(polys), Combine::Max, cfg)
}
