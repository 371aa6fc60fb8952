//! Sparse multivariate polynomials with complex coefficients.
//!
//! A [`Polynomial`] is stored as a map from exponent vectors to nonzero
//! coefficients. Every constructor canonicalizes: exact zeros are removed,
//! and coefficients produced by summing colliding monomials are removed when
//! what is left is floating-point residue (see [`RESIDUE_RTOL`]).

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold below which a summed coefficient is treated as
/// cancellation residue and dropped.
pub const RESIDUE_RTOL: f64 = 1e-14;

/// Exponent vector of a monomial, one entry per variable.
pub type Exponents = Vec<u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, Complex64>,
}

/// A point of the unit torus, stored by its angles in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    angles: Vec<f64>,
}

impl TorusPoint {
    pub fn new(angles: impl Into<Vec<f64>>) -> Self {
        let angles = angles
            .into()
            .into_iter()
            .map(|a| {
                let t = a.rem_euclid(TAU);
                // rem_euclid can round up to exactly TAU for tiny negative input
                if t >= TAU {
                    0.0
                } else {
                    t
                }
            })
            .collect();
        TorusPoint { angles }
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn coordinates(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&a| Complex64::cis(a)).collect()
    }
}

/// Sums coefficients per monomial while remembering whether a collision
/// happened, so cancellation residue can be recognized afterwards.
#[derive(Default)]
struct TermAccumulator {
    terms: BTreeMap<Exponents, (Complex64, f64, bool)>,
}

impl TermAccumulator {
    fn push(&mut self, exps: Exponents, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let mag = c.norm();
        self.terms
            .entry(exps)
            .and_modify(|(sum, max_addend, collided)| {
                *sum += c;
                *max_addend = max_addend.max(mag);
                *collided = true;
            })
            .or_insert((c, mag, false));
    }

    fn finish(self, nvars: usize) -> Polynomial {
        let largest = self
            .terms
            .values()
            .map(|(s, _, _)| s.norm())
            .fold(0.0, f64::max);
        let terms = self
            .terms
            .into_iter()
            .filter(|(_, (sum, max_addend, collided))| {
                let m = sum.norm();
                if m == 0.0 {
                    return false;
                }
                !(*collided && m <= RESIDUE_RTOL * max_addend.max(largest))
            })
            .map(|(e, (sum, _, _))| (e, sum))
            .collect();
        Polynomial { nvars, terms }
    }
}

impl Polynomial {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars >= 1, "a polynomial needs at least one variable");
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<Complex64>) -> Self {
        Self::monomial(nvars, vec![0; nvars], c).expect("exponent length matches")
    }

    /// The coordinate function `x_{index+1}`.
    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[index] = 1;
        Self::monomial(nvars, e, 1.0).expect("exponent length matches")
    }

    pub fn monomial(nvars: usize, exps: Exponents, c: impl Into<Complex64>) -> Result<Self> {
        Self::from_terms(nvars, [(exps, c.into())])
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// repeated monomials.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponents, Complex64)>,
    {
        if nvars == 0 {
            return Err(Error::InvalidParameter("nvars must be positive".into()));
        }
        let mut acc = TermAccumulator::default();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite coefficient {c}"
                )));
            }
            acc.push(e, c);
        }
        Ok(acc.finish(nvars))
    }

    /// Univariate polynomial from ascending real coefficients.
    pub fn from_real_coeffs(coeffs: &[f64]) -> Self {
        Self::from_complex_coeffs(
            &coeffs
                .iter()
                .map(|&c| Complex64::new(c, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Univariate polynomial from ascending complex coefficients.
    pub fn from_complex_coeffs(coeffs: &[Complex64]) -> Self {
        Self::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (vec![k as u64], c)),
        )
        .expect("univariate terms are well formed")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u64]) -> Complex64 {
        self.terms
            .get(exps)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// True for `a·x^k` with a single stored term (constants included).
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Indices of the variables that occur with a positive exponent.
    pub fn used_variables(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&j| self.terms.keys().any(|e| e[j] > 0))
            .collect()
    }

    /// Keeps only the listed variables, which must include every variable
    /// the polynomial uses.
    pub fn restrict_to(&self, vars: &[usize]) -> Result<Self> {
        if vars.is_empty() || vars.iter().any(|&v| v >= self.nvars) {
            return Err(Error::InvalidParameter(
                "variable selection out of range".into(),
            ));
        }
        let dropped_used = self
            .used_variables()
            .into_iter()
            .any(|v| !vars.contains(&v));
        if dropped_used {
            return Err(Error::InvalidParameter(
                "cannot drop a variable the polynomial uses".into(),
            ));
        }
        Ok(Polynomial {
            nvars: vars.len(),
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (vars.iter().map(|&v| e[v]).collect(), c))
                .collect(),
        })
    }

    /// Re-embeds into `nvars >= self.nvars()` variables; new variables do
    /// not occur.
    pub fn lift(&self, nvars: usize) -> Result<Self> {
        if nvars < self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: nvars,
            });
        }
        Ok(Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| {
                    let mut e = e.clone();
                    e.resize(nvars, 0);
                    (e, c)
                })
                .collect(),
        })
    }

    pub fn evaluate(&self, p: &TorusPoint) -> Result<Complex64> {
        if p.dim() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: p.dim(),
            });
        }
        Ok(self.eval_angles(p.angles()))
    }

    /// Evaluates at the torus point with the given angles. The caller
    /// guarantees `angles.len() == nvars`.
    pub fn eval_angles(&self, angles: &[f64]) -> Complex64 {
        debug_assert_eq!(angles.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, &c)| {
                let phase: f64 = e.iter().zip(angles).map(|(&k, &a)| k as f64 * a).sum();
                c * Complex64::cis(phase)
            })
            .sum()
    }

    /// Evaluates at an arbitrary complex point (not necessarily on the torus).
    pub fn eval_complex(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: z.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(z)
                    .fold(c, |acc, (&k, &zj)| acc * zj.powu(k as u32))
            })
            .sum())
    }

    /// The univariate specialization `P(x^{r_1}, …, x^{r_n})`.
    pub fn specialize(&self, r: &[u64]) -> Result<Self> {
        if r.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: r.len(),
            });
        }
        if r.contains(&0) {
            return Err(Error::InvalidParameter(
                "specialization exponents must be positive".into(),
            ));
        }
        let mut acc = TermAccumulator::default();
        for (e, &c) in &self.terms {
            let mut d: u64 = 0;
            for (&k, &rj) in e.iter().zip(r) {
                d = k
                    .checked_mul(rj)
                    .and_then(|v| d.checked_add(v))
                    .ok_or_else(|| {
                        Error::InvalidParameter("specialized degree overflows u64".into())
                    })?;
            }
            acc.push(vec![d], c);
        }
        Ok(acc.finish(1))
    }

    /// Number of nonzero coefficients.
    pub fn nonzero_coefficient_count(&self) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self.terms.len())
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Result<Self> {
        let c = c.into();
        if c == Complex64::new(0.0, 0.0) || !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::InvalidParameter(
                "scale factor must be finite and nonzero".into(),
            ));
        }
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, &a)| (e.clone(), a * c)))
    }

    pub fn min_coeff_modulus(&self) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self.terms.values().map(|c| c.norm()).fold(f64::INFINITY, f64::min))
    }

    /// Degree of a univariate polynomial; `None` for zero.
    pub fn degree(&self) -> Result<Option<u64>> {
        self.require_univariate()?;
        Ok(self.terms.keys().map(|e| e[0]).max())
    }

    /// Coefficient of the highest power of a univariate polynomial.
    pub fn leading_coefficient(&self) -> Result<Complex64> {
        self.require_univariate()?;
        self.terms
            .iter()
            .next_back()
            .map(|(_, &c)| c)
            .ok_or(Error::ZeroPolynomial)
    }

    /// Dense ascending coefficient vector of a univariate polynomial.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let deg = self.degree()?.ok_or(Error::ZeroPolynomial)?;
        let len = usize::try_from(deg)
            .ok()
            .and_then(|d| d.checked_add(1))
            .ok_or_else(|| Error::InvalidParameter("degree too large".into()))?;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (e, &c) in &self.terms {
            out[e[0] as usize] = c;
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn require_univariate(&self) -> Result<()> {
        if self.nvars != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.nvars,
            });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let nvars = self.nvars.max(other.nvars);
        let a = self.lift(nvars).expect("lift to larger dimension");
        let b = other.lift(nvars).expect("lift to larger dimension");
        let mut acc = TermAccumulator::default();
        for (e, &c) in a.terms.iter() {
            acc.push(e.clone(), c);
        }
        for (e, &c) in b.terms.iter() {
            acc.push(e.clone(), c * sign);
        }
        acc.finish(nvars)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, -1.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let nvars = self.nvars.max(rhs.nvars);
        let a = self.lift(nvars).expect("lift to larger dimension");
        let b = rhs.lift(nvars).expect("lift to larger dimension");
        let mut acc = TermAccumulator::default();
        for (ea, &ca) in &a.terms {
            for (eb, &cb) in &b.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                acc.push(e, ca * cb);
            }
        }
        acc.finish(nvars)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_poly(self))
    }
}

/// Error-free transformation `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free transformation `a·b = p + e`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Complex product with its rounding error folded into one term.
#[inline]
fn two_prod_c(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(x.re, y.re);
    let (p2, e2) = two_prod(x.im, y.im);
    let (p3, e3) = two_prod(x.re, y.im);
    let (p4, e4) = two_prod(x.im, y.re);
    let (re, e5) = two_sum(p1, -p2);
    let (im, e6) = two_sum(p3, p4);
    (
        Complex64::new(re, im),
        Complex64::new(e1 - e2 + e5, e3 + e4 + e6),
    )
}

/// Compensated Horner scheme: the result is as accurate as plain Horner in
/// twice the working precision. `coeffs[k]` multiplies `z^k`.
pub fn horner_compensated(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let Some((&last, rest)) = coeffs.split_last() else {
        return Complex64::new(0.0, 0.0);
    };
    let mut s = last;
    let mut r = Complex64::new(0.0, 0.0);
    for &a in rest.iter().rev() {
        let (p, pe) = two_prod_c(s, z);
        let (re, se_re) = two_sum(p.re, a.re);
        let (im, se_im) = two_sum(p.im, a.im);
        s = Complex64::new(re, im);
        r = r * z + pe + Complex64::new(se_re, se_im);
    }
    s + r
}

#[derive(Debug, Clone)]
enum Layout {
    Sparse { exps: Vec<f64>, coeffs: Vec<Complex64> },
    /// Univariate and not too sparse: dense coefficients for compensated
    /// Horner, which keeps `|P|` accurate next to multiple roots.
    Dense(Vec<Complex64>),
}

/// Precomputed term table for fast repeated evaluation on the torus.
#[derive(Debug, Clone)]
pub struct Evaluator {
    nvars: usize,
    layout: Layout,
}

impl Evaluator {
    pub fn new(p: &Polynomial) -> Self {
        if p.nvars == 1 {
            let degree = p.terms.keys().map(|e| e[0]).max().unwrap_or(0) as usize;
            if degree < 4 * p.terms.len() + 32 {
                let mut dense = vec![Complex64::new(0.0, 0.0); degree + 1];
                for (e, &c) in &p.terms {
                    dense[e[0] as usize] = c;
                }
                return Evaluator {
                    nvars: 1,
                    layout: Layout::Dense(dense),
                };
            }
        }
        let mut exps = Vec::with_capacity(p.terms.len() * p.nvars);
        let mut coeffs = Vec::with_capacity(p.terms.len());
        for (e, &c) in &p.terms {
            exps.extend(e.iter().map(|&k| k as f64));
            coeffs.push(c);
        }
        Evaluator {
            nvars: p.nvars,
            layout: Layout::Sparse { exps, coeffs },
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval(&self, angles: &[f64]) -> Complex64 {
        debug_assert_eq!(angles.len(), self.nvars);
        match &self.layout {
            Layout::Dense(c) => horner_compensated(c, Complex64::cis(angles[0])),
            Layout::Sparse { exps, coeffs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (row, &c) in exps.chunks_exact(self.nvars).zip(coeffs) {
                    let phase: f64 = row.iter().zip(angles).map(|(k, a)| k * a).sum();
                    let (s, co) = phase.sin_cos();
                    acc += c * Complex64::new(co, s);
                }
                acc
            }
        }
    }

    /// `log|P|`, with `|P|` floored at the smallest normal double so exact
    /// zeros stay finite.
    pub fn log_abs(&self, angles: &[f64]) -> f64 {
        self.eval(angles).norm().max(f64::MIN_POSITIVE).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_poly;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn p(s: &str) -> Polynomial {
        parse_poly(s).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let v = p("1 + x + y").evaluate(&TorusPoint::new(vec![0.0, 0.0])).unwrap();
        assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-15);

        let v = p("x - y").evaluate(&TorusPoint::new(vec![1.3, 1.3])).unwrap();
        assert!(v.norm() < 1e-15);

        let v = p("x^2 + x + 1")
            .evaluate(&TorusPoint::new(vec![2.0 * PI / 3.0]))
            .unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let err = p("1 + x + y").evaluate(&TorusPoint::new(vec![0.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn specialize_examples() {
        assert_eq!(p("1 + x + y").specialize(&[1, 2]).unwrap(), p("1 + x + x^2"));
        assert_eq!(p("x*y - x").specialize(&[2, 3]).unwrap(), p("x^5 - x^2"));
        let z = p("x - y").specialize(&[1, 1]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.nvars(), 1);
        assert!(p("x - y").specialize(&[1]).is_err());
        assert!(p("x - y").specialize(&[1, 0]).is_err());
    }

    #[test]
    fn specialization_drops_cancellation_residue() {
        // 0.1 + 0.2 - 0.3 is not exactly zero in binary floating point
        let q = Polynomial::from_terms(
            3,
            [
                (vec![1, 0, 0], Complex64::new(0.1, 0.0)),
                (vec![0, 1, 0], Complex64::new(0.2, 0.0)),
                (vec![0, 0, 1], Complex64::new(-0.3, 0.0)),
                (vec![0, 0, 0], Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let s = q.specialize(&[1, 1, 1]).unwrap();
        assert_eq!(s.nonzero_coefficient_count().unwrap(), 1);
        // an isolated small coefficient is not residue
        let small = p("1e-20 + x");
        assert_eq!(small.nonzero_coefficient_count().unwrap(), 2);
    }

    #[test]
    fn coefficient_count_examples() {
        assert_eq!(p("1 + x + x^2").nonzero_coefficient_count().unwrap(), 3);
        assert_eq!(p("x^5 - x^2").nonzero_coefficient_count().unwrap(), 2);
        assert_eq!(p("7").nonzero_coefficient_count().unwrap(), 1);
        assert_eq!(
            Polynomial::zero(2).nonzero_coefficient_count(),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn scale_and_min_modulus() {
        assert_eq!(p("x - 1").scale(2.0).unwrap(), p("2*x - 2"));
        let q = p("(2+1i)*x*y^3 - 0.5*y + 3");
        assert_eq!(q.scale(1.0).unwrap(), q);
        assert!(q.scale(0.0).is_err());

        assert_eq!(p("x - 2").min_coeff_modulus().unwrap(), 1.0);
        assert_eq!(p("0.5*x + 3").min_coeff_modulus().unwrap(), 0.5);
        assert_eq!(p("2*x - 2").min_coeff_modulus().unwrap(), 2.0);

        let m = q.min_coeff_modulus().unwrap();
        let n = q.scale(1.0 / m).unwrap();
        assert!((n.min_coeff_modulus().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn restrict_and_lift() {
        let q = p("1 + z");
        assert_eq!(q.used_variables(), vec![2]);
        let r = q.restrict_to(&[2]).unwrap();
        assert_eq!(r, p("1 + x"));
        assert!(q.restrict_to(&[0]).is_err());
        assert_eq!(r.lift(3).unwrap().used_variables(), vec![0]);
    }

    #[test]
    fn arithmetic() {
        let a = p("1 + x");
        assert_eq!(&a * &a, p("1 + 2*x + x^2"));
        assert_eq!(a.pow(3), p("1 + 3*x + 3*x^2 + x^3"));
        assert!((&a - &a).is_zero());
        assert_eq!(-&a, p("-1 - x"));
        // mixed dimension operands are lifted
        assert_eq!(&a + &p("y"), p("1 + x + y"));
    }

    fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(
            (
                prop::collection::vec(0u64..5, nvars),
                -5.0f64..5.0,
                -5.0f64..5.0,
            ),
            1..6,
        )
        .prop_map(move |ts| {
            Polynomial::from_terms(
                nvars,
                ts.into_iter().map(|(e, re, im)| (e, Complex64::new(re, im))),
            )
            .unwrap()
        })
    }

    #[test]
    fn evaluator_accurate_near_double_root() {
        let ev = Evaluator::new(&p("(x - 1)^2"));
        for &t in &[1e-3, 1e-6, 1e-9, 1e-12] {
            let exact = 4.0 * (t / 2.0f64).sin().powi(2);
            let got = ev.eval(&[t]).norm();
            assert!(((got - exact) / exact).abs() < 1e-6, "{t}: {got} vs {exact}");
        }
        // the plain sum cancels to nothing
        assert_eq!(p("(x - 1)^2").eval_angles(&[1e-9]).norm(), 0.0);
    }

    #[test]
    fn evaluator_matches_direct_evaluation() {
        for s in ["1 + x + y", "x^2 - 3*x + (1+2i)", "1 + x^500", "2*x1*x2^3 - x3"] {
            let q = p(s);
            let ev = Evaluator::new(&q);
            for k in 0..20 {
                let a: Vec<f64> = (0..q.nvars()).map(|j| 0.37 * (k * (j + 1)) as f64).collect();
                assert!((ev.eval(&a) - q.eval_angles(&a)).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn specialization_commutes_with_evaluation(
            q in arb_poly(3),
            r in prop::collection::vec(1u64..8, 3),
            theta in 0.0f64..TAU,
        ) {
            let s = q.specialize(&r).unwrap();
            let lhs = s.eval_angles(&[theta]);
            let angles: Vec<f64> = r.iter().map(|&k| k as f64 * theta).collect();
            let rhs = q.eval_angles(&angles);
            let scale: f64 = q.terms().map(|(_, c)| c.norm()).sum();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn specialization_never_adds_terms(
            q in arb_poly(2),
            r in prop::collection::vec(1u64..4, 2),
        ) {
            let s = q.specialize(&r).unwrap();
            if !q.is_zero() {
                prop_assert!(s.terms().len() <= q.nonzero_coefficient_count().unwrap());
            }
        }

        #[test]
        fn specialization_is_linear(
            a in arb_poly(2),
            b in arb_poly(2),
            r in prop::collection::vec(1u64..6, 2),
            theta in 0.0f64..TAU,
        ) {
            let lhs = (&a + &b).specialize(&r).unwrap();
            let rhs = &a.specialize(&r).unwrap() + &b.specialize(&r).unwrap();
            // compare values: term sets may differ only by dropped residue
            let scale: f64 = a.terms().chain(b.terms()).map(|(_, c)| c.norm()).sum();
            let d = lhs.eval_angles(&[theta]) - rhs.eval_angles(&[theta]);
            prop_assert!(d.norm() <= 1e-12 * scale.max(1.0));
        }
    }
}
