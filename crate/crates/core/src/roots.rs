//! All complex roots of a univariate polynomial.
//!
//! Roots are refined simultaneously with the Aberth–Ehrlich iteration,
//! started from points on circles whose radii come from the Newton polygon
//! of the coefficient moduli. A root counts as converged once its relative
//! backward error `|P(z)| / Σ|a_k||z|^k` is at most `tol`. Approximations
//! whose inclusion discs overlap, or that lie within [`CLUSTER_RADIUS`] of
//! each other, are merged into one root with multiplicity.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;
pub const CLUSTER_RADIUS: f64 = 1e-6;
const MAX_INCLUSION_RADIUS: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// Bound on the distance from `value` to the true root (cluster).
    pub error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    /// Largest relative backward error over the reported roots.
    pub residual_bound: f64,
    pub leading: Complex64,
    pub iterations: usize,
}

impl RootSet {
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// Horner evaluation of `p` and `p'` together with `Σ|a_k||z|^k`.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    let az = z.norm();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        s = s * az + c.norm();
    }
    (p, dp, s)
}

/// Newton correction `p(z)/p'(z)` and relative backward error at `z`.
///
/// Outside the unit disc the reversed polynomial is evaluated at `1/z` to
/// avoid overflow for high degrees.
fn newton_ratio(coeffs: &[Complex64], rev: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let n = (coeffs.len() - 1) as f64;
    if z.norm() <= 1.0 {
        let (p, dp, s) = horner(coeffs, z);
        (p / dp, p.norm() / s)
    } else {
        let w = z.inv();
        let (q, dq, s) = horner(rev, w);
        // p/p' = z q(w) / (n q(w) - w q'(w))
        (z * q / (q * n - w * dq), q.norm() / s)
    }
}

/// Starting points on the circles prescribed by the upper convex hull of
/// `(k, log|a_k|)`.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();

    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the segment a -> p
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let sigma = 0.7;
    let mut out = Vec::with_capacity(n);
    for win in hull.windows(2) {
        let (k0, l0) = win[0];
        let (k1, l1) = win[1];
        let count = k1 - k0;
        let radius = ((l0 - l1) / count as f64).exp();
        for j in 0..count {
            let angle = TAU * j as f64 / count as f64 + TAU * k0 as f64 / n as f64 + sigma;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    out
}

fn aberth(coeffs: &[Complex64], tol: f64) -> Result<(Vec<Complex64>, usize)> {
    let n = coeffs.len() - 1;
    let rev: Vec<Complex64> = coeffs.iter().rev().copied().collect();
    let mut z = initial_guesses(coeffs);
    debug_assert_eq!(z.len(), n);

    // 0 = iterating, 1 = converged and awaiting one polishing step, 2 = frozen
    let mut state = vec![0u8; n];
    let mut worst = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        worst = 0.0;
        for i in 0..n {
            if state[i] == 2 {
                continue;
            }
            let (ratio, backward) = newton_ratio(coeffs, &rev, z[i]);
            if backward <= tol {
                state[i] += 1;
            } else {
                worst = worst.max(backward);
            }
            if state[i] == 2 && backward == 0.0 {
                continue;
            }
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
            }
        }
        if state.iter().all(|&s| s == 2) {
            return Ok((z, it));
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        backward_error: worst,
    })
}

/// A root of multiplicity `m` is a simple root of `p^{(m-1)}`; Newton on
/// that derivative recovers the cluster centre far more accurately than the
/// centroid of the individual approximations.
fn polish_cluster(coeffs: &[Complex64], centroid: Complex64, m: usize) -> Complex64 {
    let mut d: Vec<Complex64> = coeffs.to_vec();
    for _ in 1..m {
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
    }
    if d.len() < 2 {
        return centroid;
    }
    let scale = centroid.norm().max(1.0);
    let mut z = centroid;
    for _ in 0..8 {
        let (p, dp, _) = horner(&d, z);
        let step = p / dp;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    // a far jump means the cluster was not a near-multiple root after all
    if (z - centroid).norm() <= MAX_INCLUSION_RADIUS * scale {
        z
    } else {
        centroid
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut k = i;
    while parent[k] != r {
        let next = parent[k];
        parent[k] = r;
        k = next;
    }
    r
}

/// Computes every root of the univariate polynomial `p`.
pub fn roots(p: &Polynomial, tol: f64) -> Result<RootSet> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let dense = p.to_dense()?;
    let degree = dense.len() - 1;
    if degree == 0 {
        return Err(Error::InvalidParameter(
            "root finding needs degree >= 1".into(),
        ));
    }
    let leading = dense[degree];
    let zeros_at_origin = dense.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &dense[zeros_at_origin..];
    let m = reduced.len() - 1;

    let (approx, iterations) = match m {
        0 => (Vec::new(), 0),
        1 => (vec![-reduced[0] / reduced[1]], 0),
        _ => aberth(reduced, tol)?,
    };

    let gamma = 2.0 * (m.max(1) as f64) * f64::EPSILON;
    let an = reduced[m].norm();

    // Weierstrass inclusion radii
    let radii: Vec<f64> = (0..approx.len())
        .map(|i| {
            let (pv, _, s) = horner(reduced, approx[i]);
            let denom: f64 = an
                * (0..approx.len())
                    .filter(|&j| j != i)
                    .map(|j| (approx[i] - approx[j]).norm())
                    .product::<f64>();
            let r = m as f64 * (pv.norm() + gamma * s) / denom;
            // coincident approximations are merged by distance anyway
            if r.is_finite() {
                r.min(MAX_INCLUSION_RADIUS * approx[i].norm().max(1.0))
            } else {
                0.0
            }
        })
        .collect();

    let mut parent: Vec<usize> = (0..approx.len()).collect();
    for i in 0..approx.len() {
        for j in (i + 1)..approx.len() {
            let d = (approx[i] - approx[j]).norm();
            if d <= CLUSTER_RADIUS.max(radii[i] + radii[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }

    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    let mut index_of = vec![usize::MAX; approx.len()];
    for i in 0..approx.len() {
        let r = find(&mut parent, i);
        if index_of[r] == usize::MAX {
            index_of[r] = clusters.len();
            clusters.push((Complex64::new(0.0, 0.0), 0));
        }
        let c = &mut clusters[index_of[r]];
        c.0 += approx[i];
        c.1 += 1;
    }
    let mut merged: Vec<(Complex64, usize)> = clusters
        .into_iter()
        .map(|(sum, k)| {
            let c = sum / k as f64;
            (if k > 1 { polish_cluster(reduced, c, k) } else { c }, k)
        })
        .collect();
    if zeros_at_origin > 0 {
        merged.push((Complex64::new(0.0, 0.0), zeros_at_origin));
    }

    let full_gamma = 2.0 * degree as f64 * f64::EPSILON;
    let mut residual_bound: f64 = 0.0;
    let mut out = Vec::with_capacity(merged.len());
    for (i, &(c, mult)) in merged.iter().enumerate() {
        let (pv, _, s) = horner(&dense, c);
        residual_bound = residual_bound.max(pv.norm() / s);
        let others: f64 = merged
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(cj, mj))| (c - cj).norm().powi(mj as i32))
            .product();
        let bound = ((pv.norm() + full_gamma * s) / (leading.norm() * others))
            .powf(1.0 / mult as f64);
        out.push(Root {
            value: c,
            multiplicity: mult,
            error_bound: if bound.is_finite() { bound } else { f64::INFINITY },
        });
    }
    out.sort_by(|a, b| {
        let ka = (a.value.arg().rem_euclid(TAU), a.value.norm());
        let kb = (b.value.arg().rem_euclid(TAU), b.value.norm());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });

    Ok(RootSet {
        roots: out,
        residual_bound,
        leading,
        iterations,
    })
}

/// Angles in `[0, 2π)` of the roots within `band` of the unit circle, sorted.
pub fn roots_near_circle(rs: &RootSet, band: f64) -> Vec<f64> {
    let mut angles: Vec<f64> = rs
        .roots
        .iter()
        .filter(|r| (r.value.norm() - 1.0).abs() < band)
        .map(|r| {
            let a = r.value.arg().rem_euclid(TAU);
            if a >= TAU {
                0.0
            } else {
                a
            }
        })
        .collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    angles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_poly;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rs(s: &str) -> RootSet {
        roots(&parse_poly(s).unwrap(), DEFAULT_TOL).unwrap()
    }

    fn contains(set: &RootSet, z: Complex64, mult: usize, tol: f64) -> bool {
        set.roots
            .iter()
            .any(|r| (r.value - z).norm() <= tol && r.multiplicity == mult)
    }

    #[test]
    fn simple_examples() {
        let s = rs("x^2 + 1");
        assert_eq!(s.degree(), 2);
        assert!(contains(&s, Complex64::i(), 1, 1e-14));
        assert!(contains(&s, -Complex64::i(), 1, 1e-14));
    }

    #[test]
    fn triple_root_is_merged() {
        let s = rs("x^3 - 6*x^2 + 12*x - 8");
        assert_eq!(s.roots.len(), 1);
        assert_eq!(s.roots[0].multiplicity, 3);
        assert!((s.roots[0].value - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        assert!(s.roots[0].error_bound >= (s.roots[0].value - 2.0).norm());
    }

    /// Bisection on [1, 2] for the real root of Lehmer's polynomial.
    fn lehmer_real_root_oracle() -> f64 {
        let f = |x: f64| {
            [1.0, 1.0, 0.0, -1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 1.0, 1.0]
                .iter()
                .fold(0.0, |acc, &c| acc * x + c)
        };
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lehmer_polynomial_real_root() {
        let oracle = lehmer_real_root_oracle();
        assert!((oracle - 1.17628).abs() < 1e-5);
        let s = rs("x^10 + x^9 - x^7 - x^6 - x^5 - x^4 - x^3 + x + 1");
        assert_eq!(s.degree(), 10);
        assert!(contains(&s, Complex64::new(oracle, 0.0), 1, 1e-12));
    }

    #[test]
    fn zero_roots_and_linear() {
        let s = rs("x^3 - 2*x^2");
        assert_eq!(s.degree(), 3);
        assert!(contains(&s, Complex64::new(0.0, 0.0), 2, 0.0));
        assert!(contains(&s, Complex64::new(2.0, 0.0), 1, 1e-15));
        let s = rs("3*x - 6");
        assert!(contains(&s, Complex64::new(2.0, 0.0), 1, 1e-15));
    }

    #[test]
    fn errors() {
        assert!(roots(&parse_poly("5").unwrap(), 1e-12).is_err());
        assert!(roots(&Polynomial::zero(1), 1e-12).is_err());
        assert!(roots(&parse_poly("x + y").unwrap(), 1e-12).is_err());
        assert!(roots(&parse_poly("x - 1").unwrap(), 0.0).is_err());
        // unreachable backward error
        assert!(matches!(
            roots(&parse_poly("x^7 - 3*x + 1").unwrap(), 1e-40),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn near_circle_examples() {
        assert_eq!(roots_near_circle(&rs("1 + x"), 0.1).len(), 1);
        assert!((roots_near_circle(&rs("1 + x"), 0.1)[0] - PI).abs() < 1e-12);
        assert!(roots_near_circle(&rs("x - 2"), 0.1).is_empty());
        let a = roots_near_circle(&rs("x^2 + x + 1"), 0.1);
        assert_eq!(a.len(), 2);
        assert!((a[0] - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((a[1] - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn high_degree_sparse() {
        let p = parse_poly("1 + x + x^200").unwrap();
        let s = roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(s.degree(), 200);
        assert!(s.residual_bound <= DEFAULT_TOL);
    }

    #[test]
    fn deterministic() {
        let p = parse_poly("x^10 + x^9 - x^7 - x^6 - x^5 - x^4 - x^3 + x + 1").unwrap();
        assert_eq!(roots(&p, 1e-12).unwrap(), roots(&p, 1e-12).unwrap());
    }

    fn expand(set: &RootSet) -> Vec<Complex64> {
        let mut c = vec![set.leading];
        for r in &set.roots {
            for _ in 0..r.multiplicity {
                let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                for (k, &a) in c.iter().enumerate() {
                    next[k + 1] += a;
                    next[k] -= a * r.value;
                }
                c = next;
            }
        }
        c
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reconstruction(coeffs in prop::collection::vec(-10.0f64..10.0, 2..14)) {
            prop_assume!(coeffs.last().unwrap().abs() > 1e-3);
            let p = Polynomial::from_real_coeffs(&coeffs);
            let set = roots(&p, DEFAULT_TOL).unwrap();
            prop_assert_eq!(set.degree(), coeffs.len() - 1);
            let back = expand(&set);
            let scale = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
            for (k, &c) in coeffs.iter().enumerate() {
                prop_assert!((back[k] - c).norm() <= 1e-8 * scale,
                    "coefficient {} differs: {} vs {}", k, back[k], c);
            }
        }
    }
}
