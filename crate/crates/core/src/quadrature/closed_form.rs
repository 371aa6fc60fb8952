//! Closed forms of `J_{ℓ,δ}(y) = (-1)^ℓ ∫₀^y log^ℓ z d(z^δ)` and of
//! `I_{ℓ,k}(y) = J_{ℓ,1/(k-1)}(y)`, the tail integrals that bound the
//! contribution of a sublevel set to a singular log-integral.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JParams {
    pub ell: u32,
    pub delta: f64,
    pub y: f64,
}

impl JParams {
    pub fn new(ell: u32, delta: f64, y: f64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("ell must be positive".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        if !(y > 0.0 && y <= 1.0) {
            return Err(Error::InvalidParameter("y must lie in (0, 1]".into()));
        }
        Ok(JParams { ell, delta, y })
    }
}

/// `y^δ Σ_{m=0}^{ℓ} ℓ!/((ℓ-m)! δ^m) (-log y)^{ℓ-m}`, accumulated by Horner
/// in `-log y`.
pub fn j_closed_form(p: &JParams) -> f64 {
    let l = -p.y.ln();
    let mut coeff = 1.0;
    let mut acc = 1.0;
    for m in 1..=p.ell {
        coeff *= (p.ell - m + 1) as f64 / p.delta;
        acc = acc * l + coeff;
    }
    p.y.powf(p.delta) * acc
}

/// `y^δ (ℓ+1)! max(1/δ, -log y)^ℓ`, an upper bound for `J_{ℓ,δ}(y)`.
pub fn j_upper_bound(p: &JParams) -> f64 {
    let fact: f64 = (1..=p.ell + 1).map(|k| k as f64).product();
    p.y.powf(p.delta) * fact * (1.0 / p.delta).max(-p.y.ln()).powi(p.ell as i32)
}

pub fn i_closed_form(ell: u32, k: u32, y: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "k must be at least 2 (number of nonzero coefficients)".into(),
        ));
    }
    let p = JParams::new(ell, 1.0 / (k - 1) as f64, y)?;
    Ok(j_closed_form(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_interval;

    /// Tanh-sinh quadrature of `∫₀^{y^δ} (-ln u / δ)^ℓ du`, the same integral
    /// after substituting `u = z^δ`.
    fn tanh_sinh_oracle(p: &JParams) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        let upper = p.y.powf(p.delta);
        let f = |u: f64| (-u.ln() / p.delta).powi(p.ell as i32);
        let h = 1.0 / 64.0;
        let mut sum = 0.0;
        for k in -400i32..=400 {
            let t = k as f64 * h;
            let s = FRAC_PI_2 * t.sinh();
            // u = upper·(1 + tanh s)/2, written to keep precision near 0
            let u = upper / (1.0 + (-2.0 * s).exp());
            let w = FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
            if u > 0.0 && w > 0.0 {
                sum += w * f(u);
            }
        }
        sum * h * 0.5 * upper
    }

    fn grid() -> Vec<JParams> {
        let mut out = Vec::new();
        for ell in 1..=4 {
            for &delta in &[1.0, 0.5, 1.0 / 3.0] {
                for e in 1..=6 {
                    out.push(JParams::new(ell, delta, 10f64.powi(-e)).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn examples() {
        assert_eq!(j_closed_form(&JParams::new(1, 1.0, 1.0).unwrap()), 1.0);
        assert_eq!(j_closed_form(&JParams::new(2, 0.5, 1.0).unwrap()), 8.0);
        let v = j_closed_form(&JParams::new(1, 1.0, 0.5).unwrap());
        assert!((v - 0.5 * (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((v - 0.846_574).abs() < 1e-6);

        assert_eq!(i_closed_form(1, 2, 1.0).unwrap(), 1.0);
        assert_eq!(i_closed_form(2, 3, 1.0).unwrap(), 8.0);
        // -∫₀^0.1 log³z dz
        let oracle = tanh_sinh_oracle(&JParams::new(3, 1.0, 0.1).unwrap());
        let v = i_closed_form(3, 2, 0.1).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-10, "{v} vs {oracle}");
        assert!((v - 4.792_927).abs() < 1e-5);
    }

    #[test]
    fn errors() {
        assert!(i_closed_form(1, 1, 0.5).is_err());
        assert!(JParams::new(0, 1.0, 0.5).is_err());
        assert!(JParams::new(1, 0.0, 0.5).is_err());
        assert!(JParams::new(1, 1.0, 1.5).is_err());
        assert!(JParams::new(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn agrees_with_independent_quadrature() {
        for p in grid() {
            let closed = j_closed_form(&p);
            let oracle = tanh_sinh_oracle(&p);
            assert!(((closed - oracle) / oracle).abs() < 1e-9, "{p:?}: {closed} vs {oracle}");

            // the adaptive engine, integrating against u = z^δ directly
            let r = integrate_interval(
                |u: f64| (-u.ln() / p.delta).powi(p.ell as i32),
                0.0,
                p.y.powf(p.delta),
                &[],
                0.0,
                1e-11,
                60,
            )
            .unwrap();
            assert!(((closed - r.value) / closed).abs() < 1e-8, "{p:?}: {closed} vs {}", r.value);
        }
    }

    #[test]
    fn bounded_and_vanishing() {
        for ell in 1..=4 {
            for &delta in &[1.0, 0.5, 1.0 / 3.0] {
                let mut prev = f64::INFINITY;
                for e in 1..=6 {
                    let p = JParams::new(ell, delta, 10f64.powi(-e)).unwrap();
                    let j = j_closed_form(&p);
                    assert!(j >= 0.0 && j <= j_upper_bound(&p), "{p:?}");
                    assert!(j < prev, "{p:?} not decreasing");
                    prev = j;
                }
            }
        }
    }
}
