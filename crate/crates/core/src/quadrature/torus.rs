//! Randomly shifted Kronecker point sets on the n-torus.
//!
//! Each randomization integrates over `{ frac(u + i·α) : 0 ≤ i < N }` where
//! `α` is the generalized golden-ratio vector (the R_d sequence) and `u` is
//! a uniform shift drawn from a ChaCha stream of the seed. Points are held
//! in 64-bit fixed point so the recurrence is exact.

use std::f64::consts::TAU;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jensen::{MeasureResult, Method};

use super::QuadConfig;

const CHUNK: u64 = 4096;
const MAX_DIM: usize = 6;

/// Fixed-point generator `α_j = frac(φ_n^{-j})`, where `φ_n` is the positive
/// root of `x^{n+1} = x + 1`.
pub fn kronecker_generator(n: usize) -> Vec<u64> {
    let mut phi = 2.0f64;
    for _ in 0..200 {
        phi = (1.0 + phi).powf(1.0 / (n as f64 + 1.0));
    }
    (1..=n)
        .map(|j| {
            let a = phi.powi(-(j as i32)).fract();
            (a * 18_446_744_073_709_551_616.0) as u64
        })
        .collect()
}

#[inline]
fn fixed_to_angle(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * TAU
}

/// Mean of `f` over `𝕋ⁿ` (angles in `[0, 2π)`), by randomized QMC.
pub fn integrate_torus_qmc<F>(f: F, n: usize, cfg: &QuadConfig) -> Result<MeasureResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "torus dimension must be in 1..={MAX_DIM}, got {n}"
        )));
    }
    let alpha = kronecker_generator(n);
    let shifts: Vec<Vec<u64>> = (0..cfg.randomizations)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            (0..n).map(|_| rng.next_u64()).collect()
        })
        .collect();

    let n_samples = cfg.qmc_samples;
    let chunks = n_samples.div_ceil(CHUNK);
    let jobs: Vec<(usize, u64)> = (0..shifts.len())
        .flat_map(|k| (0..chunks).map(move |c| (k, c)))
        .collect();

    let partial: Vec<std::result::Result<f64, Vec<f64>>> = jobs
        .par_iter()
        .map(|&(k, c)| {
            let shift = &shifts[k];
            let mut angles = vec![0.0; n];
            let mut sum = 0.0;
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n_samples);
            for i in start..end {
                for j in 0..n {
                    angles[j] = fixed_to_angle(shift[j].wrapping_add(i.wrapping_mul(alpha[j])));
                }
                let v = f(&angles);
                if !v.is_finite() {
                    return Err(angles);
                }
                sum += v;
            }
            Ok(sum)
        })
        .collect();

    let mut means = vec![0.0; shifts.len()];
    for (&(k, _), p) in jobs.iter().zip(partial) {
        match p {
            Ok(s) => means[k] += s,
            Err(at) => return Err(Error::NonFinite { at }),
        }
    }
    for m in &mut means {
        *m /= n_samples as f64;
    }
    let r = means.len() as f64;
    let mean = means.iter().sum::<f64>() / r;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);

    Ok(MeasureResult {
        value: mean,
        error_estimate: var.sqrt(),
        method: Method::TorusQmc,
        effort: n_samples * shifts.len() as u64,
        seed: Some(cfg.seed),
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_interval;
    use num_complex::Complex64;

    fn small() -> QuadConfig {
        QuadConfig {
            qmc_samples: 1 << 14,
            randomizations: 8,
            ..Default::default()
        }
    }

    #[test]
    fn constant_integrand() {
        for n in 1..=4 {
            let r = integrate_torus_qmc(|_| 1.0, n, &small()).unwrap();
            assert_eq!(r.value, 1.0);
            assert_eq!(r.error_estimate, 0.0);
        }
    }

    #[test]
    fn log_of_unimodular_coordinate() {
        let r = integrate_torus_qmc(|a| Complex64::cis(a[0]).norm().ln(), 2, &small()).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    /// Tensor-product 1-D adaptive quadrature oracle for `log|3 + z₁ + z₂|`.
    #[test]
    fn matches_tensor_oracle() {
        let inner = |t1: f64| {
            integrate_interval(
                |t2: f64| (3.0 + Complex64::cis(t1) + Complex64::cis(t2)).norm().ln(),
                0.0,
                TAU,
                &[],
                1e-12,
                0.0,
                40,
            )
            .unwrap()
            .value
                / TAU
        };
        let oracle = integrate_interval(inner, 0.0, TAU, &[], 1e-10, 0.0, 40).unwrap().value / TAU;
        // 3 + z₁ + z₂ has no zeros on the closed bidisc, so the mean is log 3
        assert!((oracle - 3f64.ln()).abs() < 1e-9, "{oracle}");

        let f = |a: &[f64]| (3.0 + Complex64::cis(a[0]) + Complex64::cis(a[1])).norm().ln();
        let r = integrate_torus_qmc(f, 2, &QuadConfig::default()).unwrap();
        assert!((r.value - oracle).abs() < 1e-3, "{} vs {}", r.value, oracle);
        assert!((r.value - oracle).abs() <= 3.0 * r.error_estimate + 1e-9);
    }

    #[test]
    fn seed_deterministic() {
        let f = |a: &[f64]| (1.0 + Complex64::cis(a[0]) + Complex64::cis(a[1])).norm().ln();
        let a = integrate_torus_qmc(f, 2, &small()).unwrap();
        let b = integrate_torus_qmc(f, 2, &small()).unwrap();
        assert_eq!(a, b);
        let c = integrate_torus_qmc(f, 2, &small().with_seed(7)).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn dimension_checks() {
        assert!(integrate_torus_qmc(|_| 0.0, 0, &small()).is_err());
        assert!(integrate_torus_qmc(|_| 0.0, 7, &small()).is_err());
        assert!(matches!(
            integrate_torus_qmc(|_| f64::INFINITY, 1, &small()),
            Err(Error::NonFinite { .. })
        ));
    }
}
