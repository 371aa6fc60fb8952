//! Monte Carlo estimates over sublevel sets `S(P, y) = {|P| < y}` of the
//! torus, measured in un-normalized Lebesgue measure (total mass `(2π)ⁿ`).
//!
//! Samples are drawn in fixed blocks; block `b` uses ChaCha stream `b` of
//! the seed, so results do not depend on how blocks are scheduled.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jensen::{MeasureResult, Method};
use crate::poly::{Evaluator, Polynomial};

const BLOCK: u64 = 1 << 16;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;

/// `10^{-1}, 10^{-1.5}, …, 10^{-4}`.
pub fn default_y_grid() -> Vec<f64> {
    (2..=8).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelEstimate {
    pub y: f64,
    pub measure_est: f64,
    pub ci_halfwidth: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelFit {
    pub c_hat: f64,
    pub delta_hat: f64,
    /// The grid points actually used (those with a nonzero estimate).
    pub y_grid: Vec<f64>,
    /// Root-mean-square residual on the log scale.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetMode {
    Union,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrandKind {
    Product,
    Max,
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    sum: f64,
    sum_sq: f64,
}

/// Sums `f` and `f²` over `samples` uniform points of `[0, 2π)ⁿ`.
fn monte_carlo<F>(n: usize, samples: u64, seed: u64, f: F) -> Stats
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<Stats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut angles = vec![0.0; n];
            let mut s = Stats::default();
            let count = BLOCK.min(samples - b * BLOCK);
            for _ in 0..count {
                for a in angles.iter_mut() {
                    *a = rng.random::<f64>() * TAU;
                }
                let v = f(&angles);
                s.sum += v;
                s.sum_sq += v * v;
            }
            s
        })
        .collect();
    partial.iter().fold(Stats::default(), |acc, s| Stats {
        sum: acc.sum + s.sum,
        sum_sq: acc.sum_sq + s.sum_sq,
    })
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    Ok(())
}

/// `μₙ(S(P, y))` with a 95% Agresti–Coull interval.
pub fn sublevel_measure(p: &Polynomial, y: f64, samples: u64, seed: u64) -> Result<SublevelEstimate> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidParameter("y must be positive".into()));
    }
    check_samples(samples)?;
    let ev = Evaluator::new(p);
    let stats = monte_carlo(p.nvars(), samples, seed, |a| {
        if ev.eval(a).norm() < y {
            1.0
        } else {
            0.0
        }
    });
    let n = samples as f64;
    let z2 = Z95 * Z95;
    let n_tilde = n + z2;
    let p_tilde = (stats.sum + z2 / 2.0) / n_tilde;
    let half = Z95 * (p_tilde * (1.0 - p_tilde) / n_tilde).sqrt();
    let mass = TAU.powi(p.nvars() as i32);
    Ok(SublevelEstimate {
        y,
        measure_est: stats.sum / n * mass,
        ci_halfwidth: half * mass,
        samples,
        seed,
    })
}

fn check_decreasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|&y| !(y > 0.0 && y.is_finite())) || grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "y grid must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Least-squares fit of `μ(S(P, y)) ≈ c·y^δ` on the log–log scale. Grid
/// points whose estimate is zero are dropped.
pub fn fit_sublevel_exponent(
    p: &Polynomial,
    y_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<SublevelFit> {
    check_decreasing(y_grid)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut used = Vec::new();
    for &y in y_grid {
        let est = sublevel_measure(p, y, samples, seed)?;
        if est.measure_est > 0.0 {
            xs.push(y.ln());
            ys.push(est.measure_est.ln());
            used.push(y);
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            need: 3,
            have: xs.len(),
        });
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(SublevelFit {
        c_hat: intercept.exp(),
        delta_hat: slope,
        y_grid: used,
        residual,
    })
}

fn check_singular_inputs(polys: &[Polynomial], y: f64) -> Result<usize> {
    if polys.is_empty() {
        return Err(Error::InvalidParameter("no polynomials given".into()));
    }
    for p in polys {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if p.min_coeff_modulus()? < 1.0 {
            return Err(Error::Precondition(format!(
                "every coefficient must have modulus >= 1 (in {p})"
            )));
        }
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Precondition("y must lie in (0, 1]".into()));
    }
    Ok(polys.iter().map(Polynomial::nvars).max().unwrap_or(1))
}

/// `∫` over the union or intersection of the `S(P_i, y)` of `Π log|P_i|` or
/// `max log|P_i|`, in un-normalized measure. The error estimate is the
/// Monte Carlo standard error.
pub fn singular_log_integral(
    polys: &[Polynomial],
    y: f64,
    mode: SetMode,
    kind: IntegrandKind,
    samples: u64,
    seed: u64,
) -> Result<MeasureResult> {
    let n = check_singular_inputs(polys, y)?;
    check_samples(samples)?;
    let lifted = polys.iter().map(|p| p.lift(n)).collect::<Result<Vec<_>>>()?;
    let evs: Vec<Evaluator> = lifted.iter().map(Evaluator::new).collect();
    let stats = monte_carlo(n, samples, seed, |a| {
        let mut inside_any = false;
        let mut inside_all = true;
        let mut prod = 1.0;
        let mut max = f64::NEG_INFINITY;
        for ev in &evs {
            let v = ev.eval(a).norm();
            let inside = v < y;
            inside_any |= inside;
            inside_all &= inside;
            let l = v.max(f64::MIN_POSITIVE).ln();
            prod *= l;
            max = max.max(l);
        }
        let in_set = match mode {
            SetMode::Union => inside_any,
            SetMode::Intersection => inside_all,
        };
        match (in_set, kind) {
            (false, _) => 0.0,
            (true, IntegrandKind::Product) => prod,
            (true, IntegrandKind::Max) => max,
        }
    });
    let nn = samples as f64;
    let mean = stats.sum / nn;
    let var = if samples > 1 {
        ((stats.sum_sq - nn * mean * mean) / (nn - 1.0)).max(0.0)
    } else {
        0.0
    };
    let mass = TAU.powi(n as i32);
    Ok(MeasureResult {
        value: mean * mass,
        error_estimate: (var / nn).sqrt() * mass,
        method: Method::MonteCarlo,
        effort: samples,
        seed: Some(seed),
        converged: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingRow {
    pub y: f64,
    pub estimate: f64,
    /// 95% half-width.
    pub ci: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingReport {
    pub mode: SetMode,
    pub kind: IntegrandKind,
    pub seed: u64,
    pub rows: Vec<VanishingRow>,
}

impl VanishingReport {
    /// Whether `|estimate|` is non-increasing along the grid up to the
    /// confidence intervals.
    pub fn decreasing_within_ci(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].estimate.abs() <= w[0].estimate.abs() + w[0].ci + w[1].ci)
    }

    /// Whether the last row is below `threshold` in magnitude.
    pub fn ends_below(&self, threshold: f64) -> bool {
        self.rows
            .last()
            .is_some_and(|r| r.estimate.abs() < threshold)
    }
}

/// [`singular_log_integral`] tabulated over a decreasing grid, all rows
/// with the same seed.
pub fn vanishing_report(
    polys: &[Polynomial],
    y_grid: &[f64],
    mode: SetMode,
    kind: IntegrandKind,
    samples: u64,
    seed: u64,
) -> Result<VanishingReport> {
    check_decreasing(y_grid)?;
    let rows = y_grid
        .iter()
        .map(|&y| {
            let r = singular_log_integral(polys, y, mode, kind, samples, seed)?;
            Ok(VanishingRow {
                y,
                estimate: r.value,
                ci: Z95 * r.error_estimate,
                samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VanishingReport {
        mode,
        kind,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{i_closed_form, integrate_interval, integrate_torus_qmc, QuadConfig};
    use crate::text::parse_poly;
    use proptest::prelude::*;

    fn p(s: &str) -> Polynomial {
        parse_poly(s).unwrap()
    }

    /// Arc measure of `|e^{iθ} - 1| < y`.
    fn arc(y: f64) -> f64 {
        4.0 * (y / 2.0).asin()
    }

    #[test]
    fn measure_examples() {
        let e = sublevel_measure(&p("x - 1"), 0.1, 200_000, 1).unwrap();
        assert!((e.measure_est - arc(0.1)).abs() <= 3.0 * e.ci_halfwidth, "{e:?}");
        assert!((arc(0.1) - 0.200_07).abs() < 2e-5);

        assert_eq!(sublevel_measure(&p("x - 2"), 0.5, 10_000, 1).unwrap().measure_est, 0.0);
        assert_eq!(sublevel_measure(&p("2*x^3"), 1.0, 10_000, 1).unwrap().measure_est, 0.0);

        let e = sublevel_measure(&p("x + y"), 10.0, 1000, 3).unwrap();
        assert_eq!(e.measure_est, TAU * TAU);

        assert!(sublevel_measure(&Polynomial::zero(1), 0.1, 10, 1).is_err());
        assert!(sublevel_measure(&p("x"), 0.0, 10, 1).is_err());
        assert!(sublevel_measure(&p("x"), 0.1, 0, 1).is_err());
    }

    #[test]
    fn seed_deterministic() {
        let a = sublevel_measure(&p("1 + x + y"), 0.3, 150_000, 9).unwrap();
        let b = sublevel_measure(&p("1 + x + y"), 0.3, 150_000, 9).unwrap();
        assert_eq!(a, b);
        let c = sublevel_measure(&p("1 + x + y"), 0.3, 150_000, 10).unwrap();
        assert_ne!(a.measure_est, c.measure_est);
    }

    #[test]
    fn normalization_matches_qmc_probability() {
        let q = p("1 + x + y");
        let y = 0.5;
        let e = sublevel_measure(&q, y, 400_000, 5).unwrap();
        let ev = Evaluator::new(&q);
        let qmc = integrate_torus_qmc(
            |a| if ev.eval(a).norm() < y { 1.0 } else { 0.0 },
            2,
            &QuadConfig::default(),
        )
        .unwrap();
        let mass = TAU * TAU;
        assert!(
            (e.measure_est / mass - qmc.value).abs() <= e.ci_halfwidth / mass + 3.0 * qmc.error_estimate,
            "{} vs {}",
            e.measure_est / mass,
            qmc.value
        );
    }

    #[test]
    fn fit_examples() {
        let grid = [1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3];
        let f = fit_sublevel_exponent(&p("x - 1"), &grid, 1_000_000, 2).unwrap();
        assert!((f.delta_hat - 1.0).abs() < 0.05, "{f:?}");
        assert!((f.c_hat - 2.0).abs() < 0.2, "{f:?}");

        let f = fit_sublevel_exponent(&p("x^2 + x + 1"), &grid, 1_000_000, 2).unwrap();
        assert!((f.delta_hat - 1.0).abs() < 0.05, "{f:?}");

        let f = fit_sublevel_exponent(&p("(x - 1)^2"), &grid, 1_000_000, 2).unwrap();
        assert!((f.delta_hat - 0.5).abs() < 0.03, "{f:?}");

        assert_eq!(
            fit_sublevel_exponent(&p("x - 2"), &grid, 1000, 2),
            Err(Error::TooFewPoints { need: 3, have: 0 })
        );
        assert!(fit_sublevel_exponent(&p("x - 1"), &[1e-2, 1e-1, 1e-3], 1000, 2).is_err());
    }

    #[test]
    fn lawton_shape() {
        let grid = default_y_grid();
        for (s, k) in [
            ("x - 1", 2),
            ("x^2 + x + 1", 3),
            ("x^3 + x^2 + x + 1", 4),
            ("(x - 1)^2", 3),
            ("x^4 - 2*x^2 + 1", 3),
        ] {
            let q = p(s);
            assert_eq!(q.nonzero_coefficient_count().unwrap(), k);
            let f = fit_sublevel_exponent(&q, &grid, 1_000_000, 4).unwrap();
            assert!(f.delta_hat >= 1.0 / (k - 1) as f64 - 0.05, "{s}: {f:?}");
        }
    }

    #[test]
    fn singular_examples() {
        for mode in [SetMode::Union, SetMode::Intersection] {
            for kind in [IntegrandKind::Product, IntegrandKind::Max] {
                let r = singular_log_integral(&[p("x - 2")], 0.5, mode, kind, 10_000, 1).unwrap();
                assert_eq!(r.value, 0.0);
            }
        }

        // 1-D oracle: ∫ log(2|sin(θ/2)|) over the arc |θ| < 2 arcsin(y/2)
        let y = 0.1;
        let half = 2.0 * (y / 2.0f64).asin();
        let oracle = 2.0
            * integrate_interval(|t: f64| (2.0 * (t / 2.0).sin()).ln(), 0.0, half, &[], 1e-13, 0.0, 60)
                .unwrap()
                .value;
        let r = singular_log_integral(&[p("x - 1")], y, SetMode::Union, IntegrandKind::Product, 1_000_000, 3)
            .unwrap();
        assert!(oracle < 0.0);
        assert!((r.value - oracle).abs() <= 3.0 * r.error_estimate, "{} vs {oracle}", r.value);

        let r = singular_log_integral(
            &[p("x - 1"), p("x + 1")],
            y,
            SetMode::Intersection,
            IntegrandKind::Product,
            100_000,
            3,
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn singular_preconditions() {
        let run = |polys: &[Polynomial], y| {
            singular_log_integral(polys, y, SetMode::Union, IntegrandKind::Max, 100, 1)
        };
        assert!(matches!(run(&[p("0.5*x - 1")], 0.1), Err(Error::Precondition(_))));
        assert!(matches!(run(&[p("x - 1")], 1.5), Err(Error::Precondition(_))));
        assert!(matches!(run(&[p("x - 1")], 0.0), Err(Error::Precondition(_))));
        assert!(run(&[p("x - 1")], 1.0).is_ok());
        assert!(run(&[], 0.5).is_err());
        // several variables are allowed
        assert!(run(&[p("1 + x + y"), p("x - 1")], 0.5).is_ok());
    }

    #[test]
    fn reports_vanish() {
        let grid = default_y_grid();
        for (polys, mode, kind) in [
            (vec![p("x - 1")], SetMode::Union, IntegrandKind::Product),
            (vec![p("x - 1"), p("x - 1")], SetMode::Intersection, IntegrandKind::Max),
        ] {
            let rep = vanishing_report(&polys, &grid, mode, kind, 1_000_000, 8).unwrap();
            assert!(rep.decreasing_within_ci(), "{rep:?}");
            assert!(rep.ends_below(1e-2), "{rep:?}");
        }
        let rep = vanishing_report(
            &[p("x - 2"), p("x + 2")],
            &grid,
            SetMode::Union,
            IntegrandKind::Product,
            10_000,
            8,
        )
        .unwrap();
        assert!(rep.rows.iter().all(|r| r.estimate == 0.0));
    }

    #[test]
    fn single_polynomial_dominated_by_closed_form() {
        let grid = default_y_grid();
        for (s, k) in [("x - 1", 2u32), ("x^2 + x + 1", 3), ("x^3 - x^2 + x - 1", 4)] {
            let rep = vanishing_report(&[p(s)], &grid, SetMode::Union, IntegrandKind::Product, 1_000_000, 6)
                .unwrap();
            let c = rep.rows[0].estimate.abs() / i_closed_form(1, k, grid[0]).unwrap();
            for r in &rep.rows {
                let bound = c * i_closed_form(1, k, r.y).unwrap();
                assert!(r.estimate.abs() <= bound * 1.05 + r.ci, "{s} at {}: {} > {bound}", r.y, r.estimate);
            }
        }
    }

    fn arb_circle_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(prop::sample::select(vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]), 2..6)
            .prop_map(|c| Polynomial::from_real_coeffs(&c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        /// `∫|f₁⋯f_s| ≤ Π (∫|f_i|^s)^{1/s}` on a random arc.
        #[test]
        fn generalized_holder(
            polys in prop::collection::vec(arb_circle_poly(), 2..=3),
            a in 0.0f64..TAU,
            len in 0.1f64..TAU,
        ) {
            let s = polys.len() as i32;
            let evs: Vec<Evaluator> = polys.iter().map(Evaluator::new).collect();
            let in_arc = |t: f64| (t - a).rem_euclid(TAU) < len;
            let samples = 200_000u64;
            let lhs = monte_carlo(1, samples, 11, |x| {
                if in_arc(x[0]) { evs.iter().map(|e| e.log_abs(x).abs()).product() } else { 0.0 }
            });
            let mean = lhs.sum / samples as f64;
            let sigma = ((lhs.sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
            let mut rhs = 1.0;
            for e in &evs {
                let st = monte_carlo(1, samples, 11, |x| {
                    if in_arc(x[0]) { e.log_abs(x).abs().powi(s) } else { 0.0 }
                });
                rhs *= (st.sum / samples as f64).powf(1.0 / s as f64);
            }
            prop_assert!(mean <= rhs + 3.0 * sigma, "{mean} > {rhs}");
        }
    }
}
