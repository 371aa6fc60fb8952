//! Mahler measures of complex polynomials and their Boyd–Lawton limits.
//!
//! For a nonzero `P ∈ ℂ[x₁, …, xₙ]` the Mahler measure is the mean of
//! `log|P|` over the torus `|x₁| = ⋯ = |xₙ| = 1`. The crate computes it and
//! its higher, multiple and generalized (max) variants, evaluates them along
//! the univariate specializations `P_r(x) = P(x^{r₁}, …, x^{rₙ})`, and
//! estimates integrals over the sublevel sets `{|P| < y}`.
//!
//! ```
//! use mahler::{mahler, parse_poly, QuadConfig};
//!
//! let p = parse_poly("x^2 - x - 1").unwrap();
//! let m = mahler(&p, &QuadConfig::default()).unwrap();
//! assert!((m.value - 0.481_211_825).abs() < 1e-9);
//! ```

pub mod convergence;
pub mod error;
pub mod jensen;
pub mod lattice;
pub mod measures;
pub mod poly;
pub mod quadrature;
pub mod roots;
pub mod sublevel;
pub mod text;

pub use convergence::{
    boyd_lawton_table, generalized_table, higher_table, multiple_table, tail_summary, ConvergenceRow,
    ConvergenceTable, TableRecord,
};
pub use error::{Error, Result};
pub use jensen::{mahler_univariate, MeasureResult, Method};
pub use lattice::{admissible_sequence, q_of_r, QValue, RVector, Relation};
pub use measures::{
    generalized_mahler, higher_mahler, mahler, multiple_mahler, MeasureKind, MeasureRequest,
};
pub use poly::{Evaluator, Polynomial, TorusPoint};
pub use quadrature::{
    i_closed_form, integrate_circle, integrate_torus_qmc, j_closed_form, j_upper_bound, JParams,
    QuadConfig,
};
pub use roots::{roots, roots_near_circle, Root, RootSet};
pub use sublevel::{
    fit_sublevel_exponent, singular_log_integral, sublevel_measure, vanishing_report,
    IntegrandKind, SetMode, SublevelEstimate, SublevelFit, VanishingReport,
};
pub use text::{parse_poly, print_poly};

/// Names of the public operations, for front ends that expose them all.
pub const OPERATIONS: &[&str] = &[
    "evaluate",
    "specialize",
    "nonzero_coefficient_count",
    "scale",
    "min_coeff_modulus",
    "roots",
    "roots_near_circle",
    "mahler_univariate",
    "integrate_circle",
    "integrate_torus_qmc",
    "j_closed_form",
    "i_closed_form",
    "mahler",
    "higher_mahler",
    "multiple_mahler",
    "generalized_mahler",
    "q_of_r",
    "admissible_sequence",
    "sublevel_measure",
    "fit_sublevel_exponent",
    "singular_log_integral",
    "vanishing_report",
    "boyd_lawton_table",
    "generalized_table",
    "multiple_table",
    "higher_table",
    "tail_summary",
    "parse_poly",
];
