//! Integration engines for Mahler-type integrals.
//!
//! All results are normalized by the Haar measure of the circle or torus
//! (total mass 1). The [`crate::sublevel`] module rescales to Lebesgue
//! measure where it needs to.

mod circle;
mod closed_form;
mod torus;

pub use circle::{integrate_circle, integrate_interval, IntervalResult};
pub use closed_form::{i_closed_form, j_closed_form, j_upper_bound, JParams};
pub use torus::{integrate_torus_qmc, kronecker_generator};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadConfig {
    pub tol: f64,
    pub max_depth: u32,
    pub qmc_samples: u64,
    pub randomizations: u32,
    pub seed: u64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-9,
            max_depth: 60,
            qmc_samples: 1 << 16,
            randomizations: 16,
            seed: 42,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max_depth must be positive".into()));
        }
        if !self.qmc_samples.is_power_of_two() {
            return Err(Error::InvalidParameter(
                "qmc_samples must be a power of two".into(),
            ));
        }
        if self.randomizations < 2 {
            return Err(Error::InvalidParameter(
                "at least two randomizations are needed for an error estimate".into(),
            ));
        }
        Ok(())
    }

    pub fn with_tol(self, tol: f64) -> Self {
        QuadConfig { tol, ..self }
    }

    pub fn with_samples(self, qmc_samples: u64) -> Self {
        QuadConfig { qmc_samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        QuadConfig { seed, ..self }
    }
}
