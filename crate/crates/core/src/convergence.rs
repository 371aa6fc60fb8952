//! Measures of the specializations `P_r` along `r(m) = (1, m, …, m^{n-1})`,
//! compared with a direct estimate of the multivariate measure.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jensen::MeasureResult;
use crate::lattice::{admissible_sequence, QValue, RVector};
use crate::measures::{generalized_mahler, higher_mahler, mahler, multiple_mahler, MeasureKind};
use crate::poly::Polynomial;
use crate::quadrature::QuadConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: RVector,
    pub q: QValue,
    /// `None` when some `P_r` vanishes identically; such rows are flagged.
    pub result: Option<MeasureResult>,
    pub deviation: Option<f64>,
}

impl ConvergenceRow {
    pub fn flagged(&self) -> bool {
        self.result.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub kind: MeasureKind,
    pub target: MeasureResult,
    pub rows: Vec<ConvergenceRow>,
}

/// One flat record per row, in the fixed column order
/// `kind, r, q, value, err, target, deviation`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRecord {
    pub kind: String,
    /// Entries joined by `;`.
    pub r: String,
    pub q: String,
    pub value: Option<f64>,
    pub err: Option<f64>,
    pub target: f64,
    pub deviation: Option<f64>,
}

impl ConvergenceTable {
    pub fn records(&self) -> Vec<TableRecord> {
        self.rows
            .iter()
            .map(|row| TableRecord {
                kind: self.kind.to_string(),
                r: row
                    .r
                    .entries()
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(";"),
                q: row.q.to_string(),
                value: row.result.as_ref().map(|r| r.value),
                err: row.result.as_ref().map(|r| r.error_estimate),
                target: self.target.value,
                deviation: row.deviation,
            })
            .collect()
    }

    /// Rows that were actually computed.
    pub fn computed(&self) -> impl Iterator<Item = (&ConvergenceRow, &MeasureResult)> {
        self.rows
            .iter()
            .filter_map(|row| row.result.as_ref().map(|r| (row, r)))
    }
}

fn build_table<F>(
    kind: MeasureKind,
    polys: &[Polynomial],
    m_values: &[u64],
    cfg: &QuadConfig,
    measure: F,
) -> Result<ConvergenceTable>
where
    F: Fn(&[Polynomial]) -> Result<MeasureResult> + Sync,
{
    cfg.validate()?;
    if polys.is_empty() {
        return Err(Error::InvalidParameter("no polynomials given".into()));
    }
    if polys.iter().any(Polynomial::is_zero) {
        return Err(Error::ZeroPolynomial);
    }
    // polynomials in one variable are read as not depending on the others
    let n = polys.iter().map(Polynomial::nvars).max().unwrap_or(1).max(2);
    let lifted = polys.iter().map(|p| p.lift(n)).collect::<Result<Vec<_>>>()?;

    let mut ms = m_values.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let seq = admissible_sequence(n, &ms)?;

    let target = measure(&lifted)?;
    let rows = seq
        .into_par_iter()
        .map(|r| {
            let special = lifted
                .iter()
                .map(|p| p.specialize(r.entries()))
                .collect::<Result<Vec<_>>>()?;
            let q = r.q();
            if special.iter().any(Polynomial::is_zero) {
                return Ok(ConvergenceRow {
                    r,
                    q,
                    result: None,
                    deviation: None,
                });
            }
            let result = measure(&special)?;
            Ok(ConvergenceRow {
                r,
                q,
                deviation: Some(result.value - target.value),
                result: Some(result),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceTable { kind, target, rows })
}

/// `m(P_r)` by Jensen's formula against `m(P)`.
pub fn boyd_lawton_table(p: &Polynomial, m_values: &[u64], cfg: &QuadConfig) -> Result<ConvergenceTable> {
    build_table(MeasureKind::Classic, std::slice::from_ref(p), m_values, cfg, |ps| {
        mahler(&ps[0], cfg)
    })
}

pub fn generalized_table(polys: &[Polynomial], m_values: &[u64], cfg: &QuadConfig) -> Result<ConvergenceTable> {
    build_table(MeasureKind::Max, polys, m_values, cfg, |ps| generalized_mahler(ps, cfg))
}

pub fn multiple_table(polys: &[Polynomial], m_values: &[u64], cfg: &QuadConfig) -> Result<ConvergenceTable> {
    build_table(MeasureKind::Multiple, polys, m_values, cfg, |ps| multiple_mahler(ps, cfg))
}

pub fn higher_table(p: &Polynomial, s: u32, m_values: &[u64], cfg: &QuadConfig) -> Result<ConvergenceTable> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be positive".into()));
    }
    build_table(MeasureKind::Higher(s), std::slice::from_ref(p), m_values, cfg, |ps| {
        higher_mahler(&ps[0], s, cfg)
    })
}

/// Mean and max − min of the last `tail` deviations of computed rows.
pub fn tail_summary(t: &ConvergenceTable, tail: usize) -> Result<(f64, f64)> {
    let devs: Vec<f64> = t.rows.iter().filter_map(|r| r.deviation).collect();
    if tail == 0 || devs.len() < tail {
        return Err(Error::TooFewPoints {
            need: tail.max(1),
            have: devs.len(),
        });
    }
    let last = &devs[devs.len() - tail..];
    let mean = last.iter().sum::<f64>() / tail as f64;
    let lo = last.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = last.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((mean, hi - lo))
}
