//! The minimal height `q(r)` of a nonzero integer relation `Σ t_j r_j = 0`.
//!
//! Candidates are enumerated shell by shell in the sup norm `H(t)`. Within a
//! shell, `p` is the first coordinate with `|t_p| = H`; the last remaining
//! coordinate is solved from the relation instead of enumerated, so one
//! shell costs `O(H^{n-2})` work.

use std::fmt;
use std::sync::OnceLock;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QValue {
    Finite(u64),
    Infinite,
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QValue::Finite(q) => write!(f, "{q}"),
            QValue::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for QValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QValue::Finite(q) => s.serialize_u64(*q),
            QValue::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub q: QValue,
    /// A relation attaining `q`, first nonzero entry positive.
    pub witness: Option<Vec<i64>>,
}

/// Exponent vector `r` with its lazily computed `q(r)`.
#[derive(Debug, Clone)]
pub struct RVector {
    entries: Vec<u64>,
    relation: OnceLock<Relation>,
}

impl PartialEq for RVector {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}
impl Eq for RVector {}

impl RVector {
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        if entries.is_empty() || entries.contains(&0) {
            return Err(Error::InvalidParameter(
                "r must be a non-empty vector of positive integers".into(),
            ));
        }
        Ok(RVector {
            entries,
            relation: OnceLock::new(),
        })
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn relation(&self) -> &Relation {
        self.relation
            .get_or_init(|| minimal_relation(&self.entries))
    }

    pub fn q(&self) -> QValue {
        self.relation().q
    }
}

impl Serialize for RVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RVector", 2)?;
        st.serialize_field("entries", &self.entries)?;
        st.serialize_field("q", &self.q())?;
        st.end()
    }
}

fn normalize(mut t: Vec<i64>) -> Vec<i64> {
    if t.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
        for v in &mut t {
            *v = -*v;
        }
    }
    t
}

/// Searches the shell `max|t_j| = h` for a relation, in a fixed order.
fn search_shell(r: &[i128], h: i64) -> Option<Vec<i64>> {
    let n = r.len();
    for p in 0..n {
        let solved = if p == n - 1 { n - 2 } else { n - 1 };
        let free: Vec<usize> = (0..n).filter(|&j| j != p && j != solved).collect();
        let bound = |j: usize| if j < p { h - 1 } else { h };
        let solved_bound = bound(solved);
        for sign in [1i64, -1] {
            let mut t = vec![0i64; n];
            t[p] = sign * h;
            for &j in &free {
                t[j] = -bound(j);
            }
            loop {
                let partial: i128 = (0..n)
                    .filter(|&j| j != solved)
                    .map(|j| t[j] as i128 * r[j])
                    .sum();
                if partial % r[solved] == 0 {
                    let ts = -partial / r[solved];
                    if ts.abs() <= solved_bound as i128 {
                        t[solved] = ts as i64;
                        return Some(normalize(t));
                    }
                }
                // odometer over the free coordinates
                let mut k = free.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    let j = free[k];
                    if t[j] < bound(j) {
                        t[j] += 1;
                        for &jj in &free[k + 1..] {
                            t[jj] = -bound(jj);
                        }
                        k = usize::MAX;
                        break;
                    }
                }
                if k != usize::MAX {
                    break;
                }
            }
        }
    }
    None
}

fn minimal_relation(r: &[u64]) -> Relation {
    let n = r.len();
    if n == 1 {
        return Relation {
            q: QValue::Infinite,
            witness: None,
        };
    }
    let wide: Vec<i128> = r.iter().map(|&v| v as i128).collect();
    // (r_2, -r_1, 0, …) is always a relation
    let bound = r[0].max(r[1]) as i64;
    for h in 1..=bound {
        if let Some(t) = search_shell(&wide, h) {
            return Relation {
                q: QValue::Finite(h as u64),
                witness: Some(t),
            };
        }
    }
    unreachable!("a relation of height max(r_1, r_2) always exists")
}

/// `q(r)` with a witness relation.
pub fn q_of_r(r: &RVector) -> Relation {
    r.relation().clone()
}

/// `r(m) = (1, m, …, m^{n-1})` for each `m`; each has `q(r(m)) = m`.
pub fn admissible_sequence(n: usize, m_values: &[u64]) -> Result<Vec<RVector>> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "admissible sequences need n >= 2".into(),
        ));
    }
    m_values
        .iter()
        .map(|&m| {
            if m == 0 {
                return Err(Error::InvalidParameter("m must be positive".into()));
            }
            let entries = (0..n as u32)
                .map(|j| m.checked_pow(j))
                .collect::<Option<Vec<u64>>>()
                .ok_or_else(|| Error::InvalidParameter(format!("m^{} overflows", n - 1)))?;
            let rv = RVector::new(entries)?;
            assert_eq!(
                rv.q(),
                QValue::Finite(m),
                "q(1, m, …, m^(n-1)) must equal m"
            );
            Ok(rv)
        })
        .collect()
}
