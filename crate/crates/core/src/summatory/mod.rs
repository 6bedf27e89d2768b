//! Running sums over the sieve's block stream.
//!
//! [`scan`] computes summatory series on a geometric checkpoint grid with
//! exact sign-change events; [`stats`] holds the correlation, sign-pattern
//! and ω-distribution statistics.

mod scan;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::lcm;
use crate::error::{Error, Result};
use crate::residue::ResidueSet;

pub use scan::{scan, BlockView, Scan, ScanState, SeriesState};

/// What a series sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    /// λ(n; q, R).
    Lambda(ResidueSet),
    /// Classical λ(n).
    ClassicalLambda,
    /// Classical λ(n) restricted to `n mod q ∈ P`.
    ClassicalRestricted(ResidueSet),
    /// ω(n; q, a) for a single class.
    SmallOmega(ResidueSet),
    /// Ω(n; q, a) for a single class.
    BigOmega(ResidueSet),
}

/// A series kind with its canonical label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeriesSpec {
    kind: SeriesKind,
    label: String,
}

impl SeriesSpec {
    fn from_kind(kind: SeriesKind) -> Self {
        let label = match &kind {
            SeriesKind::Lambda(rs) => format!("L;{rs}"),
            SeriesKind::ClassicalLambda => "Lclassical".to_string(),
            SeriesKind::ClassicalRestricted(p) => {
                format!("Lclassical;q={};P={}", p.modulus(), p.residue_list())
            }
            SeriesKind::SmallOmega(rs) => {
                format!("omega;q={};a={}", rs.modulus(), rs.residues()[0])
            }
            SeriesKind::BigOmega(rs) => {
                format!("Omega;q={};a={}", rs.modulus(), rs.residues()[0])
            }
        };
        Self { kind, label }
    }

    pub fn lambda(rs: ResidueSet) -> Self {
        Self::from_kind(SeriesKind::Lambda(rs))
    }

    pub fn classical() -> Self {
        Self::from_kind(SeriesKind::ClassicalLambda)
    }

    pub fn classical_restricted(progression: ResidueSet) -> Self {
        Self::from_kind(SeriesKind::ClassicalRestricted(progression))
    }

    pub fn small_omega(q: u64, a: u64) -> Result<Self> {
        Ok(Self::from_kind(SeriesKind::SmallOmega(ResidueSet::single(q, a)?)))
    }

    pub fn big_omega(q: u64, a: u64) -> Result<Self> {
        Ok(Self::from_kind(SeriesKind::BigOmega(ResidueSet::single(q, a)?)))
    }

    pub fn kind(&self) -> &SeriesKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Modulus the prime classes must be sieved at, if the series needs one.
    pub fn sieve_modulus(&self) -> Option<u64> {
        match &self.kind {
            SeriesKind::Lambda(rs) | SeriesKind::SmallOmega(rs) | SeriesKind::BigOmega(rs) => {
                Some(rs.modulus())
            }
            SeriesKind::ClassicalLambda | SeriesKind::ClassicalRestricted(_) => None,
        }
    }

    /// Whether the series needs per-class counts rather than parities.
    pub fn needs_counts(&self) -> bool {
        matches!(self.kind, SeriesKind::SmallOmega(_) | SeriesKind::BigOmega(_))
    }

    /// Smallest sieve modulus serving every spec (2 when none needs a modulus).
    pub fn common_modulus(specs: &[SeriesSpec]) -> u64 {
        specs.iter().filter_map(SeriesSpec::sieve_modulus).fold(2, lcm)
    }
}

impl fmt::Display for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn field<'a>(part: Option<&'a str>, key: &str, label: &str) -> Result<&'a str> {
    part.and_then(|p| p.strip_prefix(key))
        .ok_or_else(|| Error::Parse(format!("label {label:?}: expected field {key}")))
}

fn number(s: &str, label: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::Parse(format!("label {label:?}: bad number {s:?}")))
}

impl FromStr for SeriesSpec {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        let mut parts = label.split(';');
        let head = parts.next().unwrap_or_default();
        let spec = match head {
            "Lclassical" => match parts.next() {
                None => Self::classical(),
                Some(q) => {
                    let q = number(field(Some(q), "q=", label)?, label)?;
                    let p = field(parts.next(), "P=", label)?;
                    Self::classical_restricted(ResidueSet::parse_list(q, p)?)
                }
            },
            "L" => {
                let q = number(field(parts.next(), "q=", label)?, label)?;
                let set = field(parts.next(), "set=", label)?;
                Self::lambda(ResidueSet::parse_list(q, set)?)
            }
            "omega" | "Omega" => {
                let q = number(field(parts.next(), "q=", label)?, label)?;
                let a = number(field(parts.next(), "a=", label)?, label)?;
                if head == "omega" {
                    Self::small_omega(q, a)?
                } else {
                    Self::big_omega(q, a)?
                }
            }
            _ => return Err(Error::Parse(format!("unknown series label {label:?}"))),
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("trailing fields in label {label:?}")));
        }
        Ok(spec)
    }
}

/// A point `(x, value)` of a running sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Extremum {
    pub x: u64,
    pub value: i64,
}

/// A completed scan of one series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummatorySeries {
    pub spec: SeriesSpec,
    /// Values on the geometric grid, strictly increasing in `x`, ending at `xmax`.
    pub checkpoints: Vec<(u64, i64)>,
    /// Largest value and the first `x` attaining it.
    pub max: Extremum,
    /// Smallest value and the first `x` attaining it.
    pub min: Extremum,
    /// Every `n` at which the running sum changed sign.
    pub sign_events: Vec<u64>,
    pub final_value: Extremum,
}

impl SummatorySeries {
    /// Value at a grid point, if `x` lies on the grid.
    pub fn value_at(&self, x: u64) -> Option<i64> {
        self.checkpoints
            .binary_search_by_key(&x, |&(cx, _)| cx)
            .ok()
            .map(|i| self.checkpoints[i].1)
    }

    pub fn xmax(&self) -> u64 {
        self.final_value.x
    }
}

/// Answer to "does this running sum keep one sign?".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignChangeReport {
    pub series: String,
    pub xmax: u64,
    pub first_sign_change: Option<u64>,
    pub sign_changes: u64,
    pub max: Extremum,
    pub min: Extremum,
}

pub fn sign_report(series: &SummatorySeries) -> SignChangeReport {
    SignChangeReport {
        series: series.spec.label().to_string(),
        xmax: series.xmax(),
        first_sign_change: series.sign_events.first().copied(),
        sign_changes: series.sign_events.len() as u64,
        max: series.max,
        min: series.min,
    }
}

/// Geometric grid `{⌈ratio^k⌉}` within `[1, xmax]`, deduplicated, with `xmax` appended.
pub fn checkpoint_grid(xmax: u64, ratio: f64) -> Result<Vec<u64>> {
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::Config(format!("checkpoint ratio must exceed 1, got {ratio}")));
    }
    let mut grid = vec![1u64];
    let mut k = 1i32;
    loop {
        let v = ratio.powi(k).ceil();
        if v > xmax as f64 {
            break;
        }
        let v = v as u64;
        if v > *grid.last().unwrap() && v <= xmax {
            grid.push(v);
        }
        k += 1;
    }
    if *grid.last().unwrap() != xmax {
        grid.push(xmax);
    }
    Ok(grid)
}
