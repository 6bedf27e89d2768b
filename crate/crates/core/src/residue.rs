//! Residue sets modulo `q`, the index of every λ/Ω/ω variant.

use std::fmt;
use std::str::FromStr;

use crate::arith::gcd;
use crate::error::{Error, Result};

/// A modulus `q ≥ 2` and a nonempty set of distinct residues in `[0, q)`.
///
/// Residues are kept sorted, so derived equality is equality of sets. The
/// class written "q mod q" in the classical notation is stored as `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueSet {
    modulus: u64,
    residues: Vec<u64>,
}

impl ResidueSet {
    pub fn new(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Domain(format!("modulus must be >= 2, got {modulus}")));
        }
        let mut residues: Vec<u64> = residues.into_iter().collect();
        if residues.is_empty() {
            return Err(Error::Domain("residue set must be nonempty".into()));
        }
        if let Some(&r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(Error::Domain(format!("residue {r} is not below modulus {modulus}")));
        }
        residues.sort_unstable();
        if residues.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("residues must be pairwise distinct".into()));
        }
        Ok(Self { modulus, residues })
    }

    pub fn single(modulus: u64, residue: u64) -> Result<Self> {
        Self::new(modulus, [residue])
    }

    /// Every residue `0..q`; λ for this set is the classical Liouville function.
    pub fn all(modulus: u64) -> Result<Self> {
        Self::new(modulus, 0..modulus)
    }

    /// The residues coprime to `q`, i.e. the unit group as a set.
    pub fn units(modulus: u64) -> Result<Self> {
        Self::new(modulus, (0..modulus).filter(|&a| gcd(a, modulus) == 1))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Whether the residue class of `n` belongs to the set.
    pub fn contains_class_of(&self, n: u64) -> bool {
        self.residues.binary_search(&(n % self.modulus)).is_ok()
    }

    pub fn all_coprime(&self) -> bool {
        self.residues.iter().all(|&a| gcd(a, self.modulus) == 1)
    }

    /// Lift to a multiple `m` of the modulus: the residues `b mod m` with `b mod q` in the set.
    pub fn lift(&self, m: u64) -> Result<Self> {
        if m % self.modulus != 0 {
            return Err(Error::Domain(format!("{m} is not a multiple of {}", self.modulus)));
        }
        Self::new(m, (0..m).filter(|&b| self.contains_class_of(b)))
    }

    /// Disjoint union of two sets with the same modulus.
    pub fn union(&self, other: &ResidueSet) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(Error::Domain("moduli differ".into()));
        }
        Self::new(self.modulus, self.residues.iter().chain(&other.residues).copied())
    }

    /// Comma-separated residue list, e.g. `1,2`.
    pub fn residue_list(&self) -> String {
        self.residues.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    }

    /// Parse a residue list such as `"1,2"` for the given modulus.
    pub fn parse_list(modulus: u64, s: &str) -> Result<Self> {
        let residues = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad residue {t:?} in set {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(modulus, residues)
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={};set={}", self.modulus, self.residue_list())
    }
}

impl FromStr for ResidueSet {
    type Err = Error;

    /// Parses the `q=5;set=1,2` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let (q, set) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected q=..;set=.., got {s:?}")))?;
        let q = q
            .strip_prefix("q=")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("bad modulus in {s:?}")))?;
        let set = set
            .strip_prefix("set=")
            .ok_or_else(|| Error::Parse(format!("bad set in {s:?}")))?;
        Self::parse_list(q, set)
    }
}
