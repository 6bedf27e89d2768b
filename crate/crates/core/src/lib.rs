//! Liouville-type functions restricted to arithmetic progressions.
//!
//! For a modulus `q` and a set `R` of residues, `Ω(n; q, R)` counts the prime
//! factors of `n` lying in the classes of `R` (with multiplicity),
//! `ω(n; q, R)` counts them without multiplicity, and
//! `λ(n; q, R) = (−1)^{Ω(n; q, R)}`. When `R` is every class mod `q` this is
//! the classical Liouville function.
//!
//! * [`arith`] evaluates the functions at a single point by trial division.
//! * [`sieve`] computes them for whole blocks of integers.
//! * [`characters`] enumerates real Dirichlet characters and evaluates `L(s, χ)`.
//! * [`summatory`] streams running sums, sign changes and distribution statistics.
//! * [`analytics`] holds closed forms, predicted constants and least-squares fits.
//! * [`io`] reads and writes the CSV, JSON and checkpoint formats.

pub mod analytics;
pub mod arith;
pub mod characters;
pub mod error;
pub mod io;
pub mod residue;
pub mod sieve;
pub mod summatory;

pub use error::{Error, Result};
pub use residue::ResidueSet;
