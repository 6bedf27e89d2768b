//! Segmented computation of per-class prime-factor counts.
//!
//! A block `[lo, hi)` is processed with a running product array initialised
//! to 1. For every base prime `p ≤ √(hi−1)` and every power `p^k < hi`, each
//! multiple of `p^k` in the block has its product multiplied by `p` and the
//! counter of class `p mod q` bumped. Afterwards `n / product` is either 1 or
//! the single prime factor of `n` above the base table, which is classified
//! by its own residue. No integer in the block is ever factored directly.

use std::ops::{Div, Mul, Rem};

use crate::error::{Error, Result};
use crate::residue::ResidueSet;

pub const DEFAULT_BLOCK_SIZE: u64 = 1 << 22;
pub const MIN_BLOCK_SIZE: u64 = 1 << 10;
/// Largest modulus the bit-parity representation can hold.
pub const MAX_PARITY_MODULUS: u64 = 64;

/// Scan-wide sieve parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveConfig {
    pub block_size: u64,
    pub xmax: u64,
    pub modulus: u64,
    pub workers: usize,
    /// Upper bound on bytes held by in-flight blocks; `None` disables the check.
    pub memory_budget: Option<u64>,
}

impl SieveConfig {
    pub fn new(xmax: u64, modulus: u64) -> Result<Self> {
        let cfg = Self {
            block_size: DEFAULT_BLOCK_SIZE,
            xmax,
            modulus,
            workers: 1,
            memory_budget: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_block_size(mut self, block_size: u64) -> Result<Self> {
        self.block_size = block_size;
        self.validate()?;
        Ok(self)
    }

    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        self.workers = workers;
        self.validate()?;
        Ok(self)
    }

    pub fn with_memory_budget(mut self, bytes: u64) -> Self {
        self.memory_budget = Some(bytes);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size < MIN_BLOCK_SIZE {
            return Err(Error::Config(format!(
                "block size {} is below the minimum {MIN_BLOCK_SIZE}",
                self.block_size
            )));
        }
        if self.xmax < 2 {
            return Err(Error::Config(format!("xmax must be >= 2, got {}", self.xmax)));
        }
        if self.xmax >= 1 << 62 {
            return Err(Error::Config(format!("xmax {} is out of range", self.xmax)));
        }
        if self.modulus < 2 || self.modulus > 255 {
            return Err(Error::Config(format!("modulus {} not in 2..=255", self.modulus)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }

    /// Largest base prime the scan needs.
    pub fn prime_limit(&self) -> u64 {
        self.xmax.isqrt()
    }

    /// Bytes for one full block of counts (both tables) plus the product array.
    pub fn counts_block_bytes(&self) -> u64 {
        self.block_size * (2 * self.modulus + 8)
    }

    /// Enforces the memory budget for `workers` concurrent blocks of `per_block` bytes.
    pub fn check_budget(&self, per_block: u64) -> Result<()> {
        match self.memory_budget {
            Some(budget) if per_block.saturating_mul(self.workers as u64) > budget => {
                Err(Error::Config(format!(
                    "{} workers x {} bytes per block exceeds the memory budget of {} bytes",
                    self.workers, per_block, budget
                )))
            }
            _ => Ok(()),
        }
    }

    /// The blocks `[lo, hi)` covering `[1, xmax]`, aligned to multiples of the block size.
    pub fn blocks(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        blocks_between(1, self.xmax + 1, self.block_size)
    }
}

/// Aligned blocks covering `[start, end)`: boundaries fall on `1 + k·block_size`.
pub fn blocks_between(start: u64, end: u64, block_size: u64) -> impl Iterator<Item = (u64, u64)> {
    let mut lo = start;
    std::iter::from_fn(move || {
        if lo >= end {
            return None;
        }
        let k = (lo - 1) / block_size + 1;
        let hi = (1 + k * block_size).min(end);
        let block = (lo, hi);
        lo = hi;
        Some(block)
    })
}

/// Ascending primes `≤ limit`; empty when `limit < 2`.
pub fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Base primes together with the bound they are complete up to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        Self { limit, primes: base_primes(limit) }
    }

    /// Table sufficient to sieve every block below `end`.
    pub fn covering(end: u64) -> Self {
        Self::new(end.saturating_sub(1).isqrt().max(2))
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn check_covers(&self, lo: u64, hi: u64) -> Result<()> {
        if lo == 0 || lo >= hi {
            return Err(Error::Precondition(format!("need 1 <= lo < hi, got [{lo}, {hi})")));
        }
        if hi > 1 << 62 {
            return Err(Error::Precondition(format!("block end {hi} out of range")));
        }
        let need = (hi - 1).isqrt();
        if self.limit < need {
            return Err(Error::Precondition(format!(
                "prime table complete to {} but block [{lo}, {hi}) needs primes up to {need}",
                self.limit
            )));
        }
        Ok(())
    }
}

/// Per-integer, per-class counts of prime factors for a block `[lo, lo+len)`.
///
/// Counters for `n = lo + i` live at `i*q .. (i+1)*q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    lo: u64,
    len: usize,
    modulus: u64,
    counts_mult: Vec<u8>,
    counts_distinct: Vec<u8>,
}

impl BlockCounts {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.len as u64
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Ω(lo+i; q, a) for every class `a`.
    pub fn mult(&self, i: usize) -> &[u8] {
        let q = self.modulus as usize;
        &self.counts_mult[i * q..(i + 1) * q]
    }

    /// ω(lo+i; q, a) for every class `a`.
    pub fn distinct(&self, i: usize) -> &[u8] {
        let q = self.modulus as usize;
        &self.counts_distinct[i * q..(i + 1) * q]
    }

    pub fn big_omega(&self, i: usize) -> u32 {
        self.mult(i).iter().map(|&c| u32::from(c)).sum()
    }

    pub fn small_omega(&self, i: usize) -> u32 {
        self.distinct(i).iter().map(|&c| u32::from(c)).sum()
    }

    /// Σ over `rs` of Ω(n; q, a) for `n = lo+i`.
    pub fn big_omega_in(&self, i: usize, rs: &ResidueSet) -> u32 {
        let row = self.mult(i);
        rs.residues().iter().map(|&a| u32::from(row[a as usize])).sum()
    }

    pub fn small_omega_in(&self, i: usize, rs: &ResidueSet) -> u32 {
        let row = self.distinct(i);
        rs.residues().iter().map(|&a| u32::from(row[a as usize])).sum()
    }
}

/// Odd-multiplicity classes per integer: bit `a` of entry `i` is set iff
/// Ω(lo+i; q, a) is odd. Enough for every λ series, at 8 bytes per integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityBlock {
    lo: u64,
    modulus: u64,
    odd: Vec<u64>,
}

impl ParityBlock {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn len(&self) -> usize {
        self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.odd.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn odd_masks(&self) -> &[u64] {
        &self.odd
    }

    /// λ values for the classes selected by `mask` (see [`class_mask`]).
    pub fn lambda_into(&self, mask: u64, out: &mut Vec<i8>) {
        out.clear();
        out.extend(self.odd.iter().map(|&m| 1 - 2 * ((m & mask).count_ones() & 1) as i8));
    }
}

/// Bit mask over classes mod `q` (a multiple of `rs.modulus()`) that reduce into `rs`.
pub fn class_mask(rs: &ResidueSet, q: u64) -> Result<u64> {
    if q > MAX_PARITY_MODULUS {
        return Err(Error::Config(format!("modulus {q} exceeds {MAX_PARITY_MODULUS}")));
    }
    if q % rs.modulus() != 0 {
        return Err(Error::Domain(format!(
            "sieve modulus {q} is not a multiple of {}",
            rs.modulus()
        )));
    }
    Ok((0..q).filter(|&b| rs.contains_class_of(b)).fold(0, |m, b| m | 1 << b))
}

trait Word: Copy + Eq + Mul<Output = Self> + Div<Output = Self> + Rem<Output = Self> {
    const ONE: Self;
    fn from_u64(v: u64) -> Self;
    fn to_usize(self) -> usize;
}

impl Word for u32 {
    const ONE: Self = 1;
    fn from_u64(v: u64) -> Self {
        v as u32
    }
    fn to_usize(self) -> usize {
        self as usize
    }
}

impl Word for u64 {
    const ONE: Self = 1;
    fn from_u64(v: u64) -> Self {
        v
    }
    fn to_usize(self) -> usize {
        self as usize
    }
}

/// Receives one event per prime-power division: index in block, class of
/// the prime, and whether this is the first power (a new distinct prime).
trait Sink {
    fn hit(&mut self, i: usize, class: usize, first: bool);
}

fn sieve_core<S: Sink>(lo: u64, hi: u64, q: u64, table: &PrimeTable, sink: &mut S) {
    if hi <= 1 << 32 {
        sieve_words::<u32, S>(lo, hi, q, table, sink)
    } else {
        sieve_words::<u64, S>(lo, hi, q, table, sink)
    }
}

fn sieve_words<W: Word, S: Sink>(lo: u64, hi: u64, q: u64, table: &PrimeTable, sink: &mut S) {
    let len = (hi - lo) as usize;
    let mut prod = vec![W::ONE; len];
    let top = hi - 1;
    for &p in table.primes().iter().take_while(|&&p| p <= top / p) {
        let class = (p % q) as usize;
        let pw = W::from_u64(p);
        let mut pk = p;
        let mut first = true;
        loop {
            let start = lo.div_ceil(pk) * pk;
            let mut i = (start - lo) as usize;
            let step = pk as usize;
            while i < len {
                prod[i] = prod[i] * pw;
                sink.hit(i, class, first);
                i += step;
            }
            if pk > top / p {
                break;
            }
            pk *= p;
            first = false;
        }
    }
    let qw = W::from_u64(q);
    let mut n = W::from_u64(lo);
    let mut cur = lo;
    for (i, &pr) in prod.iter().enumerate() {
        if pr != n {
            sink.hit(i, ((n / pr) % qw).to_usize(), true);
        }
        cur += 1;
        n = W::from_u64(cur);
    }
}

struct CountSink<'a> {
    q: usize,
    mult: &'a mut [u8],
    distinct: &'a mut [u8],
}

impl Sink for CountSink<'_> {
    #[inline(always)]
    fn hit(&mut self, i: usize, class: usize, first: bool) {
        let at = i * self.q + class;
        self.mult[at] += 1;
        if first {
            self.distinct[at] += 1;
        }
    }
}

struct ParitySink<'a> {
    odd: &'a mut [u64],
}

impl Sink for ParitySink<'_> {
    #[inline(always)]
    fn hit(&mut self, i: usize, class: usize, _first: bool) {
        self.odd[i] ^= 1 << class;
    }
}

/// Counts Ω(n; q, a) and ω(n; q, a) for every `n` in `[lo, hi)` and every class `a`.
pub fn sieve_block(lo: u64, hi: u64, q: u64, table: &PrimeTable) -> Result<BlockCounts> {
    table.check_covers(lo, hi)?;
    if q < 2 || q > 255 {
        return Err(Error::Domain(format!("modulus {q} not in 2..=255")));
    }
    let len = (hi - lo) as usize;
    let cells = len * q as usize;
    let mut mult = vec![0u8; cells];
    let mut distinct = vec![0u8; cells];
    let mut sink = CountSink { q: q as usize, mult: &mut mult, distinct: &mut distinct };
    sieve_core(lo, hi, q, table, &mut sink);
    Ok(BlockCounts { lo, len, modulus: q, counts_mult: mult, counts_distinct: distinct })
}

/// Parity-only variant of [`sieve_block`] for `q ≤ 64`.
pub fn sieve_parity_block(lo: u64, hi: u64, q: u64, table: &PrimeTable) -> Result<ParityBlock> {
    table.check_covers(lo, hi)?;
    if !(2..=MAX_PARITY_MODULUS).contains(&q) {
        return Err(Error::Domain(format!("parity modulus {q} not in 2..=64")));
    }
    let mut odd = vec![0u64; (hi - lo) as usize];
    sieve_core(lo, hi, q, table, &mut ParitySink { odd: &mut odd });
    Ok(ParityBlock { lo, modulus: q, odd })
}

/// λ(n; q, R) for every `n` in the block.
pub fn lambda_from_counts(bc: &BlockCounts, rs: &ResidueSet) -> Result<Vec<i8>> {
    if rs.modulus() != bc.modulus {
        return Err(Error::Domain(format!(
            "residue set modulus {} does not match block modulus {}",
            rs.modulus(),
            bc.modulus
        )));
    }
    Ok((0..bc.len)
        .map(|i| crate::arith::parity_sign(bc.big_omega_in(i, rs)))
        .collect())
}

/// Primes in `[lo, hi)` by a segmented sieve of Eratosthenes.
pub fn primes_in_block(lo: u64, hi: u64, table: &PrimeTable) -> Result<Vec<u64>> {
    table.check_covers(lo, hi)?;
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in table.primes().iter().take_while(|&&p| p <= (hi - 1) / p) {
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut i = (start - lo) as usize;
        while i < len {
            composite[i] = true;
            i += p as usize;
        }
    }
    Ok(composite
        .iter()
        .enumerate()
        .filter(|&(i, &c)| !c && lo + i as u64 >= 2)
        .map(|(i, _)| lo + i as u64)
        .collect())
}

/// Calls `f` on the counts of each aligned block covering `[1, x]`, in order.
pub fn for_each_counts_block(
    x: u64,
    q: u64,
    block_size: u64,
    mut f: impl FnMut(&BlockCounts),
) -> Result<()> {
    let table = PrimeTable::covering(x + 1);
    for (lo, hi) in blocks_between(1, x + 1, block_size.max(1)) {
        f(&sieve_block(lo, hi, q, &table)?);
    }
    Ok(())
}

/// Calls `f` on the parity masks of each aligned block covering `[1, x]`, in order.
pub fn for_each_parity_block(
    x: u64,
    q: u64,
    block_size: u64,
    mut f: impl FnMut(&ParityBlock),
) -> Result<()> {
    let table = PrimeTable::covering(x + 1);
    for (lo, hi) in blocks_between(1, x + 1, block_size.max(1)) {
        f(&sieve_parity_block(lo, hi, q, &table)?);
    }
    Ok(())
}
