//! Correlations, sign patterns and ω statistics over `n ≤ x`.
//!
//! Everything streams sieve blocks in ascending order; nothing holds more
//! than one block plus a few carried values.

use std::collections::VecDeque;

use serde::Serialize;

use crate::arith::{euler_phi, gcd};
use crate::error::{domain, Error, Result};
use crate::residue::ResidueSet;
use crate::sieve::{
    blocks_between, class_mask, for_each_counts_block, for_each_parity_block, primes_in_block,
    PrimeTable,
};

const BLOCK: u64 = 1 << 18;

/// Calls `f(n, λ(n; q, R))` for `n = 1..=end` in order.
fn for_each_lambda(end: u64, rs: &ResidueSet, mut f: impl FnMut(u64, i8)) -> Result<()> {
    let q = rs.modulus();
    let mask = class_mask(rs, q)?;
    let mut buf = Vec::new();
    for_each_parity_block(end.max(2), q, BLOCK, |b| {
        b.lambda_into(mask, &mut buf);
        for (i, &v) in buf.iter().enumerate() {
            let n = b.lo() + i as u64;
            if n <= end {
                f(n, v);
            }
        }
    })
}

/// Calls `f(p)` for every prime `p ≤ x` in ascending order.
fn for_each_prime(x: u64, mut f: impl FnMut(u64)) -> Result<()> {
    if x < 2 {
        return Ok(());
    }
    let table = PrimeTable::covering(x + 1);
    for (lo, hi) in blocks_between(1, x + 1, BLOCK) {
        primes_in_block(lo, hi, &table)?.into_iter().for_each(&mut f);
    }
    Ok(())
}

/// `Σ_{n ≤ xmax} ∏_i λ(n + h_i; q, R)` and that sum divided by `xmax`.
pub fn correlation(xmax: u64, rs: &ResidueSet, shifts: &[u64]) -> Result<(i64, f64)> {
    if shifts.is_empty() {
        return domain("at least one shift is required");
    }
    let mut sorted = shifts.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return domain("shifts must be distinct");
    }
    if xmax == 0 {
        return domain("xmax must be positive");
    }
    let reach = *sorted.last().unwrap() as usize;
    // window[j] holds λ(base + j); entries are consumed once base + reach is known.
    let mut window: VecDeque<i8> = VecDeque::with_capacity(reach + 1);
    let mut sum = 0i64;
    for_each_lambda(xmax + reach as u64, rs, |_, v| {
        window.push_back(v);
        if window.len() > reach {
            let prod: i8 = sorted.iter().map(|&h| window[h as usize]).product();
            sum += i64::from(prod);
            window.pop_front();
        }
    })?;
    Ok((sum, sum as f64 / xmax as f64))
}

/// Counts of consecutive sign patterns `(λ(n), …, λ(n+k−1))` over `n ≤ xmax − k + 1`.
///
/// Index `i` encodes the pattern with bit `j` set when `λ(n + j) = −1`; see
/// [`pattern_signs`].
pub fn sign_pattern_counts(xmax: u64, rs: &ResidueSet, k: usize) -> Result<Vec<u64>> {
    if !(1..=4).contains(&k) {
        return domain(format!("pattern length must be 1..=4, got {k}"));
    }
    if xmax < k as u64 {
        return domain(format!("xmax {xmax} shorter than pattern length {k}"));
    }
    let mut counts = vec![0u64; 1 << k];
    let full = (1usize << k) - 1;
    let mut code = 0usize;
    for_each_lambda(xmax, rs, |n, v| {
        // Newest value enters at bit k-1; the oldest (λ(n-k+1)) sits at bit 0.
        code = (code >> 1) | (usize::from(v < 0) << (k - 1));
        if n >= k as u64 {
            counts[code & full] += 1;
        }
    })?;
    Ok(counts)
}

/// The signs `ε_0, …, ε_{k−1}` encoded by a pattern index.
pub fn pattern_signs(index: usize, k: usize) -> Vec<i8> {
    (0..k).map(|j| if index >> j & 1 == 1 { -1 } else { 1 }).collect()
}

/// `(Σ_{n≤x} ω(n; q, a), Σ_{p≤x, p≡a} ⌊x/p⌋)`; the two are equal.
pub fn omega_sum_identity(x: u64, q: u64, a: u64) -> Result<(u64, u64)> {
    let rs = ResidueSet::single(q, a)?;
    if x < 2 {
        return Ok((0, 0));
    }
    let mut lhs = 0u64;
    for_each_counts_block(x, q, BLOCK, |b| {
        lhs += (0..b.len()).map(|i| u64::from(b.distinct(i)[a as usize])).sum::<u64>();
    })?;
    let mut rhs = 0u64;
    for_each_prime(x, |p| {
        if rs.contains_class_of(p) {
            rhs += x / p;
        }
    })?;
    Ok((lhs, rhs))
}

/// Frequencies of ω(n; q, a) over `1 ≤ n ≤ x`: entry `k` counts `n` with ω = k.
pub fn omega_distribution(x: u64, q: u64, a: u64) -> Result<Vec<u64>> {
    ResidueSet::single(q, a)?;
    let mut freq = vec![0u64; 16];
    for_each_counts_block(x.max(2), q, BLOCK, |b| {
        for i in 0..b.len() {
            if b.lo() + (i as u64) <= x {
                freq[b.distinct(i)[a as usize] as usize] += 1;
            }
        }
    })?;
    while freq.len() > 1 && freq.last() == Some(&0) {
        freq.pop();
    }
    Ok(freq)
}

fn loglog_over_phi(x: u64, q: u64) -> f64 {
    (x as f64).ln().ln() / euler_phi(q) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaMoments {
    pub mean: f64,
    /// `(1/x) Σ (ω(n; q, a) − μ)²` with `μ = loglog x / φ(q)`.
    pub centered_second_moment: f64,
    /// `μ = loglog x / φ(q)`.
    pub loglog_x_over_phi: f64,
}

pub fn omega_moments(x: u64, q: u64, a: u64) -> Result<OmegaMoments> {
    if x < 3 {
        return domain(format!("x must be >= 3 for loglog x, got {x}"));
    }
    let freq = omega_distribution(x, q, a)?;
    let mu = loglog_over_phi(x, q);
    let total: u64 = freq.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
    let second: f64 = freq
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * (k as f64 - mu).powi(2))
        .sum();
    Ok(OmegaMoments {
        mean: total as f64 / x as f64,
        centered_second_moment: second / x as f64,
        loglog_x_over_phi: mu,
    })
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Histogram of `(ω(n; q, a) − μ)/√μ` over `n ≤ x`, `μ = loglog x / φ(q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErdosKac {
    pub x: u64,
    pub mean: f64,
    pub bin_edges: Vec<f64>,
    /// `bin_edges.len() + 1` masses: below the first edge, between edges, above the last.
    pub mass: Vec<f64>,
    /// `max` over the edges of `|F(edge) − Φ(edge)|`, `F` the empirical CDF.
    pub ks: f64,
}

pub fn erdos_kac_histogram(x: u64, q: u64, a: u64, bin_edges: &[f64]) -> Result<ErdosKac> {
    if x < 1000 {
        return domain(format!("x must be >= 1000, got {x}"));
    }
    if bin_edges.is_empty() || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("bin edges must be nonempty and increasing".into()));
    }
    let freq = omega_distribution(x, q, a)?;
    let mu = loglog_over_phi(x, q);
    let z: Vec<f64> = (0..freq.len()).map(|k| (k as f64 - mu) / mu.sqrt()).collect();
    let n = x as f64;
    let mut mass = vec![0.0; bin_edges.len() + 1];
    for (k, &c) in freq.iter().enumerate() {
        // bins are (edge_{i-1}, edge_i]
        let bin = bin_edges.partition_point(|&e| e < z[k]);
        mass[bin] += c as f64 / n;
    }
    let ks = bin_edges
        .iter()
        .map(|&e| {
            let below: u64 = freq.iter().zip(&z).filter(|&(_, &zk)| zk <= e).map(|(&c, _)| c).sum();
            (below as f64 / n - normal_cdf(e)).abs()
        })
        .fold(0.0, f64::max);
    Ok(ErdosKac { x, mean: mu, bin_edges: bin_edges.to_vec(), mass, ks })
}

/// Uniform edges on `[-4, 4]` at spacing `1/100`.
pub fn default_bin_edges() -> Vec<f64> {
    (0..=800).map(|i| -4.0 + i as f64 / 100.0).collect()
}

/// `Σ_{n ≤ x, n mod q ∈ P} λ(n)`.
pub fn classical_lambda_restricted(x: u64, progression: &ResidueSet) -> Result<i64> {
    if x < 2 {
        return domain(format!("x must be >= 2, got {x}"));
    }
    let all = ResidueSet::all(2)?;
    let mut sum = 0i64;
    for_each_lambda(x, &all, |n, v| {
        if progression.contains_class_of(n) {
            sum += i64::from(v);
        }
    })?;
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MertensAp {
    /// `Σ_{p ≤ x, p ≡ a mod q} 1/p`, summed in ascending `p`.
    pub sum: f64,
    /// `sum − loglog x / φ(q)`; tends to a constant for coprime `a`.
    pub g_estimate: f64,
}

pub fn mertens_ap(x: u64, q: u64, a: u64) -> Result<MertensAp> {
    if x < 2 {
        return domain(format!("x must be >= 2, got {x}"));
    }
    let rs = ResidueSet::single(q, a)?;
    let mut sum = 0.0;
    for_each_prime(x, |p| {
        if rs.contains_class_of(p) {
            sum += 1.0 / p as f64;
        }
    })?;
    let main = if gcd(a, q) == 1 { loglog_over_phi(x, q) } else { 0.0 };
    Ok(MertensAp { sum, g_estimate: sum - main })
}
