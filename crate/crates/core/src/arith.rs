//! Point evaluations of the arithmetic functions by trial division.
//!
//! Every function here works on a single integer and is meant as the
//! ground truth the sieve and the scans are checked against. Trial division
//! up to `√n` is plenty for the arguments the checks use (`n ≲ 10^7`).

use crate::error::{domain, Result};
use crate::residue::ResidueSet;

/// Prime factorization of `n ≥ 1`: primes strictly increasing, exponents ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Ω(n).
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// ω(n).
    pub fn small_omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// τ(n), the number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| u64::from(e) + 1).product()
    }

    /// All divisors of `n` in ascending order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let base = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..base {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5u64;
    while d <= n / d {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    match factorize(n) {
        Ok(f) => f
            .factors
            .iter()
            .fold(n, |acc, &(p, _)| acc / p * (p - 1)),
        Err(_) => 0,
    }
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return domain("cannot factorize 0");
    }
    if n > i64::MAX as u64 {
        return domain(format!("{n} exceeds 2^63 - 1"));
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut push = |m: &mut u64, p: u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(&mut m, 2);
    push(&mut m, 3);
    let mut d = 5u64;
    while d <= m / d {
        push(&mut m, d);
        push(&mut m, d + 2);
        d += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}


/// Ω(n; q, R): prime factors of `n` in the classes of `rs`, with multiplicity.
pub fn big_omega_ap(n: u64, rs: &ResidueSet) -> Result<u32> {
    Ok(factorize(n)?
        .factors
        .iter()
        .filter(|&&(p, _)| rs.contains_class_of(p))
        .map(|&(_, e)| e)
        .sum())
}

/// ω(n; q, R): distinct prime factors of `n` in the classes of `rs`.
pub fn small_omega_ap(n: u64, rs: &ResidueSet) -> Result<u32> {
    Ok(factorize(n)?
        .factors
        .iter()
        .filter(|&&(p, _)| rs.contains_class_of(p))
        .count() as u32)
}

/// λ(n; q, a₁, …, a_r) = (−1)^{Ω(n; q, R)}.
pub fn lambda_ap(n: u64, rs: &ResidueSet) -> Result<i8> {
    Ok(parity_sign(big_omega_ap(n, rs)?))
}

/// Classical Liouville λ(n) = (−1)^{Ω(n)}.
pub fn liouville(n: u64) -> Result<i8> {
    Ok(parity_sign(factorize(n)?.big_omega()))
}

pub(crate) fn parity_sign(count: u32) -> i8 {
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Closed form of `Σ_{d|n} λ(d; q, a)` for a single class `a`.
///
/// Split `n = n₁·n₂` with `n₂` the largest divisor built from primes `≡ a mod q`.
/// The sum is `τ(n₁)` when `n₂` is a perfect square and `0` otherwise.
pub fn divisor_sum_closed(n: u64, rs: &ResidueSet) -> Result<u64> {
    if rs.len() != 1 {
        return domain(format!(
            "closed divisor sum needs a single residue class, got {} classes",
            rs.len()
        ));
    }
    let f = factorize(n)?;
    let mut tau_rest = 1u64;
    let mut square = true;
    for &(p, e) in &f.factors {
        if rs.contains_class_of(p) {
            square &= e % 2 == 0;
        } else {
            tau_rest *= u64::from(e) + 1;
        }
    }
    Ok(if square { tau_rest } else { 0 })
}

/// `Σ_{d|n} λ(d; q, R)` by enumerating every divisor.
pub fn divisor_sum_direct(n: u64, rs: &ResidueSet) -> Result<i64> {
    let f = factorize(n)?;
    f.divisors()
        .into_iter()
        .map(|d| lambda_ap(d, rs).map(i64::from))
        .sum()
}
