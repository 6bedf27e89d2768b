//! Real Dirichlet characters, character-like residue sets and `L(s, χ)`.

use serde::Serialize;

use crate::arith::{factorize, gcd};
use crate::error::{domain, Result};
use crate::residue::ResidueSet;

/// Cyclic decomposition of `(Z/qZ)^×`: every unit is uniquely
/// `∏ generators[i]^{k_i}` with `0 ≤ k_i < orders[i]`. Trivial factors are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitGroup {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
}

impl UnitGroup {
    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Every unit paired with its exponent vector.
    pub fn elements(&self) -> Vec<(u64, Vec<u64>)> {
        let mut out = vec![(1 % self.modulus, vec![])];
        for (&g, &ord) in self.generators.iter().zip(&self.orders) {
            let mut next = Vec::with_capacity(out.len() * ord as usize);
            for (u, exps) in &out {
                let mut v = *u;
                for k in 0..ord {
                    let mut e = exps.clone();
                    e.push(k);
                    next.push((v, e));
                    v = mul_mod(v, g, self.modulus);
                }
            }
            out = next;
        }
        out
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mult_order(a: u64, m: u64) -> u64 {
    let mut k = 1;
    let mut v = a % m;
    while v != 1 {
        v = mul_mod(v, a, m);
        k += 1;
    }
    k
}

/// Smallest primitive root modulo an odd prime power.
fn primitive_root(pe: u64, phi: u64) -> u64 {
    (2..pe)
        .find(|&g| gcd(g, pe) == 1 && mult_order(g, pe) == phi)
        .expect("odd prime powers have primitive roots")
}

/// `x ≡ r mod m` and `x ≡ 1 mod (q / m)`, for coprime `m` and `q / m`.
fn crt_lift(r: u64, m: u64, q: u64) -> u64 {
    let rest = q / m;
    (0..rest)
        .map(|k| r + k * m)
        .find(|&x| x % rest == 1 % rest)
        .expect("CRT solution exists for coprime moduli")
}

pub fn unit_group(q: u64) -> Result<UnitGroup> {
    if q < 2 {
        return domain(format!("modulus must be >= 2, got {q}"));
    }
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for &(p, e) in factorize(q)?.factors() {
        let pe = p.pow(e);
        let mut local: Vec<(u64, u64)> = Vec::new();
        if p == 2 {
            match e {
                1 => {}
                2 => local.push((3, 2)),
                _ => {
                    local.push((pe - 1, 2));
                    local.push((5, pe / 4));
                }
            }
        } else {
            let phi = pe / p * (p - 1);
            local.push((primitive_root(pe, phi), phi));
        }
        for (g, ord) in local {
            generators.push(crt_lift(g, pe, q));
            orders.push(ord);
        }
    }
    Ok(UnitGroup { modulus: q, generators, orders })
}

/// A real character mod `q` as its table of values on `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DirichletCharacter {
    modulus: u64,
    values: Vec<i8>,
    is_principal: bool,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn is_principal(&self) -> bool {
        self.is_principal
    }

    pub fn eval(&self, n: u64) -> i8 {
        self.values[(n % self.modulus) as usize]
    }

    /// The principal character mod `q`.
    pub fn principal(q: u64) -> Result<Self> {
        if q < 2 {
            return domain(format!("modulus must be >= 2, got {q}"));
        }
        let values = (0..q).map(|a| i8::from(gcd(a, q) == 1)).collect();
        Ok(Self { modulus: q, values, is_principal: true })
    }
}

/// Every homomorphism `(Z/qZ)^× → {±1}`, extended by 0 off the units.
///
/// There are `2^t` of them, `t` the number of even-order cyclic factors.
/// The principal character comes first.
pub fn enumerate_real_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    let group = unit_group(q)?;
    let even: Vec<usize> = (0..group.orders.len()).filter(|&i| group.orders[i] % 2 == 0).collect();
    let elements = group.elements();
    let mut out = Vec::with_capacity(1 << even.len());
    for choice in 0u64..(1 << even.len()) {
        // Generator i maps to -1 iff its bit in `choice` is set.
        let mut values = vec![0i8; q as usize];
        for (u, exps) in &elements {
            let odd: u64 = even
                .iter()
                .enumerate()
                .filter(|&(bit, _)| choice >> bit & 1 == 1)
                .map(|(_, &i)| exps[i])
                .sum();
            values[*u as usize] = if odd % 2 == 0 { 1 } else { -1 };
        }
        out.push(DirichletCharacter { modulus: q, values, is_principal: choice == 0 });
    }
    Ok(out)
}

/// The residues where `χ` is −1; `λ(n; q, R)` agrees with `χ` on units for this `R`.
pub fn character_like_set(chi: &DirichletCharacter) -> Result<ResidueSet> {
    if chi.is_principal {
        return domain("the principal character has no character-like set");
    }
    ResidueSet::new(
        chi.modulus,
        (0..chi.modulus).filter(|&a| chi.values[a as usize] == -1),
    )
}

/// The non-principal real character whose −1 set is exactly `rs`, if any.
pub fn is_character_like(rs: &ResidueSet) -> Option<DirichletCharacter> {
    if !rs.all_coprime() {
        return None;
    }
    enumerate_real_characters(rs.modulus())
        .ok()?
        .into_iter()
        .filter(|chi| !chi.is_principal)
        .find(|chi| character_like_set(chi).is_ok_and(|s| &s == rs))
}

// B_{2j} for j = 1..=8.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Numerical `L(s, χ)` for a non-principal real character and real `s ∈ (0, 2]`.
///
/// Terms are grouped by period, `f(k) = Σ_a χ(a)(kq + a)^{-s}`, and the tail
/// `Σ_{k ≥ K} f(k)` is replaced by its Euler–Maclaurin expansion. The
/// remainder is bounded by `2ζ(2M)/(2π)^{2M} ∫_K^∞ |f^{(2M)}|`, and `K` is
/// doubled until that bound is below `tol / 2`.
pub fn l_value(chi: &DirichletCharacter, s: f64, tol: f64) -> Result<f64> {
    if chi.is_principal {
        return domain("L(s, chi) needs a non-principal character");
    }
    if !(s > 0.0 && s <= 2.0) {
        return domain(format!("s must lie in (0, 2], got {s}"));
    }
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    const M: usize = 8;
    let q = chi.modulus as f64;
    let weights: Vec<(f64, f64)> = (1..chi.modulus)
        .filter(|&a| chi.values[a as usize] != 0)
        .map(|a| (a as f64, f64::from(chi.values[a as usize])))
        .collect();
    let nweights = weights.len() as f64;

    // (s)_m = s(s+1)...(s+m-1)
    let rising = |m: usize| (0..m).map(|i| s + i as f64).product::<f64>();
    let remainder_bound = |k: f64| {
        let zeta_2m = 1.0 + 2f64.powi(-(2 * M as i32)) * 1.01;
        let front = 2.0 * zeta_2m / (2.0 * std::f64::consts::PI).powi(2 * M as i32);
        front * nweights * rising(2 * M) * q.powf(-s) * k.powf(1.0 - s - 2.0 * M as f64)
            / (s + 2.0 * M as f64 - 1.0)
    };
    let mut k_terms: u64 = 16;
    while remainder_bound(k_terms as f64) > tol / 2.0 {
        k_terms *= 2;
    }

    // Direct part, summed from the small terms upward.
    let mut head = 0.0;
    for k in (0..k_terms).rev() {
        let base = k as f64 * q;
        head += weights.iter().map(|&(a, c)| c * (base + a).powf(-s)).sum::<f64>();
    }

    let k = k_terms as f64;
    let at = |a: f64| k * q + a;
    let integral = if (s - 1.0).abs() < 1e-12 {
        -weights.iter().map(|&(a, c)| c * at(a).ln()).sum::<f64>() / q
    } else {
        -weights.iter().map(|&(a, c)| c * at(a).powf(1.0 - s)).sum::<f64>() / (q * (1.0 - s))
    };
    let f_k = weights.iter().map(|&(a, c)| c * at(a).powf(-s)).sum::<f64>();
    // f^{(m)}(K) = (-1)^m (s)_m q^m Σ χ(a)(Kq+a)^{-s-m}
    let deriv = |m: usize| {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * rising(m)
            * q.powi(m as i32)
            * weights.iter().map(|&(a, c)| c * at(a).powf(-s - m as f64)).sum::<f64>()
    };
    let mut tail = integral + f_k / 2.0;
    let mut factorial = 1.0;
    for j in 1..=M {
        factorial *= ((2 * j - 1) * (2 * j)) as f64;
        tail -= BERNOULLI_EVEN[j - 1] / factorial * deriv(2 * j - 1);
    }
    Ok(head + tail)
}
