//! Closed forms, predicted constants and least-squares fits.

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{euler_phi, gcd, is_prime};
use crate::characters::{enumerate_real_characters, is_character_like, l_value};
use crate::error::{domain, Error, Result};
use crate::residue::ResidueSet;
use crate::sieve::{class_mask, for_each_parity_block};
use crate::summatory::{SeriesKind, SummatorySeries};

/// `Σ_{n≤x} λ(n; 4, 3)` in `O(log x)` steps.
///
/// Odd `n` contribute `+1, −1` on `n ≡ 1, 3 mod 4`, and `λ(2m; 4, 3) = λ(m; 4, 3)`,
/// so `L(x) = [x mod 4 ∈ {1, 2}] + L(⌊x/2⌋)`.
pub fn explicit_l43(x: u64) -> u64 {
    let mut x = x;
    let mut total = 0;
    while x > 0 {
        total += u64::from(matches!(x % 4, 1 | 2));
        x /= 2;
    }
    total
}

/// `(Σ_{odd n≤x} (χ₄ ∗ λ₄)(n), #{odd m ≤ √x})` with `λ₄(n) = λ(n; 4, 1)`.
///
/// On odd arguments the convolution is the indicator of squares, so the
/// two sides agree.
pub fn chi4_convolution_check(x: u64) -> Result<(i64, i64)> {
    if x == 0 {
        return domain("x must be >= 1");
    }
    // odd_prefix[m] = Σ_{odd b ≤ m} λ₄(b)
    let rs = ResidueSet::single(4, 1)?;
    let mask = class_mask(&rs, 4)?;
    let mut odd_prefix = vec![0i64; x as usize + 1];
    let mut lam = Vec::new();
    for_each_parity_block(x.max(2), 4, 1 << 18, |b| {
        b.lambda_into(mask, &mut lam);
        for (i, &v) in lam.iter().enumerate() {
            let n = (b.lo() + i as u64) as usize;
            if n <= x as usize {
                odd_prefix[n] = odd_prefix[n - 1] + if n % 2 == 1 { i64::from(v) } else { 0 };
            }
        }
    })?;
    let lhs = (1..=x)
        .step_by(2)
        .map(|a| {
            let chi = if a % 4 == 1 { 1 } else { -1 };
            chi * odd_prefix[(x / a) as usize]
        })
        .sum();
    let rhs = (x.isqrt() as i64 + 1) / 2;
    Ok((lhs, rhs))
}

/// `∏ (p − 1)/(p + 1)` over the primes lying in the given classes, all of
/// which share a factor with `q`. Such a class holds at most one prime,
/// `gcd(b, q)`, and only when that gcd is prime and congruent to `b`.
pub fn product_constant(rs: &ResidueSet) -> Result<Ratio<u64>> {
    let q = rs.modulus();
    if let Some(&b) = rs.residues().iter().find(|&&b| gcd(b, q) == 1) {
        return domain(format!("residue {b} is coprime to {q}"));
    }
    // The only prime that can lie in a non-coprime class b is gcd(b, q).
    Ok(rs
        .residues()
        .iter()
        .filter_map(|&b| {
            let d = gcd(b, q);
            (is_prime(d) && d % q == b).then_some(d)
        })
        .fold(Ratio::from_integer(1), |acc, p| acc * Ratio::new(p - 1, p + 1)))
}

/// Proportion of the coprime classes covered: `#(R ∩ units) / φ(q)`.
pub fn sifting_density(rs: &ResidueSet) -> Ratio<u64> {
    let q = rs.modulus();
    let coprime = rs.residues().iter().filter(|&&a| gcd(a, q) == 1).count() as u64;
    Ratio::new(coprime, euler_phi(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum B0Sign {
    Positive,
    Negative,
    NotApplicable,
}

/// How a coprime set with `2r = φ(q)` relates to the real characters mod `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    /// `2r ≠ φ(q)`: main term `b₀ x (log x)^{2r/φ(q) − 2}`.
    LogPower,
    /// λ agrees with a real character on units; sums grow at most like `log x`.
    CharacterLike,
    /// Complement of a character-like set; `x^{1/2}` growth expected.
    Complement,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    /// Closed-form leading constant when one is known.
    pub leading_constant: Option<f64>,
    pub log_exponent: f64,
    pub power_exponent: f64,
    pub sign_of_b0: B0Sign,
    pub class: GrowthClass,
}

/// Predicted main term of `L(x; q, R)` for a set of coprime residues.
pub fn predicted_asymptote(rs: &ResidueSet) -> Result<AsymptoticPrediction> {
    let q = rs.modulus();
    if !rs.all_coprime() {
        return domain(format!("{rs}: every residue must be coprime to {q}"));
    }
    let r = rs.len() as u64;
    let phi = euler_phi(q);
    let log_exponent = 2.0 * r as f64 / phi as f64 - 2.0;
    let (sign_of_b0, class) = match (2 * r).cmp(&phi) {
        std::cmp::Ordering::Less => (B0Sign::Positive, GrowthClass::LogPower),
        std::cmp::Ordering::Greater => (B0Sign::Negative, GrowthClass::LogPower),
        std::cmp::Ordering::Equal => {
            let units = ResidueSet::units(q)?;
            let rest: Vec<u64> =
                units.residues().iter().copied().filter(|a| !rs.residues().contains(a)).collect();
            let class = if is_character_like(rs).is_some() {
                GrowthClass::CharacterLike
            } else if ResidueSet::new(q, rest).ok().and_then(|c| is_character_like(&c)).is_some() {
                GrowthClass::Complement
            } else {
                GrowthClass::Neither
            };
            (B0Sign::NotApplicable, class)
        }
    };
    let (power_exponent, log_exponent) = match class {
        GrowthClass::LogPower | GrowthClass::Neither => (1.0, log_exponent),
        GrowthClass::CharacterLike => (0.0, 1.0),
        GrowthClass::Complement => (0.5, 0.0),
    };
    let leading_constant = if q == 4 && rs.residues() == [1] {
        Some(l41_sqrt_coefficient()?)
    } else {
        None
    };
    Ok(AsymptoticPrediction { leading_constant, log_exponent, power_exponent, sign_of_b0, class })
}

/// Predicted `c` in `L(x; 4, 1) ~ c·x^{1/2}`: the residue of
/// `ζ(2s)(1 + 2^{−s})/L(s, χ₄)` at `s = 1/2`, times 2.
pub fn l41_sqrt_coefficient() -> Result<f64> {
    let chi4 = enumerate_real_characters(4)?
        .into_iter()
        .find(|c| !c.is_principal())
        .ok_or_else(|| Error::Domain("no non-principal character mod 4".into()))?;
    Ok((1.0 + 2f64.powf(-0.5)) / l_value(&chi4, 0.5, 1e-12)?)
}

/// `(1 + 1/√3) Σ_{k=0}^{k_max} 2^{−k/2−1}`.
pub fn gaps_partial_sum(k_max: u32) -> f64 {
    (1.0 + 3f64.sqrt().recip()) * (0..=k_max).map(|k| 2f64.powf(-(k as f64) / 2.0 - 1.0)).sum::<f64>()
}

/// `(C, C′)`: the `√x` coefficients from one and from four floor corrections.
///
/// Both are `w · Σ_{k≥0} 2^{−k/2−1} = w / (2(1 − 2^{−1/2}))` with
/// `w = 1 + 1/√3` for `C` and `w = 1 + 1/√3 − 1/√5 + 1/√7` for `C′`.
pub fn gaps_constants() -> (f64, f64) {
    let geometric = 1.0 / (2.0 * (1.0 - 2f64.powf(-0.5)));
    let inv = |d: f64| d.sqrt().recip();
    let c = (1.0 + inv(3.0)) * geometric;
    let c_refined = (1.0 + inv(3.0) - inv(5.0) + inv(7.0)) * geometric;
    (c, c_refined)
}

/// A least-squares fit of checkpoint values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub x_range: (u64, u64),
    pub points: usize,
    /// Closed-form prediction for the coefficient, when one exists.
    pub prediction: Option<f64>,
}

/// Unweighted one-parameter fit `value ≈ c·basis(x)` over grid points in `[x_lo, x_hi]`.
fn fit_one(
    points: &[(u64, i64)],
    x_lo: u64,
    x_hi: u64,
    basis: impl Fn(f64) -> f64,
    model: String,
) -> Result<FitResult> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, _)| x >= x_lo && x <= x_hi)
        .map(|&(x, v)| (basis(x as f64), v as f64))
        .collect();
    if used.is_empty() {
        return Err(Error::Domain(format!("no checkpoints in [{x_lo}, {x_hi}]")));
    }
    let ff: f64 = used.iter().map(|(f, _)| f * f).sum();
    let fv: f64 = used.iter().map(|(f, v)| f * v).sum();
    if !(ff > 0.0) {
        return Err(Error::Domain("degenerate basis over the fit range".into()));
    }
    let c = fv / ff;
    let residual_norm = used.iter().map(|(f, v)| (v - c * f).powi(2)).sum::<f64>().sqrt();
    Ok(FitResult {
        model,
        coefficients: vec![c],
        residual_norm,
        x_range: (x_lo, x_hi),
        points: used.len(),
        prediction: None,
    })
}

/// `value ≈ c·√x` over checkpoints in `[x_lo, x_hi]`.
pub fn sqrt_fit(points: &[(u64, i64)], x_lo: u64, x_hi: u64) -> Result<FitResult> {
    fit_one(points, x_lo, x_hi, f64::sqrt, "c*x^(1/2)".to_string())
}

/// [`sqrt_fit`] on a scanned series, with the closed-form prediction for `L(x; 4, 1)`.
pub fn sqrt_coefficient(series: &SummatorySeries, x_lo: u64, x_hi: u64) -> Result<FitResult> {
    let mut fit = sqrt_fit(&series.checkpoints, x_lo, x_hi)?;
    if let SeriesKind::Lambda(rs) = series.spec.kind() {
        if rs.modulus() == 4 && rs.residues() == [1] {
            fit.prediction = Some(l41_sqrt_coefficient()?);
        }
    }
    Ok(fit)
}

/// `value ≈ b₀·x^power·(log x)^log_exponent` over checkpoints in `[x_lo, x_hi]`.
pub fn log_power_points(
    points: &[(u64, i64)],
    power_exponent: f64,
    log_exponent: f64,
    x_lo: u64,
    x_hi: u64,
) -> Result<FitResult> {
    if x_lo < 2 {
        return domain("fit range must start at x >= 2 so log x > 0");
    }
    fit_one(
        points,
        x_lo,
        x_hi,
        |x| x.powf(power_exponent) * x.ln().powf(log_exponent),
        format!("b0*x^{power_exponent}*(log x)^{log_exponent}"),
    )
}

pub fn log_power_fit(
    series: &SummatorySeries,
    power_exponent: f64,
    log_exponent: f64,
    x_lo: u64,
    x_hi: u64,
) -> Result<FitResult> {
    log_power_points(&series.checkpoints, power_exponent, log_exponent, x_lo, x_hi)
}
