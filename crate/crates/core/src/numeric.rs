//! Scalar abstraction shared by the double-precision and exact-rational paths.

use std::fmt::{Debug, Display};

use num::{BigInt, BigRational, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Tolerance used for feasibility and tightness comparisons in double mode.
pub const EPS: f64 = 1e-9;

/// Arithmetic used by the feasibility checks, the constructors and the exact
/// evaluators. Implemented for `f64` and for `BigRational`.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Whether comparisons are exact (rational mode).
    const EXACT: bool;

    /// Tolerance for slack comparisons: `1e-9` for doubles, zero when exact.
    fn eps() -> Self;

    /// Masses at or below this value are treated as zero.
    fn mass_floor() -> Self;

    /// Tolerance on probability vectors summing to one.
    fn sum_tolerance() -> Self;

    fn from_f64_lossy(v: f64) -> Self;

    /// Nearest value to an exact rational (exact in rational mode).
    fn from_rational(r: &BigRational) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }

    fn powu(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    fn is_tight(&self) -> bool {
        self.abs() <= Self::eps()
    }

    fn is_violation(&self) -> bool {
        *self < -Self::eps()
    }

    fn has_mass(&self) -> bool {
        *self > Self::mass_floor()
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// Clamp into `[lo, hi]`.
    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        Self::min_of(Self::max_of(self, lo), hi)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn eps() -> Self {
        EPS
    }

    fn mass_floor() -> Self {
        1e-13
    }

    fn sum_tolerance() -> Self {
        1e-12
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn eps() -> Self {
        BigRational::zero()
    }

    fn mass_floor() -> Self {
        BigRational::zero()
    }

    fn sum_tolerance() -> Self {
        BigRational::zero()
    }

    /// Reads the shortest decimal representation of `v`, so `0.1` becomes `1/10`
    /// rather than its binary expansion.
    fn from_f64_lossy(v: f64) -> Self {
        parse_rational(&format!("{v}"))
            .or_else(|| BigRational::from_f64(v))
            .unwrap_or_else(BigRational::zero)
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Parses `"p/q"`, integers and decimal literals (with optional exponent)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&digits, 10).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num::pow(ten, scale as usize);
    } else {
        value /= num::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Converts a vector between scalar types via `f64` (for rationals this is exact
/// only up to double precision).
pub fn to_f64_vec<S: Scalar>(values: &[S]) -> Vec<f64> {
    values.iter().map(Scalar::to_f64_lossy).collect()
}

/// Distribution of the number of successes among independent Bernoulli trials
/// with the given success probabilities.
pub fn poisson_binomial<S: Scalar>(params: &[S]) -> Vec<S> {
    let mut pmf = vec![S::one()];
    for p in params {
        let q = S::one() - p.clone();
        let mut next = vec![S::zero(); pmf.len() + 1];
        for (k, mass) in pmf.iter().enumerate() {
            next[k] = next[k].clone() + mass.clone() * q.clone();
            next[k + 1] = next[k + 1].clone() + mass.clone() * p.clone();
        }
        pmf = next;
    }
    pmf
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
