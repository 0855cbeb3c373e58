//! Arbitrary-precision reals with a thread-local working precision.
//!
//! The constructions shrink their scales doubly exponentially from one game
//! round to the next (the eighth round of a stock run works at radii near
//! `1e-1073`), far below what `f64` can resolve next to coordinates of order
//! one. Every coordinate, value and parameter is therefore a [`Real`]. Each
//! arithmetic operation rounds to nearest-even at the precision returned by
//! [`working_precision`]; routines that probe a scale `r` raise the precision
//! with [`with_min_precision`] and [`bits_for_scale`] before sampling.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use astro_float::{BigFloat, RoundingMode, Sign};
use num_bigint::BigUint;

/// Precision used when nothing else has been requested.
pub const DEFAULT_PRECISION: usize = 256;

/// Guard bits added on top of the bits needed to separate a scale from one.
const SCALE_GUARD_BITS: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static PRECISION: Cell<usize> = const { Cell::new(DEFAULT_PRECISION) };
}

/// Mantissa bits used by arithmetic on the current thread.
pub fn working_precision() -> usize {
    PRECISION.with(|p| p.get())
}

/// Runs `f` with the working precision set to exactly `bits`, restoring the
/// previous value afterwards (also on unwind).
pub fn with_precision<R>(bits: usize, f: impl FnOnce() -> R) -> R {
    struct Restore(usize);
    impl Drop for Restore {
        fn drop(&mut self) {
            PRECISION.with(|p| p.set(self.0));
        }
    }
    let bits = bits.max(64).next_multiple_of(64);
    let _restore = Restore(PRECISION.with(|p| p.replace(bits)));
    f()
}

/// Runs `f` with at least `bits` of working precision.
pub fn with_min_precision<R>(bits: usize, f: impl FnOnce() -> R) -> R {
    with_precision(bits.max(working_precision()), f)
}

/// Bits needed to resolve offsets of size `scale` next to coordinates of
/// magnitude `magnitude` with a comfortable number of guard bits left over.
pub fn bits_for_scale(scale: &Real, magnitude: &Real) -> usize {
    if scale.is_zero() || !scale.is_finite() {
        return DEFAULT_PRECISION;
    }
    let hi = magnitude.abs().max(&Real::one()).exponent2();
    let lo = scale.abs().exponent2();
    let gap = (hi - lo).max(0) as usize;
    (gap + SCALE_GUARD_BITS).max(DEFAULT_PRECISION)
}

/// A real number stored as a binary floating-point value of arbitrary
/// precision.
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_word(0, 64))
    }

    pub fn one() -> Self {
        Real(BigFloat::from_word(1, 64))
    }

    pub fn infinity() -> Self {
        Real(astro_float::INF_POS)
    }

    /// Exact conversion; every finite `f64` is representable.
    pub fn from_f64(x: f64) -> Self {
        Real(BigFloat::from_f64(x, 64))
    }

    pub fn from_i64(x: i64) -> Self {
        Real(BigFloat::from_i64(x, 64))
    }

    /// The exact power of two `2^k`.
    pub fn pow2(k: i32) -> Self {
        let mut b = BigFloat::from_word(1, 64);
        b.set_exponent(k + 1);
        Real(b)
    }

    /// `p / q` rounded at the working precision.
    pub fn ratio(p: i64, q: i64) -> Self {
        Real::from_i64(p) / Real::from_i64(q)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    /// Newton iteration from an `f64` estimate, carried 64 bits beyond the
    /// working precision and rounded once. Exact squares come out exact.
    pub fn sqrt(&self) -> Self {
        let p = working_precision();
        let Some(e) = self.0.exponent().filter(|_| self.is_finite() && !self.is_zero() && !self.is_negative()) else {
            return Real(self.0.sqrt(p, RM));
        };
        // x = m 2^(2j) with m in [0.5, 2)
        let j = e.div_euclid(2);
        let mut m = self.0.clone();
        m.set_exponent(e - 2 * j);
        let e0 = Real(m).to_f64();
        let q = p + 64;
        let mut y = BigFloat::from_f64(e0.sqrt(), 64);
        y.set_exponent(y.exponent().expect("nonzero estimate") + j);
        let mut bits = 48;
        while bits < q + 16 {
            let t = self.0.div(&y, q, RM).add(&y, q, RM);
            y = t.clone();
            y.set_exponent(t.exponent().expect("positive iterate") - 1);
            bits *= 2;
        }
        y.set_precision(p, RM).expect("precision is positive");
        Real(y)
    }

    pub fn max(&self, other: &Real) -> Real {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn min(&self, other: &Real) -> Real {
        if other < self {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Binary exponent `e` with `2^(e-1) <= |self| < 2^e`; zero maps to
    /// `i32::MIN`.
    pub fn exponent2(&self) -> i32 {
        if self.0.is_zero() {
            return i32::MIN;
        }
        self.0.exponent().unwrap_or(i32::MAX)
    }

    /// Nearest `f64`, truncating the mantissa; values below the `f64` range
    /// flush to (signed) zero and values above it saturate to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let top = match words.last() {
            Some(&w) if w != 0 => w,
            _ => return 0.0,
        };
        // value = 0.m * 2^e = top * 2^(e - 64) to within the discarded words
        let mag = ldexp(top as f64, e as i64 - 64);
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Exact textual form used by artifacts.
    ///
    /// Values that are exactly an `f64` print as the shortest round-tripping
    /// decimal (`0.5`, `1e-300`); anything else prints as a decimal integer
    /// mantissa with a binary exponent, `<m>p<e>` meaning `m * 2^e`.
    pub fn to_numeral(&self) -> String {
        if !self.is_finite() {
            return if self.0.is_nan() {
                "nan".into()
            } else if self.0.is_inf_pos() {
                "inf".into()
            } else {
                "-inf".into()
            };
        }
        let f = self.to_f64();
        if f.is_finite() && (f != 0.0 || self.is_zero()) && Real::from_f64(f) == *self {
            return format!("{f:?}");
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return "nan".into();
        };
        let mut digits = Vec::with_capacity(words.len() * 2);
        for w in words {
            digits.push(*w as u32);
            digits.push((*w >> 32) as u32);
        }
        let mut m = BigUint::from_slice(&digits);
        let mut exp = e as i64 - 64 * words.len() as i64;
        let tz = m.trailing_zeros().unwrap_or(0);
        m >>= tz;
        exp += tz as i64;
        let s = if sign == Sign::Neg { "-" } else { "" };
        format!("{s}{m}p{exp}")
    }

    /// Parses the output of [`Real::to_numeral`] (or any decimal `f64`
    /// literal) without rounding.
    pub fn parse_numeral(s: &str) -> Result<Real, ParseRealError> {
        let t = s.trim();
        match t {
            "inf" | "+inf" => return Ok(Real::infinity()),
            "-inf" => return Ok(-Real::infinity()),
            _ => {}
        }
        if let Some((mant, exp)) = t.split_once('p') {
            let (neg, digits) = match mant.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, mant),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseRealError(s.to_string()));
            }
            let m = BigUint::from_str(digits).map_err(|_| ParseRealError(s.to_string()))?;
            let exp: i64 = exp.parse().map_err(|_| ParseRealError(s.to_string()))?;
            if m.bits() == 0 {
                return Ok(Real::zero());
            }
            let words = m.to_u64_digits();
            let e = exp + 64 * words.len() as i64;
            let e = i32::try_from(e).map_err(|_| ParseRealError(s.to_string()))?;
            let sign = if neg { Sign::Neg } else { Sign::Pos };
            let b = BigFloat::from_words(&words, sign, e);
            if b.is_nan() {
                return Err(ParseRealError(s.to_string()));
            }
            return Ok(Real(b));
        }
        let f: f64 = t.parse().map_err(|_| ParseRealError(s.to_string()))?;
        if !f.is_finite() {
            return Err(ParseRealError(s.to_string()));
        }
        Ok(Real::from_f64(f))
    }

    /// Decimal rendering for humans, about 17 significant digits. Works
    /// outside the `f64` range as well.
    pub fn display_short(&self) -> String {
        let f = self.to_f64();
        if f == 0.0 && !self.is_zero() && self.is_finite() {
            // m * 2^e with m in [1/2, 1), rewritten as a decimal mantissa
            let e = self.exponent2();
            let m = (self * Real::pow2(-e)).to_f64();
            let t = e as f64 * std::f64::consts::LOG10_2;
            let k = t.floor();
            let mut mant = m * 10f64.powf(t - k);
            let mut k = k as i64;
            while mant.abs() < 1.0 {
                mant *= 10.0;
                k -= 1;
            }
            return format!("{mant:.15}e{k}");
        }
        if f == 0.0 || (1e-4..1e15).contains(&f.abs()) {
            format!("{f}")
        } else {
            format!("{f:e}")
        }
    }
}

/// Multiplies `x` by `2^k` without intermediate overflow or underflow.
fn ldexp(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed numeral {0:?}")]
pub struct ParseRealError(pub String);

impl FromStr for Real {
    type Err = ParseRealError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Real::parse_numeral(s)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_short())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_short())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::from_f64(x)
    }
}

impl From<i64> for Real {
    fn from(x: i64) -> Self {
        Real::from_i64(x)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$method(&rhs.0, working_precision(), RM))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        self.0 = self.0.add(&rhs.0, working_precision(), RM);
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

impl serde::Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_numeral())
    }
}

impl<'de> serde::Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Real::parse_numeral(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_display_covers_tiny_values() {
        assert_eq!(Real::from_f64(0.5).display_short(), "0.5");
        assert_eq!(Real::from_f64(-1e-20).display_short(), "-1e-20");
        let t = Real::pow2(-4000).display_short();
        assert!(t.starts_with("7.586") && t.ends_with("e-1205"), "{t}");
    }

    #[test]
    fn f64_values_round_trip_as_short_decimals() {
        for x in [0.5, -3.25, 1e-300, 0.0, 123456.789] {
            let r = Real::from_f64(x);
            let s = r.to_numeral();
            assert_eq!(s, format!("{x:?}"));
            assert_eq!(Real::parse_numeral(&s).unwrap(), r);
            assert_eq!(r.to_f64(), x);
        }
    }

    #[test]
    fn high_precision_values_round_trip_exactly() {
        with_precision(4096, || {
            let third = Real::one() / Real::from_i64(3);
            let tiny = Real::pow2(-3000) * &third;
            for v in [third.clone(), -third, tiny.clone(), Real::one() + &tiny] {
                let s = v.to_numeral();
                assert!(s.contains('p'), "{s}");
                assert_eq!(Real::parse_numeral(&s).unwrap(), v);
            }
        });
    }

    #[test]
    fn precision_controls_resolution_of_tiny_offsets() {
        let tiny = Real::pow2(-2000);
        let lost = with_precision(256, || (Real::one() + &tiny) - Real::one());
        assert!(lost.is_zero());
        let kept = with_precision(bits_for_scale(&tiny, &Real::one()), || {
            (Real::one() + &tiny) - Real::one()
        });
        assert_eq!(kept, tiny);
    }

    #[test]
    fn pow2_is_exact() {
        assert_eq!(Real::pow2(-3).to_f64(), 0.125);
        assert_eq!(Real::pow2(0), Real::one());
        assert_eq!(Real::pow2(-3000).exponent2(), -2999);
    }

    #[test]
    fn malformed_numerals_are_rejected() {
        for s in ["", "abc", "1p", "p3", "--1p2", "1.5p2", "nan"] {
            assert!(Real::parse_numeral(s).is_err(), "{s}");
        }
    }

    #[test]
    fn to_f64_handles_extremes() {
        assert_eq!(Real::pow2(-5000).to_f64(), 0.0);
        assert_eq!(Real::pow2(5000).to_f64(), f64::INFINITY);
        assert_eq!(Real::pow2(-1074).to_f64(), f64::from_bits(1));
    }

    #[test]
    fn sqrt_matches_reference() {
        for x in [2.0, 0.5, 1e-300, 3.7e200, 0.3, 1.0 + 1e-15] {
            let x = Real::from_f64(x);
            let reference = Real(x.0.sqrt(working_precision(), RM));
            let ours = x.sqrt();
            let rel = ((&ours - &reference) / &reference).abs();
            assert!(rel <= Real::pow2(-250), "{x}: {rel}");
        }
        for x in [0.25, 9.0, 1e-200, 0.0] {
            let r = Real::from_f64(x);
            assert_eq!((&r * &r).sqrt(), r);
        }
        let tiny = Real::pow2(-4001);
        assert_eq!((&tiny * &tiny).sqrt(), tiny);
        assert!(Real::from_f64(-1.0).sqrt().is_nan());
        with_precision(4096, || {
            let two = Real::from_i64(2);
            let s = two.sqrt();
            assert!((&(&s * &s) - &two).abs() <= Real::pow2(-4090));
        });
    }
}
