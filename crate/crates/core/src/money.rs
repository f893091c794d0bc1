//! Fixed-point currency amounts and revenue shares.
//!
//! [`Money`] counts whole cents in an `i64` and is never negative.
//! [`Share`] counts millionths of revenue in a `u32` and never exceeds one.
//! Products and scalings round half away from zero, once, at the end.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const CENTS_PER_UNIT: i64 = 100;
const MICROS_PER_UNIT: u32 = 1_000_000;

/// Non-negative amount of currency held at two decimal places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);
    pub const MAX: Money = Money(i64::MAX);

    pub fn from_cents(cents: i64) -> Result<Self> {
        if cents < 0 {
            return Err(Error::NegativeAmount(format_cents(cents)));
        }
        Ok(Money(cents))
    }

    /// Whole currency units. Panics on overflow, which no realistic fixture reaches.
    pub fn from_units(units: u32) -> Self {
        Money(i64::from(units) * CENTS_PER_UNIT)
    }

    /// Rounds to the nearest cent. Negative or non-finite input is an error.
    pub fn from_f64(amount: f64) -> Result<Self> {
        if !amount.is_finite() {
            return Err(Error::ParseAmount(amount.to_string()));
        }
        let cents = (amount * CENTS_PER_UNIT as f64).round();
        if cents < 0.0 {
            return Err(Error::NegativeAmount(amount.to_string()));
        }
        if cents >= i64::MAX as f64 {
            return Err(Error::Overflow);
        }
        Ok(Money(cents as i64))
    }

    /// Like [`Money::from_f64`] but clamps negative draws to zero.
    pub fn from_f64_clamped(amount: f64) -> Self {
        Money::from_f64(amount.max(0.0)).unwrap_or(Money::MAX)
    }

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / CENTS_PER_UNIT as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Money) -> Result<Money> {
        self.0
            .checked_add(other.0)
            .map(Money)
            .ok_or(Error::Overflow)
    }

    /// Subtraction that refuses to go below zero.
    pub fn checked_sub(self, other: Money) -> Result<Money> {
        let diff = self.0 - other.0;
        Money::from_cents(diff)
    }

    pub fn saturating_sub(self, other: Money) -> Money {
        Money((self.0 - other.0).max(0))
    }

    /// `self × factor` rounded to the cent; `factor` must be finite and ≥ 0.
    pub fn scale(self, factor: f64) -> Result<Money> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::param(
                "factor",
                format!("{factor} is not a finite non-negative number"),
            ));
        }
        let cents = (self.0 as f64 * factor).round();
        if cents >= i64::MAX as f64 {
            return Err(Error::Overflow);
        }
        Ok(Money(cents as i64))
    }

    /// Renders without trailing zero decimals: `319`, `0.4`, `12.05`.
    pub fn to_compact_string(self) -> String {
        let full = self.to_string();
        let trimmed = full.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    }
}

fn format_cents(cents: i64) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_cents(self.0))
    }
}

impl FromStr for Money {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cents = parse_fixed(s.trim(), 2).ok_or_else(|| Error::ParseAmount(s.to_string()))?;
        Money::from_cents(cents)
    }
}

/// Parses a plain decimal literal into an integer count of `10^-places` units.
/// Rejects literals carrying more precision than `places`.
fn parse_fixed(s: &str, places: u32) -> Option<i64> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if frac_part.len() > places as usize {
        return None;
    }
    let scale = 10_i64.pow(places);
    let int_value: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut frac_value: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    frac_value *= 10_i64.pow(places - frac_part.len() as u32);
    let value = int_value.checked_mul(scale)?.checked_add(frac_value)?;
    Some(if negative { -value } else { value })
}

impl Add for Money {
    type Output = Money;

    fn add(self, rhs: Money) -> Money {
        self.checked_add(rhs).expect("money overflow")
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(DecimalVisitor::<Money>::default())
    }
}

/// Fraction of revenue in `[0, 1]` at a resolution of `10^-6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Share(u32);

impl Share {
    pub const ZERO: Share = Share(0);
    pub const ONE: Share = Share(MICROS_PER_UNIT);

    pub fn from_micros(micros: u32) -> Result<Self> {
        if micros > MICROS_PER_UNIT {
            return Err(Error::ShareOutOfRange(format_micros(i64::from(micros))));
        }
        Ok(Share(micros))
    }

    /// Rounds to the nearest millionth; values outside `[0, 1]` are errors.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::ShareOutOfRange(value.to_string()));
        }
        let micros = (value * f64::from(MICROS_PER_UNIT)).round();
        if !(0.0..=f64::from(MICROS_PER_UNIT)).contains(&micros) {
            return Err(Error::ShareOutOfRange(value.to_string()));
        }
        Ok(Share(micros as u32))
    }

    /// Clamps into `[0, 1]` before rounding. NaN maps to zero.
    pub fn from_f64_clamped(value: f64) -> Self {
        if value.is_nan() {
            return Share::ZERO;
        }
        Share::from_f64(value.clamp(0.0, 1.0)).unwrap_or(Share::ZERO)
    }

    pub fn micros(self) -> u32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / f64::from(MICROS_PER_UNIT)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `self × amount`, rounded half up to the cent.
    pub fn of(self, amount: Money) -> Money {
        let product = i128::from(self.0) * i128::from(amount.cents());
        let denom = i128::from(MICROS_PER_UNIT);
        let cents = (product + denom / 2) / denom;
        Money(i64::try_from(cents).expect("share of money fits in money"))
    }
}

fn format_micros(micros: i64) -> String {
    let sign = if micros < 0 { "-" } else { "" };
    let abs = micros.unsigned_abs();
    format!("{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_micros(i64::from(self.0)))
    }
}

impl FromStr for Share {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let micros = parse_fixed(s.trim(), 6).ok_or_else(|| Error::ParseAmount(s.to_string()))?;
        let micros = u32::try_from(micros).map_err(|_| Error::ShareOutOfRange(s.to_string()))?;
        Share::from_micros(micros)
    }
}

impl Serialize for Share {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Share {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(DecimalVisitor::<Share>::default())
    }
}

/// Accepts decimal strings as well as bare numbers so scenario files can say
/// either `reservation = "20000.00"` or `reservation = 20000`.
trait DecimalValue: FromStr<Err = Error> + Sized {
    const EXPECTING: &'static str;
    fn from_float(value: f64) -> Result<Self>;
}

impl DecimalValue for Money {
    const EXPECTING: &'static str = "a non-negative decimal amount";
    fn from_float(value: f64) -> Result<Self> {
        Money::from_f64(value)
    }
}

impl DecimalValue for Share {
    const EXPECTING: &'static str = "a share in [0, 1]";
    fn from_float(value: f64) -> Result<Self> {
        Share::from_f64(value)
    }
}

struct DecimalVisitor<T>(std::marker::PhantomData<T>);

impl<T> Default for DecimalVisitor<T> {
    fn default() -> Self {
        DecimalVisitor(std::marker::PhantomData)
    }
}

impl<T: DecimalValue> Visitor<'_> for DecimalVisitor<T> {
    type Value = T;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(T::EXPECTING)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<T, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<T, E> {
        v.to_string().parse().map_err(E::custom)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<T, E> {
        v.to_string().parse().map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<T, E> {
        T::from_float(v).map_err(E::custom)
    }
}
