// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Integer money and exact fractions.
//!
//! Every settlement path works on [`Money`] (a count of minor units) and
//! [`Fraction`] (an exact rational). Products are floored in `u128` so that
//! no intermediate can overflow for any `u64` amount.

use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedSub};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ProtocolError;

/// A non-negative amount of money in minor units (e.g. cents).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn new(minor_units: u64) -> Self {
        Money(minor_units)
    }

    pub const fn minor_units(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Money) -> Result<Money, ProtocolError> {
        self.0.checked_add(other.0).map(Money).ok_or(ProtocolError::Overflow)
    }

    pub fn checked_sub(self, other: Money) -> Result<Money, ProtocolError> {
        self.0.checked_sub(other.0).map(Money).ok_or(ProtocolError::Underflow {
            have: self.0,
            need: other.0,
        })
    }

    /// `floor(self * fraction)`, exact.
    pub fn mul_floor(self, fraction: Fraction) -> Money {
        let num = *fraction.0.numer() as u128;
        let den = *fraction.0.denom() as u128;
        // fraction <= 1 is not required here, but the result must fit.
        let product = (self.0 as u128 * num) / den;
        Money(u64::try_from(product).expect("floor(amount * fraction) exceeds u64"))
    }

    /// Splits into `parts` equal floored shares; returns `(share, remainder)`.
    pub fn split_even(self, parts: u64) -> (Money, Money) {
        assert!(parts > 0, "split_even into zero parts");
        (Money(self.0 / parts), Money(self.0 % parts))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Money {
    fn from(value: u64) -> Self {
        Money(value)
    }
}

impl<'a> Sum<&'a Money> for Result<Money, ProtocolError> {
    fn sum<I: Iterator<Item = &'a Money>>(mut iter: I) -> Self {
        iter.try_fold(Money::ZERO, |acc, m| acc.checked_add(*m))
    }
}

/// An exact non-negative rational, serialized as the string `"p/q"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(Ratio<u64>);

impl Fraction {
    pub const ZERO: Fraction = Fraction(Ratio::new_raw(0, 1));
    pub const ONE: Fraction = Fraction(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Result<Self, ProtocolError> {
        if denom == 0 {
            return Err(ProtocolError::MalformedFraction(format!("{numer}/0")));
        }
        Ok(Fraction(Ratio::new(numer, denom)))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn checked_add(self, other: Fraction) -> Option<Fraction> {
        self.0.checked_add(&other.0).map(Fraction)
    }

    /// `1 - self`, or `None` when `self > 1`.
    pub fn complement(self) -> Option<Fraction> {
        (Ratio::from_integer(1u64)).checked_sub(&self.0).map(Fraction)
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Fraction {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ProtocolError::MalformedFraction(s.to_string());
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: u64 = p.parse().map_err(|_| malformed())?;
        let q: u64 = q.parse().map_err(|_| malformed())?;
        if q == 0 {
            return Err(malformed());
        }
        Fraction::new(p, q)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
