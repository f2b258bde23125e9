//! p-adic integers known modulo `p^N` with absolute precision tracking.
//!
//! A [`PAdicInt`] stores a residue `0 <= digits < p^N` together with `N`, the
//! number of known base-`p` digits. Ring operations never raise precision:
//! every result carries the smaller of its operands' precisions.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of known base-`p` digits.
pub const DEFAULT_PRECISION: u32 = 64;

/// Valuation of an element that is only known up to some precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    /// The valuation is certified.
    Exact(u32),
    /// Every known digit vanishes; the valuation is at least this bound.
    AtLeast(u32),
}

impl Valuation {
    /// Largest `b` with `v >= b` known for certain.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn exact(self) -> Option<u32> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }

    /// Valuation of a sum of independent parts whose valuations combine by `min`.
    pub fn min_of(parts: impl IntoIterator<Item = Valuation>, empty: u32) -> Valuation {
        let mut exact: Option<u32> = None;
        let mut bound = u32::MAX;
        let mut any = false;
        for v in parts {
            any = true;
            match v {
                Valuation::Exact(w) => exact = Some(exact.map_or(w, |e| e.min(w))),
                Valuation::AtLeast(b) => bound = bound.min(b),
            }
        }
        if !any {
            return Valuation::AtLeast(empty);
        }
        match exact {
            Some(w) if w < bound => Valuation::Exact(w),
            Some(w) => Valuation::AtLeast(bound.min(w)),
            None => Valuation::AtLeast(bound),
        }
    }

    /// Adds an uncertainty term of valuation at least `tail`.
    pub fn with_tail(self, tail: Option<u32>) -> Valuation {
        match (self, tail) {
            (v, None) => v,
            (Valuation::Exact(w), Some(t)) if w < t => Valuation::Exact(w),
            (v, Some(t)) => Valuation::AtLeast(v.lower_bound().min(t)),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(b) => write!(f, ">= {b}"),
        }
    }
}

/// An element of `Z_p` known modulo `p^N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAdicInt {
    p: u64,
    digits: BigUint,
    precision: u32,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn modulus(p: u64, precision: u32) -> BigUint {
    BigUint::from(p).pow(precision)
}

impl PAdicInt {
    /// Reduces `value` modulo `p^precision`.
    pub fn new(p: u64, value: &BigInt, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrimeP(p));
        }
        Ok(Self::from_bigint(p, value, precision))
    }

    pub(crate) fn from_bigint(p: u64, value: &BigInt, precision: u32) -> Self {
        let m = BigInt::from_biguint(Sign::Plus, modulus(p, precision));
        let r = value.mod_floor(&m);
        PAdicInt {
            p,
            digits: r.to_biguint().expect("mod_floor is nonnegative"),
            precision,
        }
    }

    pub fn from_i64(p: u64, value: i64, precision: u32) -> Self {
        Self::from_bigint(p, &BigInt::from(value), precision)
    }

    pub fn zero(p: u64, precision: u32) -> Self {
        PAdicInt {
            p,
            digits: BigUint::zero(),
            precision,
        }
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::from_i64(p, 1, precision)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> &BigUint {
        &self.digits
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed_value(&self) -> BigInt {
        let m = modulus(self.p, self.precision);
        let d = BigInt::from_biguint(Sign::Plus, self.digits.clone());
        if &self.digits * 2u32 > m {
            d - BigInt::from_biguint(Sign::Plus, m)
        } else {
            d
        }
    }

    /// Residue modulo `p`, if at least one digit is known.
    pub fn residue(&self) -> Option<u64> {
        if self.precision == 0 {
            return None;
        }
        (&self.digits % self.p).to_u64()
    }

    pub fn valuation(&self) -> Valuation {
        if self.digits.is_zero() {
            return Valuation::AtLeast(self.precision);
        }
        let mut v = 0;
        let mut d = self.digits.clone();
        let p = BigUint::from(self.p);
        loop {
            let (q, r) = d.div_rem(&p);
            if !r.is_zero() {
                return Valuation::Exact(v);
            }
            d = q;
            v += 1;
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Config(format!(
                "mismatched primes {} and {}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    fn reduced(p: u64, digits: BigUint, precision: u32) -> Self {
        let digits = digits % modulus(p, precision);
        PAdicInt {
            p,
            digits,
            precision,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.precision.min(other.precision);
        Ok(Self::reduced(self.p, &self.digits + &other.digits, n))
    }

    pub fn neg(&self) -> Self {
        let m = modulus(self.p, self.precision);
        Self::reduced(self.p, (&m - &self.digits % &m) % &m, self.precision)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.precision.min(other.precision);
        Ok(Self::reduced(self.p, &self.digits * &other.digits, n))
    }

    /// Inverse of a unit; precision is preserved.
    pub fn invert(&self) -> Result<Self> {
        match self.valuation() {
            Valuation::Exact(0) => {}
            Valuation::AtLeast(0) => {
                return Err(Error::PrecisionExhausted(
                    "cannot decide whether a p-adic integer with no known digits is a unit".into(),
                ))
            }
            _ => return Err(Error::NotAUnit),
        }
        let m = modulus(self.p, self.precision);
        let inv = self
            .digits
            .modinv(&m)
            .expect("an element prime to p is invertible modulo p^N");
        Ok(Self::reduced(self.p, inv, self.precision))
    }

    /// Exact division by `p`; one digit of precision is consumed.
    pub fn div_p(&self) -> Result<Self> {
        if self.precision == 0 {
            return Ok(self.clone());
        }
        let (q, r) = self.digits.div_rem(&BigUint::from(self.p));
        if !r.is_zero() {
            return Err(Error::Config("p-adic integer is not divisible by p".into()));
        }
        Ok(Self::reduced(self.p, q, self.precision - 1))
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        let n = self.precision.min(precision);
        Self::reduced(self.p, self.digits.clone(), n)
    }

    pub fn is_one(&self) -> bool {
        self.precision == 0 || self.digits.is_one()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.digits.is_zero()
    }
}

impl fmt::Debug for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.signed_value(), self.p, self.precision)
    }
}

impl fmt::Display for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.signed_value();
        if v.is_negative() {
            write!(f, "-{}", v.abs())
        } else {
            write!(f, "{v}")
        }
    }
}
