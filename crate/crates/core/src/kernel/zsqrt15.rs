//! The ring `Z[√15]` of integer pairs, used by the fast exact recursion.
//!
//! Working with integers instead of reduced rationals avoids a gcd per
//! operation; denominators are cleared up front by a scaling `c·Sⁿ` chosen in
//! the series module.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::field::Rational;
use super::qsqrt15::{QSqrt15, RADICAND};

/// An element `a + b√15` with integer parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZSqrt15 {
    pub a: BigInt,
    pub b: BigInt,
}

impl ZSqrt15 {
    pub fn new(a: BigInt, b: BigInt) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self { a: BigInt::zero(), b: BigInt::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Converts a field element with integral parts; `None` otherwise.
    pub fn from_q(x: &QSqrt15) -> Option<Self> {
        if x.a.is_integer() && x.b.is_integer() {
            Some(Self { a: x.a.to_integer(), b: x.b.to_integer() })
        } else {
            None
        }
    }

    pub fn to_q(&self) -> QSqrt15 {
        QSqrt15::new(Rational::from_integer(self.a.clone()), Rational::from_integer(self.b.clone()))
    }

    pub fn conj(&self) -> Self {
        Self { a: self.a.clone(), b: -&self.b }
    }

    /// Norm `a² − 15b²`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - &self.b * &self.b * RADICAND
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self { a: &self.a * k, b: &self.b * k }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        Self { a: &self.a * k, b: &self.b * k }
    }

    /// Exact division by the integer `k`, or `None` if it does not divide
    /// both parts.
    pub fn div_exact(&self, k: &BigInt) -> Option<Self> {
        let (qa, ra) = self.a.div_rem(k);
        let (qb, rb) = self.b.div_rem(k);
        if ra.is_zero() && rb.is_zero() {
            Some(Self { a: qa, b: qb })
        } else {
            None
        }
    }

    /// Exact quotient `self / q` in `Z[√15]`, or `None` if the quotient is
    /// not integral.
    pub fn div_exact_by(&self, q: &Self) -> Option<Self> {
        let n = q.norm();
        if n.is_zero() {
            return None;
        }
        (self * &q.conj()).div_exact(&n)
    }

    /// Exact sign of `a + b√15`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.sign();
        let sb = self.b.sign();
        match (sa, sb) {
            (Sign::NoSign, _) => sign_to_ordering(sb),
            (_, Sign::NoSign) => sign_to_ordering(sa),
            _ if sa == sb => sign_to_ordering(sa),
            // Mixed signs: the larger of a² and 15b² wins.
            _ => {
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * RADICAND;
                match a2.cmp(&b2) {
                    Ordering::Greater => sign_to_ordering(sa),
                    Ordering::Less => sign_to_ordering(sb),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            Self { a: -&self.a, b: -&self.b }
        } else {
            self.clone()
        }
    }

    pub fn one() -> Self {
        Self { a: BigInt::one(), b: BigInt::zero() }
    }
}

fn sign_to_ordering(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl<'a> Add<&'a ZSqrt15> for &'a ZSqrt15 {
    type Output = ZSqrt15;
    fn add(self, o: &ZSqrt15) -> ZSqrt15 {
        ZSqrt15 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a> Sub<&'a ZSqrt15> for &'a ZSqrt15 {
    type Output = ZSqrt15;
    fn sub(self, o: &ZSqrt15) -> ZSqrt15 {
        ZSqrt15 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a ZSqrt15> for &'a ZSqrt15 {
    type Output = ZSqrt15;
    fn mul(self, o: &ZSqrt15) -> ZSqrt15 {
        ZSqrt15 {
            a: &self.a * &o.a + &self.b * &o.b * RADICAND,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl std::ops::AddAssign<&ZSqrt15> for ZSqrt15 {
    fn add_assign(&mut self, o: &ZSqrt15) {
        self.a += &o.a;
        self.b += &o.b;
    }
}

impl std::ops::SubAssign<&ZSqrt15> for ZSqrt15 {
    fn sub_assign(&mut self, o: &ZSqrt15) {
        self.a -= &o.a;
        self.b -= &o.b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division_detects_non_integral_quotients() {
        let q = ZSqrt15::new(BigInt::from(75), BigInt::from(1));
        let x = ZSqrt15::new(BigInt::from(7), BigInt::from(3));
        let p = &x * &q;
        assert_eq!(p.div_exact_by(&q), Some(x));
        assert_eq!(ZSqrt15::one().div_exact_by(&q), None);
    }

    #[test]
    fn sign_agrees_with_field_sign() {
        for (a, b) in [(4, -1), (3, -1), (-4, 1), (-3, 1), (0, -2), (5, 0), (0, 0), (7, 2)] {
            let z = ZSqrt15::new(BigInt::from(a), BigInt::from(b));
            assert_eq!(z.signum(), z.to_q().signum_exact(), "{a} + {b}√15");
        }
    }
}
