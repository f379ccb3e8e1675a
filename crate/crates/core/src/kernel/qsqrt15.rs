//! The real quadratic field `Q[√15]`, elements `a + b√15` with rational
//! `a`, `b`.
//!
//! At the limit exponent `γ = ℓ^{-1/2}` with `ℓ = 5/3` every parameter of the
//! problem lives in this field, so the whole limit-case computation (series,
//! induction constants, barrier polynomials) can be done without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::field::{rational_to_f64, Field, Rational};

/// The radicand of the field.
pub const RADICAND: i64 = 15;

/// An element `a + b√15` of `Q[√15]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt15 {
    /// Rational part `a`.
    pub a: Rational,
    /// Coefficient `b` of `√15`.
    pub b: Rational,
}

impl QSqrt15 {
    pub fn new(a: Rational, b: Rational) -> Self {
        Self { a, b }
    }

    /// The rational number `r` viewed as a field element.
    pub fn from_rat(r: Rational) -> Self {
        Self { a: r, b: Rational::zero() }
    }

    /// `√15` itself.
    pub fn sqrt15() -> Self {
        Self { a: Rational::zero(), b: Rational::one() }
    }

    /// Galois conjugate `a − b√15`.
    pub fn conj(&self) -> Self {
        Self { a: self.a.clone(), b: -&self.b }
    }

    /// Field norm `a² − 15b²` (a rational number).
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * BigInt::from(RADICAND)
    }

    /// Returns `√x` as a field element when it exists in `Q[√15]`, i.e. when
    /// `x` or `x/15` is the square of a rational.
    pub fn sqrt_of_rational(x: &Rational) -> Option<Self> {
        if x.is_negative() {
            return None;
        }
        if let Some(r) = rational_sqrt(x) {
            return Some(Self::from_rat(r));
        }
        let y = x / Rational::from_integer(BigInt::from(RADICAND));
        rational_sqrt(&y).map(|r| Self { a: Rational::zero(), b: r })
    }

    /// Exact sign of `a + b√15`, decided by comparing `a²` with `15b²` when
    /// the parts have opposite signs.
    pub fn signum_exact(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                // Opposite signs: the part of larger magnitude decides.
                match self.norm().cmp(&Rational::zero()) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    /// Multiplicative inverse `(a − b√15)/(a² − 15b²)`.
    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(Self { a: &self.a / &n, b: -&self.b / &n })
    }

    pub fn abs(&self) -> Self {
        if self.signum_exact() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Larger of two elements.
    pub fn max(self, o: Self) -> Self {
        if o.fcmp(&self) == Ordering::Greater {
            o
        } else {
            self
        }
    }

    /// Smaller of two elements.
    pub fn min(self, o: Self) -> Self {
        if o.fcmp(&self) == Ordering::Less {
            o
        } else {
            self
        }
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::fone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Rational enclosure `[lo, hi]` of `√15` with `hi − lo = 10^{-digits}`.
    pub fn sqrt15_bounds(digits: u32) -> (Rational, Rational) {
        let scale = BigInt::from(10).pow(digits);
        let r = (BigInt::from(RADICAND) * &scale * &scale).sqrt();
        let lo = Rational::new(r.clone(), scale.clone());
        let hi = Rational::new(r + 1, scale);
        (lo, hi)
    }

    /// Rational enclosure `[lo, hi]` of the element, width `≤ |b|·10^{-digits}`.
    pub fn enclosure(&self, digits: u32) -> (Rational, Rational) {
        let (slo, shi) = Self::sqrt15_bounds(digits);
        let (x, y) = (&self.b * &slo, &self.b * &shi);
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        (&self.a + lo, &self.a + hi)
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

impl fmt::Display for QSqrt15 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt(15)", self.a, self.b)
    }
}

impl<'a> Add<&'a QSqrt15> for &'a QSqrt15 {
    type Output = QSqrt15;
    fn add(self, o: &QSqrt15) -> QSqrt15 {
        QSqrt15 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a> Sub<&'a QSqrt15> for &'a QSqrt15 {
    type Output = QSqrt15;
    fn sub(self, o: &QSqrt15) -> QSqrt15 {
        QSqrt15 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a QSqrt15> for &'a QSqrt15 {
    type Output = QSqrt15;
    fn mul(self, o: &QSqrt15) -> QSqrt15 {
        let r = BigInt::from(RADICAND);
        QSqrt15 {
            a: &self.a * &o.a + &self.b * &o.b * r,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Neg for &QSqrt15 {
    type Output = QSqrt15;
    fn neg(self) -> QSqrt15 {
        QSqrt15 { a: -&self.a, b: -&self.b }
    }
}

impl Neg for QSqrt15 {
    type Output = QSqrt15;
    fn neg(self) -> QSqrt15 {
        QSqrt15 { a: -self.a, b: -self.b }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<QSqrt15> for QSqrt15 {
            type Output = QSqrt15;
            fn $m(self, o: QSqrt15) -> QSqrt15 {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a QSqrt15> for QSqrt15 {
            type Output = QSqrt15;
            fn $m(self, o: &QSqrt15) -> QSqrt15 {
                (&self).$m(o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Field for QSqrt15 {
    fn fzero() -> Self {
        Self { a: Rational::zero(), b: Rational::zero() }
    }
    fn fone() -> Self {
        Self { a: Rational::one(), b: Rational::zero() }
    }
    fn from_rational(r: &Rational) -> Self {
        Self::from_rat(r.clone())
    }
    fn fadd(&self, o: &Self) -> Self {
        self + o
    }
    fn fsub(&self, o: &Self) -> Self {
        self - o
    }
    fn fmul(&self, o: &Self) -> Self {
        self * o
    }
    fn fneg(&self) -> Self {
        -self
    }
    fn finv(&self) -> Option<Self> {
        self.inv()
    }
    fn sign(&self) -> Ordering {
        self.signum_exact()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * 15f64.sqrt()
    }
    fn rational_lower_bound(&self) -> Rational {
        self.enclosure(60).0
    }
    fn exact_string(&self) -> String {
        format!(
            "{}/{} + {}/{}*sqrt(15)",
            self.a.numer(),
            self.a.denom(),
            self.b.numer(),
            self.b.denom()
        )
    }
    fn fmul_rational(&self, r: &Rational) -> Self {
        Self { a: &self.a * r, b: &self.b * r }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::field::rational;

    fn q(a: (i64, i64), b: (i64, i64)) -> QSqrt15 {
        QSqrt15::new(rational(a.0, a.1), rational(b.0, b.1))
    }

    #[test]
    fn sign_of_mixed_elements() {
        // 4 − √15 > 0 since 16 > 15; 3 − √15 < 0.
        assert_eq!(q((4, 1), (-1, 1)).signum_exact(), Ordering::Greater);
        assert_eq!(q((3, 1), (-1, 1)).signum_exact(), Ordering::Less);
        assert_eq!(q((-4, 1), (1, 1)).signum_exact(), Ordering::Less);
        assert_eq!(q((-3, 1), (1, 1)).signum_exact(), Ordering::Greater);
        assert_eq!(QSqrt15::fzero().signum_exact(), Ordering::Equal);
    }

    #[test]
    fn inverse_round_trips() {
        let x = q((75, 1), (1, 1));
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, QSqrt15::fone());
        // 1/(75 + √15) = (75 − √15)/5610
        assert_eq!(y, q((75, 5610), (-1, 5610)));
    }

    #[test]
    fn sqrt_of_three_fifths_is_in_the_field() {
        let g = QSqrt15::sqrt_of_rational(&rational(3, 5)).unwrap();
        assert_eq!(g, q((0, 1), (1, 5)));
        assert_eq!(&g * &g, QSqrt15::from_rat(rational(3, 5)));
        assert!(QSqrt15::sqrt_of_rational(&rational(2, 1)).is_none());
    }

    #[test]
    fn enclosure_contains_float_value() {
        let x = q((1, 3), (-2, 7));
        let (lo, hi) = x.enclosure(30);
        assert!(lo < hi);
        let v = x.to_f64();
        assert!(rational_to_f64(&lo) <= v + 1e-15 && v - 1e-15 <= rational_to_f64(&hi));
    }
}
