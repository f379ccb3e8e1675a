//! The minimal exact-field interface used by polynomials and certificates.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator (guaranteed by `num_rational`).
pub type Rational = BigRational;

/// Builds the rational `num/den`.
///
/// # Panics
/// Panics if `den == 0`.
pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// An ordered field with exact arithmetic and exact sign determination.
///
/// Implemented for [`Rational`] and [`crate::kernel::QSqrt15`]. The
/// methods carry an `f` prefix to stay clear of the `std::ops` traits, which
/// the concrete types also implement.
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn fzero() -> Self;
    fn fone() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(v: i64) -> Self {
        Self::from_rational(&rational(v, 1))
    }
    fn fadd(&self, o: &Self) -> Self;
    fn fsub(&self, o: &Self) -> Self;
    fn fmul(&self, o: &Self) -> Self;
    fn fneg(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn finv(&self) -> Option<Self>;
    /// Exact sign: `Less`, `Equal` or `Greater` than zero.
    fn sign(&self) -> Ordering;
    /// Nearest-ish `f64` approximation (may overflow to ±∞ for huge values).
    fn to_f64(&self) -> f64;
    /// A rational `r` with `r ≤ self`, tight to roughly 60 decimal digits.
    fn rational_lower_bound(&self) -> Rational;
    /// Canonical exact string (`num/den`, or `a + b*sqrt(15)` for the
    /// quadratic field).
    fn exact_string(&self) -> String;

    fn fis_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
    fn fmul_rational(&self, r: &Rational) -> Self {
        self.fmul(&Self::from_rational(r))
    }
    fn fabs(&self) -> Self {
        if self.sign() == Ordering::Less {
            self.fneg()
        } else {
            self.clone()
        }
    }
    fn fcmp(&self, o: &Self) -> Ordering {
        self.fsub(o).sign()
    }
}

impl Field for Rational {
    fn fzero() -> Self {
        Zero::zero()
    }
    fn fone() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
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
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn sign(&self) -> Ordering {
        if self.is_negative() {
            Ordering::Less
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn rational_lower_bound(&self) -> Rational {
        self.clone()
    }
    fn exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Converts a rational to `f64`, robust against numerators and denominators
/// that individually overflow `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // Keep ~64 significant bits of each part, then rescale by a power of two.
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (r.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    let e = ns - ds;
    n / d * 2f64.powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}
