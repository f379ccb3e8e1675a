//! Decimal rendering of exact values with a prescribed number of significant
//! digits.
//!
//! The value is scaled by `10^k` and floored exactly (up to ±2 units from the
//! two floor operations), with a few guard digits so that the printed digits
//! are those of the exact value.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::field::Rational;
use super::qsqrt15::{QSqrt15, RADICAND};

const GUARD: usize = 6;

fn pow10(k: u32) -> BigInt {
    BigInt::from(10).pow(k)
}

/// `≈ floor(x·10^k)` with error at most two units; `k` may be negative.
fn scaled_floor(x: &QSqrt15, k: i64) -> BigInt {
    let scale = |r: &Rational| -> Rational {
        if k >= 0 {
            r * Rational::from_integer(pow10(k as u32))
        } else {
            r / Rational::from_integer(pow10((-k) as u32))
        }
    };
    let a = scale(&x.a).floor().to_integer();
    let bt = scale(&x.b);
    if bt.is_zero() {
        return a;
    }
    // |b|·√15·10^k = √(15·p²)/q with bt = p/q.
    let p = bt.numer().abs();
    let q = bt.denom().clone();
    let root = (&p * &p * RADICAND).sqrt();
    let fl = root.div_floor(&q);
    let b = if bt.is_negative() { -fl - 1 } else { fl };
    a + b
}

fn magnitude_hint(x: &QSqrt15) -> i64 {
    let v = x.a.numer().bits() as i64 - x.a.denom().bits() as i64;
    let w = x.b.numer().bits() as i64 - x.b.denom().bits() as i64 + 2;
    let bits = if x.b.is_zero() { v } else if x.a.is_zero() { w } else { v.max(w) };
    (bits as f64 * std::f64::consts::LOG10_2).floor() as i64
}

/// Formats `x` in scientific notation with `digits` significant digits
/// (truncated, not rounded).
pub fn to_sig_digits(x: &QSqrt15, digits: usize) -> String {
    if x.a.is_zero() && x.b.is_zero() {
        return format!("0.{}e0", "0".repeat(digits.saturating_sub(1)));
    }
    let want = digits + GUARD;
    // Start from the magnitude estimate and enlarge the scale until enough
    // digits are present (cancellation between the parts can hide digits).
    let mut k = want as i64 - magnitude_hint(x);
    loop {
        let m = scaled_floor(x, k);
        let s = m.abs().to_string();
        if s.len() >= want && !m.is_zero() {
            let exp = s.len() as i64 - 1 - k;
            let mant = &s[..digits];
            let sign = if m.sign() == Sign::Minus { "-" } else { "" };
            return if digits > 1 {
                format!("{sign}{}.{}e{exp}", &mant[..1], &mant[1..])
            } else {
                format!("{sign}{mant}e{exp}")
            };
        }
        k += (want as i64 - s.len() as i64).max(8);
    }
}

/// Formats a rational with `digits` significant digits.
pub fn rational_sig_digits(r: &Rational, digits: usize) -> String {
    to_sig_digits(&QSqrt15::from_rat(r.clone()), digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::field::rational;

    #[test]
    fn sqrt15_digits() {
        let s = to_sig_digits(&QSqrt15::sqrt15(), 30);
        assert_eq!(s, "3.87298334620741688517926539978e0");
    }

    #[test]
    fn small_and_negative_values() {
        assert_eq!(rational_sig_digits(&rational(-1, 3), 5), "-3.3333e-1");
        assert_eq!(rational_sig_digits(&rational(49, 1000), 3), "4.90e-2");
        // 4 − √15 = 0.12701665379258311...
        let x = QSqrt15::new(rational(4, 1), rational(-1, 1));
        assert_eq!(to_sig_digits(&x, 10), "1.270166537e-1");
    }
}
