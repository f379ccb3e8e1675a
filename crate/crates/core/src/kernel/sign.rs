//! Certified sign determination of a polynomial on `[a, b] ⊂ [0, ∞)`.
//!
//! Write `P = P₊ − P₋` where both parts have non-negative coefficients. On a
//! subinterval `[s, t]` with `s ≥ 0` both parts are non-decreasing, hence
//!
//! ```text
//! P₊(s) − P₋(t) ≤ P(τ) ≤ P₊(t) − P₋(s)   for every τ ∈ [s, t].
//! ```
//!
//! The interval is bisected depth-first until every leaf has a strictly
//! signed bound. All bounds are exact field elements, so a `Positive` verdict
//! carries no rounding error.

use std::cmp::Ordering;

use serde::Serialize;

use super::field::{Field, Rational};
use super::poly::ExactPoly;

/// Default maximal bisection depth.
pub const DEFAULT_MAX_DEPTH: u32 = 24;

/// Outcome of a sign certification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Positive,
    Negative,
    Indeterminate,
}

/// A machine-checkable record that a polynomial has a strict sign on an
/// interval (or that the bisection budget was exhausted).
#[derive(Clone, Debug)]
pub struct SignCertificate<F: Field> {
    pub polynomial: ExactPoly<F>,
    pub interval: (Rational, Rational),
    pub verdict: Verdict,
    /// Rational lower bound on `|P|` over the interval (zero unless the
    /// verdict is strict).
    pub margin: Rational,
    /// Sorted leaf endpoints, including `a` and `b`.
    pub breakpoints: Vec<Rational>,
}

/// JSON view of a [`SignCertificate`]: every number is an exact string.
#[derive(Serialize)]
pub struct SignCertificateJson {
    pub poly: Vec<String>,
    pub interval: [String; 2],
    pub verdict: Verdict,
    pub margin: String,
    pub breakpoints: Vec<String>,
}

fn rat_str(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl<F: Field> SignCertificate<F> {
    pub fn to_json(&self) -> SignCertificateJson {
        SignCertificateJson {
            poly: self.polynomial.coeffs().iter().map(F::exact_string).collect(),
            interval: [rat_str(&self.interval.0), rat_str(&self.interval.1)],
            verdict: self.verdict,
            margin: rat_str(&self.margin),
            breakpoints: self.breakpoints.iter().map(rat_str).collect(),
        }
    }

    /// Re-checks the certificate from its breakpoints alone: every leaf must
    /// carry a bound of the claimed sign and at least `margin` in size.
    pub fn recheck(&self) -> bool {
        let (pos, neg) = monotone_split(&self.polynomial);
        let m = F::from_rational(&self.margin);
        let want = match self.verdict {
            Verdict::Positive => Ordering::Greater,
            Verdict::Negative => Ordering::Less,
            Verdict::Indeterminate => return false,
        };
        self.breakpoints.windows(2).all(|w| {
            let (lo, hi) = leaf_bounds(&pos, &neg, &w[0], &w[1]);
            match want {
                Ordering::Greater => lo.fsub(&m).sign() != Ordering::Less && lo.sign() == want,
                _ => hi.fadd(&m).sign() != Ordering::Greater && hi.sign() == want,
            }
        })
    }
}

/// Splits `p` into `(P₊, P₋)` with non-negative coefficients and
/// `p = P₊ − P₋`.
pub fn monotone_split<F: Field>(p: &ExactPoly<F>) -> (ExactPoly<F>, ExactPoly<F>) {
    let mut pos = Vec::with_capacity(p.coeffs().len());
    let mut neg = Vec::with_capacity(p.coeffs().len());
    for c in p.coeffs() {
        if c.sign() == Ordering::Less {
            pos.push(F::fzero());
            neg.push(c.fneg());
        } else {
            pos.push(c.clone());
            neg.push(F::fzero());
        }
    }
    (ExactPoly::new(pos), ExactPoly::new(neg))
}

fn eval_at<F: Field>(p: &ExactPoly<F>, t: &Rational) -> F {
    let mut acc = F::fzero();
    for c in p.coeffs().iter().rev() {
        acc = acc.fmul_rational(t).fadd(c);
    }
    acc
}

/// Lower and upper monotone bounds of `P₊ − P₋` on `[s, t]`.
fn leaf_bounds<F: Field>(
    pos: &ExactPoly<F>,
    neg: &ExactPoly<F>,
    s: &Rational,
    t: &Rational,
) -> (F, F) {
    let lo = eval_at(pos, s).fsub(&eval_at(neg, t));
    let hi = eval_at(pos, t).fsub(&eval_at(neg, s));
    (lo, hi)
}

/// Certifies the sign of `p` on `[a, b]` by depth-first bisection.
///
/// # Panics
/// Panics unless `0 ≤ a ≤ b`; the monotone bounds are only valid on the
/// non-negative half-line.
pub fn poly_sign_on<F: Field>(
    p: &ExactPoly<F>,
    a: &Rational,
    b: &Rational,
    max_depth: u32,
) -> SignCertificate<F> {
    assert!(
        a.sign() != Ordering::Less && a <= b,
        "poly_sign_on requires 0 <= a <= b"
    );
    let (pos, neg) = monotone_split(p);
    let mut breakpoints = vec![a.clone()];
    let mut min_margin: Option<F> = None;
    let mut seen_pos = false;
    let mut seen_neg = false;
    let mut failed = false;
    // Explicit stack of (s, t, depth); right halves pushed first so leaves
    // come out left to right.
    let mut stack = vec![(a.clone(), b.clone(), 0u32)];
    while let Some((s, t, depth)) = stack.pop() {
        let (lo, hi) = leaf_bounds(&pos, &neg, &s, &t);
        let leaf = if lo.sign() == Ordering::Greater {
            Some((true, lo))
        } else if hi.sign() == Ordering::Less {
            Some((false, hi.fneg()))
        } else {
            None
        };
        match leaf {
            Some((is_pos, m)) => {
                if min_margin.as_ref().is_none_or(|cur| m.fcmp(cur) == Ordering::Less) {
                    min_margin = Some(m);
                }
                if is_pos {
                    seen_pos = true;
                } else {
                    seen_neg = true;
                }
                breakpoints.push(t);
                if seen_pos && seen_neg {
                    failed = true;
                    break;
                }
            }
            None => {
                if depth >= max_depth || s == t {
                    failed = true;
                    break;
                }
                let mid = (&s + &t) / Rational::from_integer(2.into());
                stack.push((mid.clone(), t, depth + 1));
                stack.push((s, mid, depth + 1));
            }
        }
    }
    let interval = (a.clone(), b.clone());
    if failed {
        return SignCertificate {
            polynomial: p.clone(),
            interval,
            verdict: Verdict::Indeterminate,
            margin: Rational::from_integer(0.into()),
            breakpoints,
        };
    }
    let verdict = if seen_pos { Verdict::Positive } else { Verdict::Negative };
    let margin = min_margin.map(|m| m.rational_lower_bound()).unwrap_or_default();
    SignCertificate { polynomial: p.clone(), interval, verdict, margin, breakpoints }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::field::rational;

    fn p(c: &[(i64, i64)]) -> ExactPoly<Rational> {
        ExactPoly::new(c.iter().map(|&(n, d)| rational(n, d)).collect())
    }

    #[test]
    fn split_of_t_squared_minus_t() {
        let (a, b) = monotone_split(&p(&[(0, 1), (-1, 1), (1, 1)]));
        assert_eq!(a, p(&[(0, 1), (0, 1), (1, 1)]));
        assert_eq!(b, p(&[(0, 1), (1, 1)]));
        let (z1, z2) = monotone_split(&ExactPoly::<Rational>::zero());
        assert!(z1.is_zero() && z2.is_zero());
    }

    #[test]
    fn split_of_cubic() {
        let (a, b) = monotone_split(&p(&[(-5, 1), (2, 1), (0, 1), (3, 1)]));
        assert_eq!(a, p(&[(0, 1), (2, 1), (0, 1), (3, 1)]));
        assert_eq!(b, p(&[(5, 1)]));
    }

    #[test]
    fn t_plus_one_is_positive_with_margin_one() {
        let c = poly_sign_on(&p(&[(1, 1), (1, 1)]), &rational(0, 1), &rational(1, 1), 24);
        assert_eq!(c.verdict, Verdict::Positive);
        assert_eq!(c.margin, rational(1, 1));
        assert!(c.recheck());
    }

    #[test]
    fn t_minus_three_is_negative() {
        let c = poly_sign_on(&p(&[(-3, 1), (1, 1)]), &rational(0, 1), &rational(1, 1), 24);
        assert_eq!(c.verdict, Verdict::Negative);
        assert_eq!(c.margin, rational(2, 1));
        assert!(c.recheck());
    }

    #[test]
    fn quadratic_needs_subdivision() {
        // min of t² − t + 3/8 on [0,1] is 1/8 at t = 1/2.
        let q = p(&[(3, 8), (-1, 1), (1, 1)]);
        let c = poly_sign_on(&q, &rational(0, 1), &rational(1, 1), 24);
        assert_eq!(c.verdict, Verdict::Positive);
        assert!(c.breakpoints.len() > 2);
        assert!(c.margin > rational(0, 1) && c.margin <= rational(1, 8));
        assert!(c.recheck());
        let shallow = poly_sign_on(&q, &rational(0, 1), &rational(1, 1), 0);
        assert_eq!(shallow.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn sign_change_is_indeterminate() {
        let c = poly_sign_on(&p(&[(-1, 2), (1, 1)]), &rational(0, 1), &rational(1, 1), 30);
        assert_eq!(c.verdict, Verdict::Indeterminate);
    }
}
