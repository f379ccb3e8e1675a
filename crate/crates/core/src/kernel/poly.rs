//! Dense univariate polynomials with exact coefficients.

use std::cmp::Ordering;
use std::fmt;

use super::field::Field;

/// A polynomial `Σ cᵢ tⁱ` with coefficients in an exact field `F`.
///
/// The coefficient vector is indexed by degree and trimmed so that the
/// leading coefficient is nonzero; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPoly<F: Field> {
    coeffs: Vec<F>,
}

impl<F: Field> ExactPoly<F> {
    /// Builds a polynomial from coefficients indexed by degree.
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.fis_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: F) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Self::new(vec![F::fzero(), F::fone()])
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Coefficient of `tⁱ` (zero past the degree).
    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).cloned().unwrap_or_else(F::fzero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: &F) -> F {
        let mut acc = F::fzero();
        for c in self.coeffs.iter().rev() {
            acc = acc.fmul(t).fadd(c);
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i).fadd(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i).fsub(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(F::fneg).collect())
    }

    pub fn scale(&self, s: &F) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.fmul(s)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![F::fzero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].fadd(&a.fmul(b));
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.fmul(&F::from_i64(i as i64)))
                .collect(),
        )
    }

    /// Splits `p = tⁱ·g` with `g(0) ≠ 0` (or `g = 0`), returning `(i, g)`.
    pub fn factor_low_power(&self) -> (usize, Self) {
        let i = self.coeffs.iter().take_while(|c| c.fis_zero()).count();
        if i == self.coeffs.len() {
            return (0, Self::zero());
        }
        (i, Self::new(self.coeffs[i..].to_vec()))
    }

    /// True when every coefficient is `≥ 0`.
    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.sign() != Ordering::Less)
    }
}

impl<F: Field> fmt::Display for ExactPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.fis_zero())
            .map(|(i, c)| match i {
                0 => format!("({c})"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::field::{rational, Rational};

    fn p(c: &[i64]) -> ExactPoly<Rational> {
        ExactPoly::new(c.iter().map(|&x| rational(x, 1)).collect())
    }

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
    }

    #[test]
    fn product_and_derivative() {
        let a = p(&[-1, 1]); // t − 1
        let b = p(&[1, 1]); // t + 1
        assert_eq!(a.mul(&b), p(&[-1, 0, 1]));
        assert_eq!(p(&[5, 3, 2]).derivative(), p(&[3, 4]));
    }

    #[test]
    fn low_power_factorization() {
        let (i, g) = p(&[0, 0, 3, 1]).factor_low_power();
        assert_eq!(i, 2);
        assert_eq!(g, p(&[3, 1]));
    }
}
