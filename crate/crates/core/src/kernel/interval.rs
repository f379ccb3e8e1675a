//! Closed `f64` intervals with outward rounding.
//!
//! Each operation computes the endpoints with round-to-nearest and then
//! widens them by one ulp, which is enough to enclose the exact image of a
//! single IEEE operation. This type serves exploratory numerics only;
//! certificates use the exact kernel.

use std::fmt;

use crate::error::{Error, Result};

/// Arithmetic operation selector for [`interval_ops`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A closed interval `[lo, hi]` of extended reals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Creates `[lo, hi]`.
    ///
    /// # Panics
    /// Panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn outward(lo: f64, hi: f64) -> Self {
        Self { lo: lo.next_down(), hi: hi.next_up() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::outward(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::outward(self.lo - o.hi, self.hi - o.lo)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::outward(lo, hi)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.contains_zero() {
            return Err(Error::DivisionByIntervalContainingZero { lo: o.lo, hi: o.hi });
        }
        let q = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self::outward(lo, hi))
    }
}

/// Applies `op` to `x` and `y`, returning an enclosure of the exact image.
pub fn interval_ops(x: &Interval, y: &Interval, op: IntervalOp) -> Result<Interval> {
    match op {
        IntervalOp::Add => Ok(x.add(y)),
        IntervalOp::Sub => Ok(x.sub(y)),
        IntervalOp::Mul => Ok(x.mul(y)),
        IntervalOp::Div => x.div(y),
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_encloses_exact_sum() {
        let r = interval_ops(&Interval::new(1.0, 2.0), &Interval::new(3.0, 4.0), IntervalOp::Add)
            .unwrap();
        assert!(r.contains(4.0) && r.contains(6.0));
        assert!(r.lo > 3.999_999 && r.hi < 6.000_001);
    }

    #[test]
    fn symmetric_product() {
        let x = Interval::new(-1.0, 1.0);
        let r = interval_ops(&x, &x, IntervalOp::Mul).unwrap();
        assert!(r.contains(-1.0) && r.contains(1.0));
        assert!(r.width() < 2.0 + 1e-12);
    }

    #[test]
    fn division_by_interval_containing_zero_fails() {
        let r = interval_ops(&Interval::new(1.0, 2.0), &Interval::new(0.0, 1.0), IntervalOp::Div);
        assert!(matches!(r, Err(Error::DivisionByIntervalContainingZero { .. })));
    }
}
