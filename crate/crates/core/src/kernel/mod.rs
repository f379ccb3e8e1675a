//! Scalar kernel: exact fields, outward-rounded intervals, exact polynomials
//! and certified polynomial sign determination.
//!
//! Everything that ends up in a proof-grade certificate is computed here in
//! exact arithmetic (`BigRational` or the quadratic field `Q[√15]`); the
//! floating-point [`Interval`] type only serves exploratory numerics.

pub mod decimal;
pub mod field;
pub mod interval;
pub mod poly;
pub mod qsqrt15;
pub mod sign;
pub mod zsqrt15;

pub use field::{rational, Field, Rational};
pub use interval::Interval;
pub use poly::ExactPoly;
pub use qsqrt15::QSqrt15;
pub use sign::{monotone_split, poly_sign_on, SignCertificate, Verdict, DEFAULT_MAX_DEPTH};
pub use zsqrt15::ZSqrt15;
