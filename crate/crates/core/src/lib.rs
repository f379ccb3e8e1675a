//! Computational pipeline for smooth self-similar imploding profiles of the
//! relativistic Euler equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] — exact rationals, the quadratic field `Q[√15]`, outward
//!   rounded intervals and certified polynomial sign determination;
//! * [`params`] — every scalar constant derived from `(d, p, γ)` and the
//!   inverse of the eigenvalue ratio `κ(γ)`;
//! * [`series`] — the sonic-point Taylor recursion, exact and in extended
//!   precision, with Catalan renormalisation;
//! * [`induction`] — the finite base case and constant inequalities of the
//!   coefficient induction at the limit exponent;
//! * [`phase`] — vector fields, coordinate maps, root curves and regions;
//! * [`barrier`] — far-field and local barriers and their certificates;
//! * [`ode`] — adaptive Runge–Kutta and high-order Taylor integrators;
//! * [`shooting`] — the mismatch function and the bisection in `κ`;
//! * [`profile`] — continuation below the sonic point, across `Y = 0`, out
//!   to the far field, and the density/phase profiles;
//! * [`manifest`] and [`cli`] — reproducible command-line runs.

pub mod barrier;
pub mod cli;
pub mod error;
pub mod induction;
pub mod kernel;
pub mod manifest;
pub mod ode;
pub mod params;
pub mod phase;
pub mod profile;
pub mod series;
pub mod shooting;

pub use error::{Error, Result};
