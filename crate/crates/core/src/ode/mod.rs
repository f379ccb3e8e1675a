//! Integrators for the three parametrisations of the profile ODE.
//!
//! * [`rk`] — adaptive Dormand–Prince 5(4) in double precision with dense
//!   output and event location (far-field leg, quadratures);
//! * [`taylor`] — arbitrary-order Taylor stepping in MPFR for the `(Y, U)`
//!   and desingularised systems near the sonic point, where solutions leaving
//!   the sonic point separate like `Y^κ` and double precision is far too
//!   short.

use serde::Serialize;

pub mod rk;
pub mod taylor;

pub use rk::{dopri5, DenseSegment, RkOptions, RkSolution};
pub use taylor::{integrate_taylor, DesingSystem, TaylorOptions, TaylorSystem, TaylorTrajectory, YuSystem};

/// Which parametrisation a trajectory uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SystemKind {
    /// `dV/dZ = Δ_V/Δ_Z`, independent variable `Z`.
    Zv,
    /// `dU/dY = Δ_U/Δ_Y`, independent variable `Y`.
    Yu,
    /// `(dY/dξ, dU/dξ) = (Δ_Y, Δ_U)`, independent variable `ξ`.
    Desing,
}

/// Events recorded along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// Crossed the upper far-field barrier (exit through `E_{B,1}`).
    ExitUpperEb1,
    /// Crossed the lower far-field barrier (exit through `E_{B,2}`).
    ExitLowerEb2,
    ReachedTarget,
    /// `Δ_Y` changed sign.
    DeltaYVanishing,
    /// `Y` changed sign.
    CrossedYZero,
    /// A user stop condition other than the above.
    Stop,
    StepFailure,
}

/// A located event.
#[derive(Clone, Debug, Serialize)]
pub struct Event {
    pub kind: EventKind,
    /// Value of the independent variable.
    pub at: f64,
    /// State at the event (double precision).
    pub state: Vec<f64>,
}

/// Event function `g(t, x)`; an event fires where `g` changes sign.
pub struct EventSpec<'a> {
    pub kind: EventKind,
    pub terminal: bool,
    pub g: Box<dyn Fn(f64, &[f64]) -> f64 + Sync + 'a>,
}

impl<'a> EventSpec<'a> {
    pub fn new(kind: EventKind, terminal: bool, g: impl Fn(f64, &[f64]) -> f64 + Sync + 'a) -> Self {
        Self { kind, terminal, g: Box::new(g) }
    }
}

/// Tolerance in the independent variable for event location.
pub const EVENT_TOL: f64 = 1e-12;

/// Bisects `f` on `[0, 1]` given opposite signs at the ends; returns the
/// fraction where the sign changes to within `tol`.
pub(crate) fn bisect_fraction(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
