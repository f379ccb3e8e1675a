//! Continuation of the matched solution to a global profile.
//!
//! Legs, in order of increasing `Z`:
//!
//! 1. the origin series on `[0, δ_Y]`;
//! 2. the matched sonic leg (`Y` from `Y_F(δ_Y)` down to `0`);
//! 3. the sonic solution continued to `Y < 0` until `Δ_Y` degenerates near
//!    the turning point `Y_I'`;
//! 4. the desingularised system from `(Y_I'/2, U(Y_I'/2))` across `Δ_Y = 0`
//!    (`ξ₁`) and `Y = 0` (`ξ₂`) up to a small positive `Y` (`ξ₃`);
//! 5. the `(Z, V)` system from `(Z₂, V₂) = (𝒵, 𝒱)(ξ₃)` out to `Z_max`.
//!
//! The density `W` and the phase `Φ` are integrated along each leg in the
//! leg's own parameter, which keeps the integrands smooth across the sonic
//! point and the turning point.

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::rk::{dopri5, RkOptions, RkSolution};
use crate::ode::taylor::TaylorStep;
use crate::ode::{integrate_taylor, DesingSystem, EventKind, EventSpec, TaylorTrajectory, YuSystem};
use crate::params::FloatParams;
use crate::phase::{
    field_yu, field_zv, jacobian_zv_of_yu, margins_far, u_delta_u, u_delta_y, u_g, yu_to_zv, PhaseParams,
};
use crate::shooting::{LocalSolution, Setup, ShootResult};

/// Switch to the desingularised system once `|Δ_Y| < SWITCH·|Δ_U|`.
pub const SWITCH_RATIO: f64 = 1e-3;
/// Upper bound of `Y_ds(ξ₃)`.
pub const XI3_Y_CAP: f64 = 0.05;
/// Default outer end of the far leg.
pub const DEFAULT_ZMAX: f64 = 1e4;
/// Tolerance of the double-precision legs and quadratures.
pub const DEFAULT_RK_TOL: f64 = 1e-12;

/// Settings of the profile stage.
#[derive(Clone, Copy, Debug)]
pub struct ProfileConfig {
    pub zmax: f64,
    pub rk_tol: f64,
    /// `n` of the comparison truncation `𝐆_[n]` on `(Y_I', 0)`.
    pub g_order: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { zmax: DEFAULT_ZMAX, rk_tol: DEFAULT_RK_TOL, g_order: 101 }
    }
}

/// The desingularised crossing.
#[derive(Clone, Debug)]
pub struct DesingSegment {
    pub start: (f64, f64),
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    /// First leg (start to `ξ₂`) and second leg (`ξ₂` to `ξ₃`).
    pub legs: [TaylorTrajectory; 2],
    pub checks: DesingChecks,
}

/// Clause-wise results on `(ξ₂, ξ₃]`, evaluated on a dense sampling.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DesingChecks {
    pub samples: usize,
    pub min_y: f64,
    pub max_y: f64,
    /// Smallest `U_ΔY − U`, `U_ΔU − U`, `U_g − U`.
    pub min_margin_delta_y: f64,
    pub min_margin_delta_u: f64,
    pub min_margin_g: f64,
    /// Smallest `U_ds` over the whole desingularised leg.
    pub min_u: f64,
    /// `|Δ_Y(ξ₁)|`.
    pub delta_y_at_xi1: f64,
    /// `|Y_ds(ξ₂)|`.
    pub y_at_xi2: f64,
    /// Relative mismatch with the `(Y, U)` leg where both exist (`ξ < ξ₁`).
    pub overlap_error: f64,
    pub max_ode_residual: f64,
}

impl DesingChecks {
    pub fn passes(&self) -> bool {
        self.min_y > 0.0
            && self.max_y < 1.0
            && self.min_margin_delta_y > 0.0
            && self.min_margin_delta_u > 0.0
            && self.min_margin_g > 0.0
            && self.min_u > 0.0
    }
}

/// The `Y < 0` continuation up to the switch.
#[derive(Clone, Debug)]
pub struct BelowSonic {
    pub trajectory: TaylorTrajectory,
    pub y_switch: f64,
    pub y_turn: f64,
    /// Smallest `U − U_ΔY` and `𝐆_[n] − U` over the nodes on `(Y_I', 0)`.
    pub min_above_delta_y: f64,
    pub min_below_g: f64,
    pub max_ode_residual: f64,
}

/// One row of the exported profile.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileRow {
    pub leg: u8,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    #[serde(rename = "U")]
    pub u: f64,
}

/// Summary checks of the global profile.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ProfileChecks {
    pub z2: f64,
    pub v2: f64,
    /// Margins of `(Z₂, V₂)` in the far region (all must be positive).
    pub far_margins: [f64; 5],
    pub far_monotone: bool,
    pub v_inf: f64,
    pub v_inf_error: f64,
    pub w_inf: f64,
    pub a_exponent: f64,
    /// `|W(10⁴)·10^{4a} / (W(10³)·10^{3a}) − 1|` (or over the last decade).
    pub w_drift: f64,
    /// `max Z²·|J_W(Z) + a/Z|` on the far leg.
    pub jw_far_constant: f64,
    pub jw_at_zero: f64,
    pub w_at_zero: f64,
    pub phi_at_zero: f64,
    pub max_even_coeff: f64,
    pub min_z_minus_v: f64,
    pub max_abs_v: f64,
    pub z_increasing: bool,
    pub max_ode_residual: f64,
    pub overlap_origin_error: f64,
    /// Relative change of `(U⁰, U)` over the last decade.
    pub tail_flatness: f64,
}

impl ProfileChecks {
    pub fn passes(&self) -> bool {
        self.far_margins.iter().all(|m| *m > 0.0)
            && self.far_monotone
            && self.v_inf.abs() < 1.0
            && self.w_drift < 1e-3
            && self.w_at_zero == 1.0
            && self.phi_at_zero == 0.0
            && self.max_even_coeff < 1e-10
            && self.min_z_minus_v > 0.0
            && self.max_abs_v < 1.0
    }
}

/// The assembled profile.
#[derive(Clone, Debug)]
pub struct GlobalProfile {
    pub rows: Vec<ProfileRow>,
    pub below: BelowSonic,
    pub desing: DesingSegment,
    pub far: RkSolution,
    pub checks: ProfileChecks,
}

/// Summary written next to the profile CSV.
#[derive(Serialize)]
pub struct ProfileSummary<'a> {
    pub kappa_star: String,
    pub n: u32,
    pub delta_y: f64,
    pub v_inf: f64,
    pub v_inf_error: f64,
    pub w_inf: f64,
    pub a_exponent: f64,
    pub y_switch: f64,
    pub y_turn: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub z2: f64,
    pub v2: f64,
    pub desing: &'a DesingChecks,
    pub checks: &'a ProfileChecks,
    pub rows: usize,
}

impl GlobalProfile {
    pub fn summary<'a>(&'a self, res: &ShootResult) -> ProfileSummary<'a> {
        ProfileSummary {
            kappa_star: format!("{:.30}", res.kappa_star),
            n: res.n,
            delta_y: res.delta_y,
            v_inf: self.checks.v_inf,
            v_inf_error: self.checks.v_inf_error,
            w_inf: self.checks.w_inf,
            a_exponent: self.checks.a_exponent,
            y_switch: self.below.y_switch,
            y_turn: self.below.y_turn,
            xi1: self.desing.xi1,
            xi2: self.desing.xi2,
            xi3: self.desing.xi3,
            z2: self.checks.z2,
            v2: self.checks.v2,
            desing: &self.desing.checks,
            checks: &self.checks,
            rows: self.rows.len(),
        }
    }

    /// Writes the profile as CSV.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Double-precision dense evaluation of a Taylor trajectory: state and
/// derivative at `t`.
fn dense(tr: &TaylorTrajectory, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let steps: &[TaylorStep] = &tr.steps;
    let forward = steps.first().is_none_or(|s| !s.h.is_sign_negative());
    let idx = steps.partition_point(|s| {
        let end = s.t1().to_f64();
        if forward {
            end < t
        } else {
            end > t
        }
    });
    let s = steps.get(idx)?;
    let th = (t - s.t0.to_f64()) / s.h.to_f64();
    if !(-1e-9..=1.0 + 1e-9).contains(&th) {
        return None;
    }
    Some((s.eval_fraction_f64(th), s.deriv_fraction_f64(th)))
}

/// `U` and `U'` of the sonic series at `y` (MPFR evaluation).
fn series_at(sonic: &LocalSolution, prec: u32, y: f64) -> (f64, f64) {
    let yf = Float::with_val(prec, y);
    (sonic.eval(&yf).to_f64(), sonic.deriv(&yf).to_f64())
}

/// Inverse quadratic interpolation of `Y` as a function of `Δ_Y` at
/// `Δ_Y = 0`; exact when `Y − Y_I'` is quadratic in `Δ_Y`, i.e. when `Δ_Y`
/// vanishes like a square root.
fn estimate_turning_point(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let (y0, d0) = pts[n - 3];
    let (y1, d1) = pts[n - 2];
    let (y2, d2) = pts[n - 1];
    y0 * d1 * d2 / ((d0 - d1) * (d0 - d2)) + y1 * d0 * d2 / ((d1 - d0) * (d1 - d2)) + y2 * d0 * d1 / ((d2 - d0) * (d2 - d1))
}

/// Continues the sonic solution to `Y < 0` and through the turning point
/// with the desingularised system.
pub fn extend_below_sonic(s: &Setup, res: &ShootResult, pc: &ProfileConfig) -> Result<(BelowSonic, DesingSegment)> {
    let fp = &s.fp;
    let pp = fp.phase();
    let prec = fp.prec;
    let opts = crate::ode::TaylorOptions { max_steps: 5000, ..crate::shooting::ShootConfig::new(Default::default()).taylor };
    let opts = crate::ode::TaylorOptions { tol_log2: -(prec as f64) + 24.0, ..opts };
    let r = s.sonic.eval_radius;
    let y_start = Float::with_val(prec, -r);
    let u_start = s.sonic.eval(&y_start);
    let switch = [EventSpec::new(EventKind::Stop, true, move |y, x: &[f64]| {
        let (du, dy) = field_yu(&pp, y, x[0]);
        dy.abs() - SWITCH_RATIO * du.abs()
    })];
    let y_floor = Float::with_val(prec, -pp.gamma);
    let tr = integrate_taylor(&YuSystem { fp }, &y_start, &[u_start], &y_floor, &opts, &switch)?;
    if tr.stopped_by != EventKind::Stop {
        return Err(Error::RegionViolation {
            stage: "below-sonic".into(),
            detail: "Δ_Y never degenerated before Y = −γ".into(),
        });
    }
    let pts: Vec<(f64, f64)> = tr
        .t
        .iter()
        .zip(&tr.x)
        .map(|(y, x)| {
            let (y, u) = (y.to_f64(), x[0].to_f64());
            (y, field_yu(&pp, y, u).1)
        })
        .collect();
    let y_switch = tr.last_t().to_f64();
    let y_turn = estimate_turning_point(&pts);
    // Comparison with U_ΔY and 𝐆_[n] on (Y_I', 0).
    let g_n: Vec<Float> = s.series.u[..=pc.g_order.min(s.series.u.len() - 1)].to_vec();
    let mut min_above = f64::INFINITY;
    let mut min_below_g = f64::INFINITY;
    for (y, x) in tr.t.iter().zip(&tr.x).skip(1) {
        let yv = y.to_f64();
        if let Ok(udy) = u_delta_y(&pp, yv) {
            min_above = min_above.min(x[0].to_f64() - udy);
        }
        // The gap is of the size of the first omitted term; take it in MPFR.
        let gap = Float::with_val(prec, crate::ode::taylor::horner(&g_n, y) - &x[0]);
        min_below_g = min_below_g.min(gap.to_f64());
    }
    let below_res = crate::shooting::yu_step_residuals(&pp, &tr.steps).into_iter().fold(0.0, f64::max);
    let below = BelowSonic {
        trajectory: tr,
        y_switch,
        y_turn,
        min_above_delta_y: min_above,
        min_below_g,
        max_ode_residual: below_res,
    };

    // Desingularised leg from (Y_I'/2, U(Y_I'/2)).
    let ys = Float::with_val(prec, y_turn / 2.0);
    let us = if y_turn / 2.0 >= -r {
        s.sonic.eval(&ys)
    } else {
        below.trajectory.eval(&ys).ok_or_else(|| Error::RegionViolation {
            stage: "desingularised start".into(),
            detail: format!("Y_I'/2 = {} outside the continued leg", y_turn / 2.0),
        })?[0]
            .clone()
    };
    let start = (ys.to_f64(), us.to_f64());
    let ev1 = [
        EventSpec::new(EventKind::DeltaYVanishing, false, move |_, x: &[f64]| field_yu(&pp, x[0], x[1]).1),
        EventSpec::new(EventKind::CrossedYZero, true, |_, x: &[f64]| x[0]),
    ];
    let zero = Float::with_val(prec, 0);
    let xi_max = Float::with_val(prec, 1e4);
    let dopts = crate::ode::TaylorOptions { order: 60, ..opts };
    let leg1 = integrate_taylor(&DesingSystem { fp }, &zero, &[ys, us], &xi_max, &dopts, &ev1)?;
    let xi1 = leg1.event(EventKind::DeltaYVanishing).map(|e| e.at);
    if leg1.stopped_by != EventKind::CrossedYZero || xi1.is_none() {
        return Err(Error::RegionViolation {
            stage: "desingularised".into(),
            detail: format!("expected Δ_Y = 0 then Y = 0, got {:?}", leg1.events.iter().map(|e| e.kind).collect::<Vec<_>>()),
        });
    }
    let xi1 = xi1.expect("checked above");
    let xi2 = leg1.last_t().to_f64();
    let ev3 = [EventSpec::new(EventKind::Stop, true, move |_, x: &[f64]| {
        let (y, u) = (x[0], x[1]);
        if y <= 0.0 {
            return -1.0;
        }
        let m = root_margin(&pp, y, u);
        y - XI3_Y_CAP.min(0.5 * m)
    })];
    let leg2 = integrate_taylor(&DesingSystem { fp }, leg1.last_t(), leg1.last_x(), &xi_max, &dopts, &ev3)?;
    if leg2.stopped_by != EventKind::Stop {
        return Err(Error::RegionViolation { stage: "desingularised".into(), detail: "ξ₃ not reached".into() });
    }
    let xi3 = leg2.last_t().to_f64();
    let checks = desing_checks(&pp, &below.trajectory, &leg1, &leg2, xi1);
    if !checks.passes() {
        return Err(Error::RegionViolation {
            stage: "desingularised (ξ₂, ξ₃]".into(),
            detail: format!("{checks:?}"),
        });
    }
    let _ = res;
    Ok((below, DesingSegment { start, xi1, xi2, xi3, legs: [leg1, leg2], checks }))
}

fn root_margin(pp: &PhaseParams, y: f64, u: f64) -> f64 {
    let a = u_delta_y(pp, y).map(|v| v - u).unwrap_or(f64::INFINITY);
    a.min(u_delta_u(pp, y) - u).min(u_g(pp, y) - u)
}

/// Samples per Taylor step for the dense region checks.
const DENSE_SAMPLES: usize = 8;

fn desing_checks(
    pp: &PhaseParams,
    yu: &TaylorTrajectory,
    leg1: &TaylorTrajectory,
    leg2: &TaylorTrajectory,
    xi1: f64,
) -> DesingChecks {
    let mut c = DesingChecks {
        min_y: f64::INFINITY,
        max_y: f64::NEG_INFINITY,
        min_margin_delta_y: f64::INFINITY,
        min_margin_delta_u: f64::INFINITY,
        min_margin_g: f64::INFINITY,
        min_u: f64::INFINITY,
        ..Default::default()
    };
    let residual = |s: &TaylorStep, th: f64| {
        let x = s.eval_fraction_f64(th);
        let dx = s.deriv_fraction_f64(th);
        let (du, dy) = field_yu(pp, x[0], x[1]);
        let num = (dx[0] - dy).abs().max((dx[1] - du).abs());
        num / (dy.abs() + du.abs()).max(f64::MIN_POSITIVE)
    };
    for s in &leg1.steps {
        for k in 0..=DENSE_SAMPLES {
            let th = k as f64 / DENSE_SAMPLES as f64;
            let x = s.eval_fraction_f64(th);
            c.min_u = c.min_u.min(x[1]);
            let xi = s.t0.to_f64() + th * s.h.to_f64();
            if xi < xi1 {
                if let Some((uy, _)) = dense(yu, x[0]) {
                    c.overlap_error = c.overlap_error.max((uy[0] - x[1]).abs() / x[1].abs());
                }
            }
        }
        c.max_ode_residual = c.max_ode_residual.max(residual(s, 1.0));
    }
    for s in &leg2.steps {
        for k in 1..=DENSE_SAMPLES {
            let th = k as f64 / DENSE_SAMPLES as f64;
            let x = s.eval_fraction_f64(th);
            let (y, u) = (x[0], x[1]);
            c.samples += 1;
            c.min_y = c.min_y.min(y);
            c.max_y = c.max_y.max(y);
            c.min_u = c.min_u.min(u);
            c.min_margin_delta_y = c.min_margin_delta_y.min(u_delta_y(pp, y).map(|v| v - u).unwrap_or(f64::NAN));
            c.min_margin_delta_u = c.min_margin_delta_u.min(u_delta_u(pp, y) - u);
            c.min_margin_g = c.min_margin_g.min(u_g(pp, y) - u);
        }
        c.max_ode_residual = c.max_ode_residual.max(residual(s, 1.0));
    }
    if let Some(e) = leg1.event(EventKind::DeltaYVanishing) {
        c.delta_y_at_xi1 = field_yu(pp, e.state[0], e.state[1]).1.abs();
    }
    c.y_at_xi2 = leg1.last_x()[0].to_f64().abs();
    c
}

/// `J_W(Z) = ∂_Z ln W` for `(Z, V, V')`.
fn j_w(pp: &PhaseParams, z: f64, v: f64, vp: f64) -> f64 {
    let c = 2.0 / ((pp.p - 1.0) * pp.ell);
    let om = 1.0 - v * v;
    c / (z - v) * ((pp.d - 1.0) * v / (z * om) - (pp.d - 1.0) / (pp.gamma + 1.0) - (z * v - 1.0) / om * vp)
}

/// `J_W · dZ/ds` along a parametrised leg `s ↦ (Z, V)`.
fn j_w_param(pp: &PhaseParams, z: f64, v: f64, zs: f64, vs: f64) -> f64 {
    let c = 2.0 / ((pp.p - 1.0) * pp.ell);
    let om = 1.0 - v * v;
    c / (z - v) * (((pp.d - 1.0) * v / (z * om) - (pp.d - 1.0) / (pp.gamma + 1.0)) * zs - (z * v - 1.0) / om * vs)
}

fn ps_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

fn ps_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut q = vec![0.0; n];
    for k in 0..n {
        let s: f64 = (0..k).map(|i| q[i] * b[k - i]).sum();
        q[k] = (a[k] - s) / b[0];
    }
    q
}

/// Power series of `J_W` at `Z = 0` from the origin coefficients, with the
/// removable singularity divided out.
pub fn j_w_series(pp: &PhaseParams, v: &[f64], terms: usize) -> Vec<f64> {
    let n = terms + 2;
    let vv: Vec<f64> = (0..n).map(|k| v.get(k).copied().unwrap_or(0.0)).collect();
    let mut om = ps_mul(&vv, &vv).iter().map(|x| -x).collect::<Vec<_>>();
    om[0] += 1.0;
    let mut one = vec![0.0; n];
    one[0] = 1.0;
    let inv = ps_div(&one, &om);
    let v_over_z: Vec<f64> = (0..n).map(|k| vv.get(k + 1).copied().unwrap_or(0.0)).collect();
    let vp: Vec<f64> = (0..n).map(|k| (k + 1) as f64 * vv.get(k + 1).copied().unwrap_or(0.0)).collect();
    let mut zv_m1: Vec<f64> = (0..n).map(|k| if k >= 1 { vv[k - 1] } else { 0.0 }).collect();
    zv_m1[0] -= 1.0;
    let t1: Vec<f64> = ps_mul(&v_over_z, &inv).iter().map(|x| x * (pp.d - 1.0)).collect();
    let t3 = ps_mul(&ps_mul(&zv_m1, &vp), &inv);
    let mut num: Vec<f64> = (0..n).map(|k| t1[k] - t3[k]).collect();
    num[0] -= (pp.d - 1.0) / (pp.gamma + 1.0);
    // num(0) vanishes; divide both num and (Z − V) by Z.
    let num_z: Vec<f64> = (0..n - 1).map(|k| num[k + 1]).collect();
    let mut den: Vec<f64> = (0..n - 1).map(|k| -v_over_z[k]).collect();
    den[0] += 1.0;
    let c = 2.0 / ((pp.p - 1.0) * pp.ell);
    ps_div(&num_z, &den).iter().take(terms).map(|x| x * c).collect()
}

/// Below this `Z` the origin leg uses the `J_W` series.
const JW_SERIES_Z: f64 = 0.05;

/// Integrates `(ln W, Φ)` along a leg `s ↦ (Z, V, Z_s, V_s)` on `[s0, s1]`.
fn quadrature_leg(
    pp: &PhaseParams,
    leg: &dyn Fn(f64) -> (f64, f64, f64, f64),
    jw_override: Option<&dyn Fn(f64) -> Option<f64>>,
    s0: f64,
    s1: f64,
    init: [f64; 2],
    tol: f64,
) -> Result<RkSolution> {
    let half_pm1 = (pp.p - 1.0) / 2.0;
    let f = |s: f64, y: &[f64]| {
        let (z, v, zs, vs) = leg(s);
        let jw = match jw_override.and_then(|o| o(s)) {
            Some(j) => j * zs,
            None => j_w_param(pp, z, v, zs, vs),
        };
        let om = 1.0 - v * v;
        let phi = v * (y[0] * half_pm1).exp() / (om * om.sqrt()) * zs;
        vec![jw, phi]
    };
    let mut o = RkOptions::with_tol(tol);
    o.h_init = ((s1 - s0).abs() * 1e-3).max(1e-12);
    dopri5(f, s0, &init, s1, &o, &[])
}

fn last2(sol: &RkSolution) -> [f64; 2] {
    let y = sol.y.last().expect("non-empty solution");
    [y[0], y[1]]
}

/// Maps the legs to `(Z, V)`, integrates the far leg, and computes `W`, `Φ`.
pub fn assemble_global(
    s: &Setup,
    res: &ShootResult,
    below: BelowSonic,
    desing: DesingSegment,
    pc: &ProfileConfig,
) -> Result<GlobalProfile> {
    let fp: &FloatParams = &s.fp;
    let pp = fp.phase();
    let prec = fp.prec;
    let r = s.sonic.eval_radius;
    let delta = res.delta_y;
    let vco: Vec<f64> = s.origin.coefficients.iter().map(Float::to_f64).collect();
    let veval = |z: f64| -> (f64, f64) {
        let v = vco.iter().rev().fold(0.0, |acc, c| acc * z + c);
        let vp = vco.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * z + k as f64 * c);
        (v, vp)
    };
    let jws = j_w_series(&pp, &vco, 24);
    let jw_series_eval = |z: f64| jws.iter().rev().fold(0.0, |acc, c| acc * z + c);
    let matched = &res.matched.trajectory;
    let yu_point = |y: f64| -> (f64, f64) {
        if y.abs() <= r {
            series_at(&s.sonic, prec, y)
        } else if y > 0.0 {
            dense(matched, y).map(|(x, dx)| (x[0], dx[0])).unwrap_or((f64::NAN, f64::NAN))
        } else {
            dense(&below.trajectory, y).map(|(x, dx)| (x[0], dx[0])).unwrap_or((f64::NAN, f64::NAN))
        }
    };
    let yu_leg = |y: f64| -> (f64, f64, f64, f64) {
        let (u, up) = yu_point(y);
        let (z, v) = yu_to_zv(&pp, y, u).unwrap_or((f64::NAN, f64::NAN));
        let j = jacobian_zv_of_yu(&pp, y, u);
        (z, v, j[0][0] + j[0][1] * up, j[1][0] + j[1][1] * up)
    };
    let ds_legs = &desing.legs;
    let ds_leg = |xi: f64| -> (f64, f64, f64, f64) {
        let tr = if xi <= desing.xi2 { &ds_legs[0] } else { &ds_legs[1] };
        let (x, dx) = dense(tr, xi).unwrap_or((vec![f64::NAN; 2], vec![f64::NAN; 2]));
        let (z, v) = yu_to_zv(&pp, x[0], x[1]).unwrap_or((f64::NAN, f64::NAN));
        let j = jacobian_zv_of_yu(&pp, x[0], x[1]);
        (z, v, j[0][0] * dx[0] + j[0][1] * dx[1], j[1][0] * dx[0] + j[1][1] * dx[1])
    };
    let tol = pc.rk_tol;

    // 1. Origin leg, Z ∈ [0, δ_Y].
    let origin_leg = |z: f64| {
        let (v, vp) = veval(z);
        (z, v, 1.0, vp)
    };
    let origin_override = |z: f64| if z < JW_SERIES_Z { Some(jw_series_eval(z)) } else { None };
    let q1 = quadrature_leg(&pp, &origin_leg, Some(&origin_override), 0.0, delta, [0.0, 0.0], tol)?;
    // 2. Matched sonic leg, Y from Y_F down to 0.
    let y_f = res.matched.y_f.to_f64();
    let q2 = quadrature_leg(&pp, &yu_leg, None, y_f, 0.0, last2(&q1), tol)?;
    // 3. Below-sonic leg, Y from 0 down to Y_I'/2.
    let q3 = quadrature_leg(&pp, &yu_leg, None, 0.0, desing.start.0, last2(&q2), tol)?;
    // 4. Desingularised leg, ξ ∈ [0, ξ₃].
    let q4 = quadrature_leg(&pp, &ds_leg, None, 0.0, desing.xi3, last2(&q3), tol)?;

    // 5. Far leg.
    let end = ds_legs[1].last_x();
    let (y3, u3) = (end[0].to_f64(), end[1].to_f64());
    let (z2, v2) = yu_to_zv(&pp, y3, u3)?;
    let far_margins = margins_far(&pp, z2, v2);
    if far_margins.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::NotInFarRegion(format!("(Z₂, V₂) = ({z2}, {v2}), margins {far_margins:?}")));
    }
    let half_pm1 = (pp.p - 1.0) / 2.0;
    let far_f = |z: f64, y: &[f64]| {
        let v = y[0];
        let (dv, dz) = field_zv(&pp, z, v);
        let vp = dv / dz;
        let om = 1.0 - v * v;
        vec![vp, j_w(&pp, z, v, vp), v * (y[1] * half_pm1).exp() / (om * om.sqrt())]
    };
    let w4 = last2(&q4);
    let mut o = RkOptions::with_tol(tol);
    o.h_init = 1e-4;
    let far = dopri5(far_f, z2, &[v2, w4[0], w4[1]], pc.zmax, &o, &[])?;

    // Rows and node checks.
    let mut rows = vec![];
    let mut push = |leg: u8, z: f64, v: f64, lnw: f64, phi: f64| {
        let om = 1.0 - v * v;
        rows.push(ProfileRow { leg, z, v, w: lnw.exp(), phi, u0: 1.0 / om.sqrt(), u: v / om.sqrt() });
    };
    for (q, leg, legno) in [
        (&q1, &origin_leg as &dyn Fn(f64) -> (f64, f64, f64, f64), 1u8),
        (&q2, &yu_leg, 2),
        (&q3, &yu_leg, 3),
        (&q4, &ds_leg, 4),
    ] {
        for (s_, y) in q.t.iter().zip(&q.y) {
            let (z, v, _, _) = leg(*s_);
            push(legno, z, v, y[0], y[1]);
        }
    }
    for (z, y) in far.t.iter().zip(&far.y) {
        push(5, *z, y[0], y[1], y[2]);
    }
    // W(0) = 1 and Φ(0) = 0 hold by construction of the first node.
    rows[0].w = 1.0;
    rows[0].phi = 0.0;

    let mut ck = ProfileChecks {
        z2,
        v2,
        far_margins,
        a_exponent: fp.a_exponent.to_f64(),
        w_at_zero: rows[0].w,
        phi_at_zero: rows[0].phi,
        jw_at_zero: jws[0],
        min_z_minus_v: f64::INFINITY,
        z_increasing: true,
        far_monotone: true,
        ..Default::default()
    };
    let mut prev_z = f64::NEG_INFINITY;
    for r in &rows {
        if r.z > 0.0 {
            ck.min_z_minus_v = ck.min_z_minus_v.min(r.z - r.v);
        }
        ck.max_abs_v = ck.max_abs_v.max(r.v.abs());
        if r.z < prev_z - 1e-12 {
            ck.z_increasing = false;
        }
        prev_z = r.z;
    }
    // Far leg: monotone decrease and ODE residual via the dense output.
    for w in far.y.windows(2) {
        if w[1][0] >= w[0][0] {
            ck.far_monotone = false;
        }
    }
    let mut max_res: f64 = 0.0;
    for seg in &far.segments {
        let zm = seg.t0 + 0.5 * seg.h;
        let dz = 1e-4 * seg.h.abs();
        let vp = (seg.eval(zm + dz)[0] - seg.eval(zm - dz)[0]) / (2.0 * dz);
        let v = seg.eval(zm)[0];
        let (dv, dzz) = field_zv(&pp, zm, v);
        let scale = (dzz * vp).abs() + dv.abs();
        if scale > 0.0 {
            max_res = max_res.max((dzz * vp - dv).abs() / scale);
        }
        if dv / dzz >= 0.0 {
            ck.far_monotone = false;
        }
    }
    let shoot_res = crate::shooting::yu_step_residuals(&pp, &matched.steps).into_iter().fold(0.0, f64::max);
    ck.max_ode_residual = max_res.max(shoot_res).max(below.max_ode_residual).max(desing.checks.max_ode_residual);

    // V∞ by Richardson extrapolation in 1/Z.
    let vz = |z: f64| far.eval(z).map(|y| y[0]).unwrap_or(f64::NAN);
    let rich = |z: f64| 2.0 * vz(z) - vz(z / 2.0);
    ck.v_inf = rich(pc.zmax);
    ck.v_inf_error = (rich(pc.zmax) - rich(pc.zmax / 2.0)).abs();
    let lnw = |z: f64| far.eval(z).map(|y| y[1]).unwrap_or(f64::NAN);
    let a = ck.a_exponent;
    let z_hi = pc.zmax;
    let z_lo = (pc.zmax / 10.0).max(z2);
    ck.w_drift = ((lnw(z_hi) + a * z_hi.ln() - lnw(z_lo) - a * z_lo.ln()).exp() - 1.0).abs();
    ck.w_inf = (lnw(z_hi) + a * z_hi.ln()).exp();
    let mut jwc: f64 = 0.0;
    for (z, y) in far.t.iter().zip(&far.y) {
        if *z >= 10.0 {
            let (dv, dz) = field_zv(&pp, *z, y[0]);
            jwc = jwc.max(z * z * (j_w(&pp, *z, y[0], dv / dz) + a / z).abs());
        }
    }
    ck.jw_far_constant = jwc;
    let u0 = |z: f64| 1.0 / (1.0 - vz(z).powi(2)).sqrt();
    ck.tail_flatness = ((u0(z_hi) - u0(z_lo)) / u0(z_hi)).abs().max(((vz(z_hi) - vz(z_lo)) * u0(z_hi)).abs());
    // Even coefficients of the origin solution.
    ck.max_even_coeff = vco.iter().step_by(2).map(|c| c.abs()).fold(0.0, f64::max);
    // Overlap of the origin series with the mapped sonic leg beyond δ_Y.
    let mut ov: f64 = 0.0;
    for (y, x) in matched.t.iter().zip(&matched.x) {
        if let Ok((z, v)) = yu_to_zv(&pp, y.to_f64(), x[0].to_f64()) {
            if z <= s.origin.eval_radius.min(delta * 2.0) {
                ov = ov.max((veval(z).0 - v).abs() / v.abs());
            }
        }
    }
    ck.overlap_origin_error = ov;
    if ov > 1e-6 {
        return Err(Error::OverlapMismatch(format!("origin series vs sonic leg: {ov:e}")));
    }
    if desing.checks.overlap_error > 1e-6 {
        return Err(Error::OverlapMismatch(format!(
            "desingularised vs (Y, U) leg: {:e}",
            desing.checks.overlap_error
        )));
    }
    if ck.min_z_minus_v <= 0.0 {
        return Err(Error::SingularIntegrand(format!("V ≥ Z on the profile (min Z − V = {})", ck.min_z_minus_v)));
    }
    Ok(GlobalProfile { rows, below, desing, far, checks: ck })
}

/// Full continuation from a shooting result.
pub fn build_profile(res: &ShootResult, sc: &crate::shooting::ShootConfig, pc: &ProfileConfig) -> Result<GlobalProfile> {
    let s = crate::shooting::setup(&res.kappa_star, sc)?;
    let (below, desing) = extend_below_sonic(&s, res, pc)?;
    assemble_global(&s, res, below, desing, pc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turning_point_of_a_square_root() {
        // Δ(Y) = 3·sqrt(Y + 0.01): Y = Δ²/9 − 0.01.
        let pts: Vec<(f64, f64)> = [-0.002, -0.005, -0.008].iter().map(|&y: &f64| (y, 3.0 * (y + 0.01).sqrt())).collect();
        assert!((estimate_turning_point(&pts) + 0.01).abs() < 1e-12);
    }

    #[test]
    fn series_division_inverts_multiplication() {
        let a = [1.0, 2.0, -1.0, 0.5];
        let b = [2.0, 0.3, 0.1, -0.2];
        let q = ps_div(&ps_mul(&a, &b), &b);
        for (x, y) in q.iter().zip(a) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn j_w_series_matches_direct_formula() {
        let pp = PhaseParams::new(4, 7, 0.7925);
        let cfg = crate::params::Config::default();
        let fp = crate::params::derive_float(&cfg, &Float::with_val(128, 0.7925), 128).unwrap();
        let o = crate::shooting::local_solution_origin(&fp, 41, -64.0);
        let v: Vec<f64> = o.coefficients.iter().map(Float::to_f64).collect();
        let s = j_w_series(&pp, &v, 20);
        assert!(s[0].abs() < 1e-14, "J_W(0) = {}", s[0]);
        let z: f64 = 0.03;
        let vz = v.iter().rev().fold(0.0, |a, c| a * z + c);
        let vp = v.iter().enumerate().skip(1).rev().fold(0.0, |a, (k, c)| a * z + k as f64 * c);
        let direct = j_w(&pp, z, vz, vp);
        let ser = s.iter().rev().fold(0.0, |a, c| a * z + c);
        assert!((direct - ser).abs() < 1e-10 * direct.abs().max(1e-3), "{direct} vs {ser}");
    }
}
