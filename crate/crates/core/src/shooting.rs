//! Shooting in `κ`: the solution leaving the sonic point along the smooth
//! branch is integrated towards the origin side and compared with the
//! regular solution launched from `Z = 0`.
//!
//! For `κ ∈ (n, n+1)` the sonic solution either leaves the far-field barrier
//! region through the upper barrier (the mismatch is then replaced by the
//! barrier value, which is below the origin value), through the lower one
//! (above), or reaches the matching abscissa `Y_F(δ_Y)`, where the mismatch is
//! the numerical difference. A sign change of `g` brackets the matching
//! `κ*`, which is then refined by safeguarded regula falsi.
//!
//! Solutions leaving the sonic point separate like `Y^κ ≈ Y^{100}`, so the
//! `Y > 0` leg is integrated in MPFR (default 640 bits).

use std::time::Instant;

use num_traits::ToPrimitive;
use rug::Float;
use serde::Serialize;

use crate::barrier::FarBarriersF64;
use crate::error::{Error, Result};
use crate::ode::taylor::{horner, TaylorStep};
use crate::ode::{integrate_taylor, EventKind, EventSpec, TaylorOptions, TaylorTrajectory, YuSystem};
use crate::params::{derive_float, gamma_of_kappa, sonic_point_zv, Config, FloatParams};
use crate::phase::{field_yu, field_zv, slope_covariance_error, yu_to_zv, PhaseParams};
use crate::series::{catalan, compute_series_float, FloatSeries};

/// Default working precision (bits) of the shooting legs.
pub const DEFAULT_PREC: u32 = 640;
/// Default order of the sonic-point series.
pub const DEFAULT_SONIC_ORDER: usize = 600;
/// Default order of the origin series.
pub const DEFAULT_ORIGIN_ORDER: usize = 121;
/// Target for `|g(κ*)|`.
pub const G_TOL: f64 = 1e-8;
/// Bracket width at which the refinement stops regardless of `g`.
pub const BRACKET_TOL: f64 = 1e-12;
/// Tail tolerance (power of two) of the origin series. Errors there enter
/// the mismatch additively, without the `Y^κ` amplification of the sonic leg.
pub const ORIGIN_TOL_LOG2: f64 = -64.0;
/// Matching abscissae tried in turn.
pub const DELTA_Y_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Settings of the shooting stage.
#[derive(Clone, Debug)]
pub struct ShootConfig {
    pub cfg: Config,
    pub prec: u32,
    pub sonic_order: usize,
    pub origin_order: usize,
    pub taylor: TaylorOptions,
    /// Number of `κ` values in the initial scan.
    pub scan_points: usize,
    pub workers: usize,
    pub g_tol: f64,
    pub bracket_tol: f64,
}

impl ShootConfig {
    pub fn new(cfg: Config) -> Self {
        Self {
            cfg,
            prec: DEFAULT_PREC,
            sonic_order: DEFAULT_SONIC_ORDER,
            origin_order: DEFAULT_ORIGIN_ORDER,
            taylor: TaylorOptions::for_prec(DEFAULT_PREC),
            scan_points: 12,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            g_tol: G_TOL,
            bracket_tol: BRACKET_TOL,
        }
    }

    /// The same configuration with the integrator tolerance halved.
    pub fn halved_tolerance(&self) -> Self {
        let mut c = self.clone();
        c.taylor.tol_log2 -= 1.0;
        c
    }
}

/// Where a local solution is centred.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Center {
    /// The sonic point in `(Y, U)`.
    SonicYu,
    /// The origin `Z = 0` in `(Z, V)`.
    OriginZv,
}

/// A truncated power series with the radius inside which it is evaluated.
#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub center: Center,
    pub coefficients: Vec<Float>,
    pub order: usize,
    pub eval_radius: f64,
}

impl LocalSolution {
    pub fn eval(&self, x: &Float) -> Float {
        horner(&self.coefficients, x)
    }

    pub fn deriv(&self, x: &Float) -> Float {
        let prec = x.prec();
        let d: Vec<Float> = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| Float::with_val(prec, a * k as u32))
            .collect();
        horner(&d, x)
    }
}

fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

/// Largest `r ∈ (0, 1]` with `|c_N|·r^N ≤ 2^{tol_log2}·|c_0 + c_1 r|`
/// (tail dominance), found by bisection in `log r`.
fn tail_radius(c: &[Float], tol_log2: f64) -> f64 {
    let n = c.len() - 1;
    let lead = log2_abs(&c[n]);
    let ok = |r: f64| {
        let base = (c[0].to_f64() + c[1].to_f64() * r).abs().max(f64::MIN_POSITIVE).log2();
        lead + n as f64 * r.log2() <= tol_log2 + base
    };
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (-200.0f64, 0.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(2f64.powf(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2f64.powf(lo)
}

/// Sonic-point solution `U(Y) = Σ U_n Yⁿ` with an adaptive evaluation radius.
///
/// The tail criterion uses the working precision rather than a fixed
/// `10⁻¹⁴`: any error at the start point is amplified like `Y^κ` along the leg.
pub fn local_solution_sonic(series: &FloatSeries, tol_log2: f64) -> LocalSolution {
    let r = tail_radius(&series.u, tol_log2);
    LocalSolution { center: Center::SonicYu, coefficients: series.u.clone(), order: series.u.len() - 1, eval_radius: r }
}

/// Origin solution `V(Z) = Σ V_k Z^k` of `Δ_Z·V' = Δ_V` with `V(0) = 0`.
///
/// Every coefficient (even ones included) is obtained from the residual of
/// the ODE at order `k`, which is affine in `V_k` with slope `k + d − 1`.
/// Even coefficients therefore come out of the recursion rather than being
/// set to zero, and their size measures the odd symmetry of the solution.
pub fn local_solution_origin(fp: &FloatParams, order: usize, tol_log2: f64) -> LocalSolution {
    let prec = fp.prec;
    let z = |v: f64| Float::with_val(prec, v);
    let m = order + 1;
    let d1 = fp.d - 1;
    let g1 = Float::with_val(prec, &fp.gamma + 1u32);
    let mut v = vec![z(0.0); m];
    // k-th coefficients of the intermediate series.
    let mut a = vec![z(0.0); m]; // V²
    let mut c = vec![z(0.0); m]; // 1 − ZV
    let mut c2 = vec![z(0.0); m]; // (1 − ZV)²
    let mut e = vec![z(0.0); m]; // V − Z
    let mut e2 = vec![z(0.0); m]; // (V − Z)²
    let mut dz = vec![z(0.0); m]; // Z((1 − ZV)² − ℓ(V − Z)²)
    let mut om = vec![z(0.0); m]; // 1 − V²
    let mut vc = vec![z(0.0); m]; // V(1 − ZV)
    let mut inner = vec![z(0.0); m]; // (1 − V²)Z/(γ+1) − V(1 − ZV)
    let conv = |x: &[Float], y: &[Float], k: usize| Float::with_val(prec, Float::dot((0..=k).map(|i| (&x[i], &y[k - i]))));
    c[0] = z(1.0);
    c2[0] = z(1.0);
    om[0] = z(1.0);
    for k in 1..m {
        let fill = |v: &Vec<Float>,
                    a: &mut Vec<Float>,
                    c: &mut Vec<Float>,
                    c2: &mut Vec<Float>,
                    e: &mut Vec<Float>,
                    e2: &mut Vec<Float>,
                    dz: &mut Vec<Float>,
                    om: &mut Vec<Float>,
                    vc: &mut Vec<Float>,
                    inner: &mut Vec<Float>| {
            a[k] = conv(v, v, k);
            c[k] = Float::with_val(prec, -&v[k - 1]);
            c2[k] = conv(c, c, k);
            e[k] = if k == 1 { Float::with_val(prec, &v[1] - 1u32) } else { v[k].clone() };
            e2[k] = conv(e, e, k);
            dz[k] = Float::with_val(prec, &c2[k - 1] - Float::with_val(prec, &e2[k - 1] * &fp.ell));
            om[k] = Float::with_val(prec, -&a[k]);
            vc[k] = conv(v, c, k);
            inner[k] = Float::with_val(prec, &om[k - 1] / &g1) - &vc[k];
        };
        let residual = |v: &Vec<Float>, dz: &Vec<Float>, om: &Vec<Float>, inner: &Vec<Float>| {
            let mut lhs = z(0.0);
            for i in 1..=k {
                lhs += Float::with_val(prec, &dz[i] * &v[k - i + 1]) * (k - i + 1) as u32;
            }
            let rhs = conv(om, inner, k) * d1;
            lhs - rhs
        };
        v[k] = z(0.0);
        fill(&v, &mut a, &mut c, &mut c2, &mut e, &mut e2, &mut dz, &mut om, &mut vc, &mut inner);
        let r = residual(&v, &dz, &om, &inner);
        v[k] = -r / (k as u32 + d1);
        fill(&v, &mut a, &mut c, &mut c2, &mut e, &mut e2, &mut dz, &mut om, &mut vc, &mut inner);
    }
    let r = tail_radius(&v, tol_log2);
    LocalSolution { center: Center::OriginZv, coefficients: v, order, eval_radius: r }
}

/// `V₁ = (d−1)/(d(γ+1))`.
pub fn v1_closed_form(fp: &FloatParams) -> Float {
    let prec = fp.prec;
    Float::with_val(prec, fp.d - 1) / (Float::with_val(prec, &fp.gamma + 1u32) * fp.d)
}

/// `V₃` closed form from the small-`Z` expansion.
pub fn v3_closed_form(fp: &FloatParams) -> Float {
    let prec = fp.prec;
    let d = fp.d;
    let g1 = Float::with_val(prec, &fp.gamma + 1u32);
    let v1 = v1_closed_form(fp);
    let v1sq = Float::with_val(prec, &v1 * &v1);
    let v1cu = Float::with_val(prec, &v1sq * &v1);
    let inner = Float::with_val(prec, &v1sq * -2i32) / &g1 + &v1cu + &v1sq;
    let vm1 = Float::with_val(prec, &v1 - 1u32);
    let tail = Float::with_val(prec, &v1 * 2u32) + Float::with_val(prec, &vm1 * &vm1) * &fp.ell;
    (inner * (d - 1) + tail * &v1) / (d + 2)
}

/// `(Y, U) = (𝒴, 𝒰)(Z, V)` in MPFR.
pub fn zv_to_yu_mp(fp: &FloatParams, z: &Float, v: &Float) -> (Float, Float) {
    let prec = fp.prec;
    let g1 = Float::with_val(prec, &fp.gamma + 1u32);
    let one_v2 = Float::with_val(prec, 1u32 - Float::with_val(prec, v * v));
    let one_vz = Float::with_val(prec, 1u32 - Float::with_val(prec, v * z));
    let y_num = Float::with_val(prec, &one_v2 * z) - Float::with_val(prec, &g1 * v) * &one_vz;
    let y = y_num / Float::with_val(prec, z * &one_v2);
    let u = Float::with_val(prec, &g1 * &g1) * Float::with_val(prec, &one_vz * &one_vz)
        / (one_v2 * Float::with_val(prec, z * z));
    (y, u)
}

/// `(Z, V) = (𝒵, 𝒱)(Y, U)` in MPFR.
pub fn yu_to_zv_mp(fp: &FloatParams, y: &Float, u: &Float) -> (Float, Float) {
    let prec = fp.prec;
    let g1 = Float::with_val(prec, &fp.gamma + 1u32);
    let one_y = Float::with_val(prec, 1u32 - y);
    let s = (Float::with_val(prec, &one_y * &one_y) + u).sqrt();
    let z = Float::with_val(prec, &s / (Float::with_val(prec, u / &g1) + &one_y));
    let v = one_y / s;
    (z, v)
}

/// How a sonic-side trajectory ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExitClass {
    /// Crossed the upper barrier first: `g < 0` side.
    ExitUpper,
    /// Crossed the lower barrier first: `g > 0` side.
    ExitLower,
    /// Reached `Y_F(δ_Y)` inside the barrier region.
    Reached,
}

/// One evaluation of the mismatch.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub kappa: Float,
    pub gamma: Float,
    pub delta_y: f64,
    pub class: ExitClass,
    /// Signed mismatch (barrier value in place of the solution after an exit).
    pub g: f64,
    pub y_f: Float,
    pub u_f: Float,
    /// `Y` where the integration stopped.
    pub y_stop: f64,
    pub trajectory: TaylorTrajectory,
    pub start: (Float, Float),
}

/// Everything that only depends on `κ`.
pub struct Setup {
    pub fp: FloatParams,
    pub series: FloatSeries,
    pub sonic: LocalSolution,
    pub origin: LocalSolution,
    pub barriers: FarBarriersF64,
}

/// Parameters, series and local solutions at `κ`.
pub fn setup(kappa: &Float, sc: &ShootConfig) -> Result<Setup> {
    let gamma = gamma_of_kappa(kappa, &sc.cfg, sc.prec)?;
    let fp = derive_float(&sc.cfg, &gamma, sc.prec)?;
    let series = compute_series_float(&fp, sc.sonic_order)?;
    let sonic = local_solution_sonic(&series, sc.taylor.tol_log2);
    let origin = local_solution_origin(&fp, sc.origin_order, ORIGIN_TOL_LOG2);
    let barriers = FarBarriersF64::from_float(&fp);
    Ok(Setup { fp, series, sonic, origin, barriers })
}

/// Barrier-exit events for the `Y > 0` leg.
pub fn barrier_events(b: FarBarriersF64) -> Vec<EventSpec<'static>> {
    vec![
        EventSpec::new(EventKind::ExitUpperEb1, true, move |y, x: &[f64]| x[0] - b.upper(y)),
        EventSpec::new(EventKind::ExitLowerEb2, true, move |y, x: &[f64]| b.lower(y) - x[0]),
    ]
}

/// `g(κ)` at matching abscissa `Z = δ_Y`.
pub fn mismatch_g(kappa: &Float, delta_y: f64, sc: &ShootConfig) -> Result<Mismatch> {
    let s = setup(kappa, sc)?;
    mismatch_with(&s, kappa, delta_y, sc)
}

/// `g(κ)` for a prepared [`Setup`].
pub fn mismatch_with(s: &Setup, kappa: &Float, delta_y: f64, sc: &ShootConfig) -> Result<Mismatch> {
    let prec = sc.prec;
    let zf = Float::with_val(prec, delta_y);
    if delta_y > s.origin.eval_radius {
        return Err(Error::IntegrationFailure(format!(
            "origin series does not reach δ_Y = {delta_y} (radius {:.3e})",
            s.origin.eval_radius
        )));
    }
    let vf = s.origin.eval(&zf);
    let (y_f, u_f) = zv_to_yu_mp(&s.fp, &zf, &vf);
    let r = Float::with_val(prec, s.sonic.eval_radius);
    let u_r = s.sonic.eval(&r);
    let events = barrier_events(s.barriers);
    let tr = integrate_taylor(&YuSystem { fp: &s.fp }, &r, &[u_r.clone()], &y_f, &sc.taylor, &events)?;
    let yf64 = y_f.to_f64();
    let uf64 = u_f.to_f64();
    let (class, g) = match tr.stopped_by {
        EventKind::ExitUpperEb1 => (ExitClass::ExitUpper, s.barriers.upper(yf64) - uf64),
        EventKind::ExitLowerEb2 => (ExitClass::ExitLower, s.barriers.lower(yf64) - uf64),
        _ => (ExitClass::Reached, Float::with_val(prec, &tr.last_x()[0] - &u_f).to_f64()),
    };
    Ok(Mismatch {
        kappa: kappa.clone(),
        gamma: s.fp.gamma.clone(),
        delta_y,
        class,
        g,
        y_f,
        u_f,
        y_stop: tr.last_t().to_f64(),
        trajectory: tr,
        start: (r, u_r),
    })
}

/// One row of the bracket history.
#[derive(Clone, Debug, Serialize)]
pub struct BracketStep {
    pub kappa: String,
    pub class: ExitClass,
    pub g: f64,
    pub lo: String,
    pub hi: String,
}

/// Residual statistics of the glued solution.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GlueDiagnostics {
    pub nodes: usize,
    pub max_ode_residual: f64,
    pub max_slope_error: f64,
    pub min_z_minus_v: f64,
    pub max_abs_v: f64,
    pub z_monotone: bool,
    /// `|(𝒵, 𝒱)(0, U₀) − (Z₀, V₀)|`.
    pub sonic_point_error: f64,
    /// Largest `|V_{2i}|` produced by the origin recursion.
    pub max_even_origin_coeff: f64,
    /// `|V₁ − closed form|` and `|V₃ − closed form|`.
    pub v1_error: f64,
    pub v3_error: f64,
    /// Smallest `C` with `|V_{2i+1}| ≤ 𝔠_i Cⁱ` over the computed orders.
    pub origin_growth_c: f64,
}

impl GlueDiagnostics {
    /// The acceptance predicate on the glued curve.
    pub fn passes(&self) -> bool {
        self.max_ode_residual < 1e-6
            && self.max_slope_error < 1e-6
            && self.min_z_minus_v > 0.0
            && self.max_abs_v < 1.0
            && self.z_monotone
    }
}

/// Outcome of [`find_kappa`].
#[derive(Clone, Debug)]
pub struct ShootResult {
    pub n: u32,
    pub kappa_star: Float,
    pub delta_y: f64,
    pub g_star: f64,
    pub history: Vec<BracketStep>,
    pub scan: Vec<(f64, ExitClass, f64)>,
    pub matched: Mismatch,
    pub glue: GlueDiagnostics,
    pub wall_time_s: f64,
}

/// Scans `κ ∈ (n + 10⁻⁴, n + 1 − 10⁻⁴)` in parallel.
fn scan(n: u32, delta_y: f64, sc: &ShootConfig) -> Result<Vec<(Float, ExitClass, f64)>> {
    let m = sc.scan_points.max(2);
    let lo = n as f64 + 1e-4;
    let hi = n as f64 + 1.0 - 1e-4;
    let ks: Vec<Float> =
        (0..m).map(|i| Float::with_val(sc.prec, lo + (hi - lo) * i as f64 / (m - 1) as f64)).collect();
    let workers = sc.workers.max(1).min(m);
    let results: Vec<Result<(Float, ExitClass, f64)>> = std::thread::scope(|scope| {
        let chunks: Vec<_> = (0..workers)
            .map(|w| {
                let ks = &ks;
                scope.spawn(move || {
                    (w..ks.len())
                        .step_by(workers)
                        .map(|i| mismatch_g(&ks[i], delta_y, sc).map(|r| (ks[i].clone(), r.class, r.g)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut out: Vec<Option<Result<(Float, ExitClass, f64)>>> = (0..ks.len()).map(|_| None).collect();
        for (w, h) in chunks.into_iter().enumerate() {
            for (j, r) in h.join().expect("scan worker panicked").into_iter().enumerate() {
                out[w + j * workers] = Some(r);
            }
        }
        out.into_iter().map(|r| r.expect("every scan point evaluated")).collect()
    });
    results.into_iter().collect()
}

pub fn fmt_float(x: &Float) -> String {
    format!("{:.32}", x)
}

/// Hexadecimal representation of an `f64` (`0x1.xxxxp+e`).
pub fn hex_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let mant = bits & ((1u64 << 52) - 1);
    format!("{sign}0x1.{mant:013x}p{exp:+}")
}

/// Refines a bracket `[lo, hi]` with `g(lo) > 0 > g(hi)` by bisection while
/// either end is a barrier exit and by Illinois regula falsi once both ends
/// carry numerical mismatches.
pub fn refine(
    mut lo: (Float, f64, ExitClass),
    mut hi: (Float, f64, ExitClass),
    delta_y: f64,
    sc: &ShootConfig,
    history: &mut Vec<BracketStep>,
) -> Result<Mismatch> {
    let prec = sc.prec;
    // Which end was replaced last (Illinois modification).
    let mut last_lo: Option<bool> = None;
    let mut best: Option<Mismatch> = None;
    for _ in 0..400 {
        let width = Float::with_val(prec, &hi.0 - &lo.0).to_f64();
        let both_numeric = lo.2 == ExitClass::Reached && hi.2 == ExitClass::Reached;
        let mid = if both_numeric {
            let t = lo.1 / (lo.1 - hi.1);
            let t = t.clamp(1e-3, 1.0 - 1e-3);
            Float::with_val(prec, &lo.0 + Float::with_val(prec, &hi.0 - &lo.0) * t)
        } else {
            Float::with_val(prec, &lo.0 + &hi.0) / 2u32
        };
        let r = mismatch_g(&mid, delta_y, sc)?;
        history.push(BracketStep {
            kappa: fmt_float(&mid),
            class: r.class,
            g: r.g,
            lo: fmt_float(&lo.0),
            hi: fmt_float(&hi.0),
        });
        let done = r.class == ExitClass::Reached && r.g.abs() < sc.g_tol;
        let g = r.g;
        let class = r.class;
        if best.as_ref().is_none_or(|b| b.class != ExitClass::Reached || (class == ExitClass::Reached && g.abs() < b.g.abs())) {
            best = Some(r);
        }
        if done || width < sc.bracket_tol {
            break;
        }
        if g > 0.0 {
            lo = (mid, g, class);
            if last_lo == Some(true) {
                hi.1 *= 0.5;
            }
            last_lo = Some(true);
        } else {
            hi = (mid, g, class);
            if last_lo == Some(false) {
                lo.1 *= 0.5;
            }
            last_lo = Some(false);
        }
    }
    best.ok_or_else(|| Error::IntegrationFailure("refinement produced no evaluation".into()))
}

/// Finds `κ* ∈ (n, n+1)` with `g(κ*) ≈ 0` for odd `n`.
pub fn find_kappa(n: u32, sc: &ShootConfig) -> Result<ShootResult> {
    if n % 2 == 0 {
        return Err(Error::Config(format!("n must be odd, got {n}")));
    }
    let t0 = Instant::now();
    let mut last_err = None;
    for &delta_y in &DELTA_Y_GRID {
        let pts = scan(n, delta_y, sc)?;
        let first = &pts[0];
        let last = &pts[pts.len() - 1];
        // A usable δ_Y has barrier exits at both ends of the scan.
        if first.1 == ExitClass::Reached || last.1 == ExitClass::Reached {
            last_err = Some(Error::NoBracket { n, detail: format!("δ_Y = {delta_y}: scan ends reach Y_F") });
            continue;
        }
        let Some(i) = (0..pts.len() - 1).find(|&i| pts[i].2 > 0.0 && pts[i + 1].2 <= 0.0) else {
            last_err = Some(Error::NoBracket { n, detail: format!("δ_Y = {delta_y}: no sign change in the scan") });
            continue;
        };
        let mut history = vec![];
        let lo = pts[i].clone();
        let hi = pts[i + 1].clone();
        let matched = refine((lo.0, lo.2, lo.1), (hi.0, hi.2, hi.1), delta_y, sc, &mut history)?;
        let s = setup(&matched.kappa, sc)?;
        let glue = glue_diagnostics(&s, &matched);
        return Ok(ShootResult {
            n,
            kappa_star: matched.kappa.clone(),
            delta_y,
            g_star: matched.g,
            history,
            scan: pts.iter().map(|(k, c, g)| (k.to_f64(), *c, *g)).collect(),
            matched,
            glue,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
    }
    Err(last_err.unwrap_or(Error::NoBracket { n, detail: "empty δ_Y grid".into() }))
}

/// [`find_kappa`] with automatic retries at `n + 2` and `n + 4`.
pub fn find_kappa_with_retry(n: u32, sc: &ShootConfig) -> Result<ShootResult> {
    let mut err = None;
    for m in [n, n + 2, n + 4] {
        match find_kappa(m, sc) {
            Ok(r) => return Ok(r),
            Err(e @ Error::NoBracket { .. }) => err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(err.expect("at least one attempt"))
}

/// Re-runs the refinement with the integrator tolerance halved, starting
/// from a narrow bracket around a previous `κ*`; returns `|Δκ*|`.
pub fn tolerance_halving_shift(res: &ShootResult, sc: &ShootConfig) -> Result<f64> {
    let sc2 = sc.halved_tolerance();
    let prec = sc.prec;
    let mut w = 1e-9;
    for _ in 0..8 {
        let lo = Float::with_val(prec, &res.kappa_star - w);
        let hi = Float::with_val(prec, &res.kappa_star + w);
        let glo = mismatch_g(&lo, res.delta_y, &sc2)?;
        let ghi = mismatch_g(&hi, res.delta_y, &sc2)?;
        if glo.g > 0.0 && ghi.g <= 0.0 {
            let m = refine((lo, glo.g, glo.class), (hi, ghi.g, ghi.class), res.delta_y, &sc2, &mut vec![])?;
            return Ok(Float::with_val(prec, &m.kappa - &res.kappa_star).to_f64().abs());
        }
        w *= 10.0;
    }
    Err(Error::NoBracket { n: res.n, detail: "no sign change around κ* at halved tolerance".into() })
}

/// Per-node relative residual `|Δ_Y U' − Δ_U|/(|Δ_Y U'| + |Δ_U|)` at the end
/// of each Taylor step (the start of a step satisfies the ODE by construction).
pub fn yu_step_residuals(pp: &PhaseParams, steps: &[TaylorStep]) -> Vec<f64> {
    steps
        .iter()
        .map(|s| {
            let y = s.t1().to_f64();
            let u = s.eval_fraction_f64(1.0)[0];
            let up = s.deriv_fraction_f64(1.0)[0];
            let (du, dy) = field_yu(pp, y, u);
            let scale = (dy * up).abs() + du.abs();
            if scale == 0.0 {
                0.0
            } else {
                (dy * up - du).abs() / scale
            }
        })
        .collect()
}

/// Checks on the glued curve: origin leg on `[0, δ_Y]` and the sonic leg
/// mapped to `(Z, V)`.
pub fn glue_diagnostics(s: &Setup, m: &Mismatch) -> GlueDiagnostics {
    let fp = &s.fp;
    let pp = fp.phase();
    let prec = fp.prec;
    let mut dg = GlueDiagnostics { z_monotone: true, min_z_minus_v: f64::INFINITY, ..Default::default() };
    // Origin leg.
    let samples = 64;
    for i in 1..=samples {
        let zz = Float::with_val(prec, i as f64 / samples as f64 * m.delta_y);
        let v = s.origin.eval(&zz).to_f64();
        let vp = s.origin.deriv(&zz).to_f64();
        let zf = zz.to_f64();
        let (dv, dz) = field_zv(&pp, zf, v);
        let scale = (dz * vp).abs() + dv.abs();
        let res = if scale == 0.0 { 0.0 } else { (dz * vp - dv).abs() / scale };
        dg.max_ode_residual = dg.max_ode_residual.max(res);
        dg.min_z_minus_v = dg.min_z_minus_v.min(zf - v);
        dg.max_abs_v = dg.max_abs_v.max(v.abs());
        dg.nodes += 1;
    }
    // Sonic leg, mapped.
    for r in yu_step_residuals(&pp, &m.trajectory.steps) {
        dg.max_ode_residual = dg.max_ode_residual.max(r);
    }
    let mut prev_z = f64::INFINITY;
    for (y, x) in m.trajectory.t.iter().zip(&m.trajectory.x) {
        let (y, u) = (y.to_f64(), x[0].to_f64());
        match yu_to_zv(&pp, y, u) {
            Ok((z, v)) => {
                dg.min_z_minus_v = dg.min_z_minus_v.min(z - v);
                dg.max_abs_v = dg.max_abs_v.max(v.abs());
                if z >= prev_z {
                    dg.z_monotone = false;
                }
                prev_z = z;
                if let Ok(e) = slope_covariance_error(&pp, y, u) {
                    dg.max_slope_error = dg.max_slope_error.max(e);
                }
            }
            Err(_) => dg.max_abs_v = f64::INFINITY,
        }
        dg.nodes += 1;
    }
    let (z0, v0) = sonic_point_zv(pp.ell, pp.gamma);
    if let Ok((z, v)) = yu_to_zv(&pp, 0.0, fp.u0.to_f64()) {
        dg.sonic_point_error = (z - z0).abs().max((v - v0).abs());
    }
    let c = &s.origin.coefficients;
    dg.max_even_origin_coeff = c.iter().step_by(2).map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    dg.v1_error = Float::with_val(prec, &c[1] - v1_closed_form(fp)).to_f64().abs();
    dg.v3_error = Float::with_val(prec, &c[3] - v3_closed_form(fp)).to_f64().abs();
    let mut cmax: f64 = 0.0;
    for i in 1..(c.len() - 1) / 2 {
        let cat = catalan(i).to_f64().unwrap_or(f64::INFINITY);
        let ratio = log2_abs(&c[2 * i + 1]) - cat.log2();
        cmax = cmax.max(ratio / i as f64);
    }
    dg.origin_growth_c = 2f64.powf(cmax);
    dg
}
