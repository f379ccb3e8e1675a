//! Taylor-series stepping in MPFR.
//!
//! At each node the solution is expanded to order `K` by the same recursion
//! that produces the sonic-point series, but around a regular point. The step
//! length follows from the size of the last two coefficients, so that the
//! truncation error stays below `2^{tol_log2}` relative to the state. Each
//! accepted step keeps its polynomial, which doubles as dense output.

use rug::Float;

use crate::error::{Error, Result};
use crate::params::FloatParams;

use super::{bisect_fraction, Event, EventKind, EventSpec, SystemKind, EVENT_TOL};

/// A system that can produce Taylor coefficients of its solutions.
pub trait TaylorSystem {
    fn kind(&self) -> SystemKind;
    fn prec(&self) -> u32;
    /// Coefficients (one vector per component) of the solution through
    /// `x` at `t`, in powers of the displacement from `t`.
    fn expand(&self, t: &Float, x: &[Float], order: usize) -> Result<Vec<Vec<Float>>>;
}

/// Step control for [`integrate_taylor`].
#[derive(Clone, Copy, Debug)]
pub struct TaylorOptions {
    pub order: usize,
    /// Target truncation error per step, as a power of two.
    pub tol_log2: f64,
    /// Largest allowed step in the independent variable.
    pub h_max: f64,
    /// Smallest allowed step (below it the integration fails).
    pub h_min: f64,
    pub max_steps: usize,
}

impl TaylorOptions {
    /// Defaults for working precision `prec`: order 200 and a truncation
    /// target 24 bits above the rounding level.
    pub fn for_prec(prec: u32) -> Self {
        Self { order: 200, tol_log2: -(prec as f64) + 24.0, h_max: f64::INFINITY, h_min: 1e-30, max_steps: 20_000 }
    }
}

/// One accepted step with its Taylor polynomials.
#[derive(Clone, Debug)]
pub struct TaylorStep {
    pub t0: Float,
    /// Signed step length.
    pub h: Float,
    pub coeffs: Vec<Vec<Float>>,
    /// `c_k·h^k` in double precision, for cheap evaluation at a fraction.
    scaled: Vec<Vec<f64>>,
}

fn float_log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

fn horner_f64(c: &[f64], th: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * th + a)
}

/// Horner evaluation in MPFR.
pub fn horner(c: &[Float], x: &Float) -> Float {
    let mut s = Float::with_val(x.prec(), 0);
    for a in c.iter().rev() {
        s *= x;
        s += a;
    }
    s
}

impl TaylorStep {
    fn new(t0: Float, h: Float, coeffs: Vec<Vec<Float>>) -> Self {
        let scaled = coeffs
            .iter()
            .map(|c| {
                let mut p = Float::with_val(h.prec(), 1);
                c.iter()
                    .map(|a| {
                        let v = Float::with_val(h.prec(), a * &p).to_f64();
                        p *= &h;
                        v
                    })
                    .collect()
            })
            .collect();
        Self { t0, h, coeffs, scaled }
    }

    /// State at `t0 + θh` in double precision.
    pub fn eval_fraction_f64(&self, th: f64) -> Vec<f64> {
        self.scaled.iter().map(|c| horner_f64(c, th)).collect()
    }

    /// Derivative with respect to the independent variable at `t0 + θh`.
    pub fn deriv_fraction_f64(&self, th: f64) -> Vec<f64> {
        let h = self.h.to_f64();
        self.scaled
            .iter()
            .map(|c| {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
                horner_f64(&d, th) / h
            })
            .collect()
    }

    /// State at displacement `s` from `t0` in MPFR.
    pub fn eval_at_offset(&self, s: &Float) -> Vec<Float> {
        self.coeffs.iter().map(|c| horner(c, s)).collect()
    }

    /// Derivative at displacement `s` from `t0` in MPFR.
    pub fn deriv_at_offset(&self, s: &Float) -> Vec<Float> {
        let prec = s.prec();
        self.coeffs
            .iter()
            .map(|c| {
                let d: Vec<Float> =
                    c.iter().enumerate().skip(1).map(|(k, a)| Float::with_val(prec, a * k as u32)).collect();
                horner(&d, s)
            })
            .collect()
    }

    pub fn t1(&self) -> Float {
        Float::with_val(self.h.prec(), &self.t0 + &self.h)
    }

    /// Whether `t` lies in the closed step interval.
    pub fn contains(&self, t: &Float) -> bool {
        let t1 = self.t1();
        let (a, b) = if self.h.is_sign_negative() { (&t1, &self.t0) } else { (&self.t0, &t1) };
        a <= t && t <= b
    }
}

/// Output of [`integrate_taylor`].
#[derive(Clone, Debug)]
pub struct TaylorTrajectory {
    pub kind: SystemKind,
    pub t: Vec<Float>,
    pub x: Vec<Vec<Float>>,
    pub steps: Vec<TaylorStep>,
    pub events: Vec<Event>,
    /// The terminal event that stopped the integration (`ReachedTarget` if
    /// the end of the interval was reached).
    pub stopped_by: EventKind,
}

impl TaylorTrajectory {
    pub fn last_t(&self) -> &Float {
        self.t.last().expect("trajectory has a start node")
    }

    pub fn last_x(&self) -> &[Float] {
        self.x.last().expect("trajectory has a start node")
    }

    /// Dense evaluation in MPFR at any `t` covered by the steps.
    pub fn eval(&self, t: &Float) -> Option<Vec<Float>> {
        self.steps.iter().find(|s| s.contains(t)).map(|s| {
            let off = Float::with_val(t.prec(), t - &s.t0);
            s.eval_at_offset(&off)
        })
    }

    pub fn event(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

fn to_f64s(x: &[Float]) -> Vec<f64> {
    x.iter().map(Float::to_f64).collect()
}

/// Step length from the tail coefficients.
fn step_length(coeffs: &[Vec<Float>], opts: &TaylorOptions) -> f64 {
    let k = opts.order;
    let mut log_h = f64::INFINITY;
    for c in coeffs {
        let scale = (1.0 + c[0].to_f64().abs()).log2();
        for j in [k - 1, k] {
            let la = float_log2_abs(&c[j]);
            if la.is_finite() {
                log_h = log_h.min((opts.tol_log2 + scale - la) / j as f64);
            }
        }
    }
    if log_h.is_finite() {
        2f64.powf(log_h)
    } else {
        opts.h_max
    }
}

/// Integrates from `(t0, x0)` towards `t_end`, stopping at the first terminal
/// event; non-terminal events are recorded and the integration continues.
pub fn integrate_taylor<S: TaylorSystem>(
    sys: &S,
    t0: &Float,
    x0: &[Float],
    t_end: &Float,
    opts: &TaylorOptions,
    events: &[EventSpec],
) -> Result<TaylorTrajectory> {
    let prec = sys.prec();
    let forward = t_end >= t0;
    let mut tr = TaylorTrajectory {
        kind: sys.kind(),
        t: vec![t0.clone()],
        x: vec![x0.to_vec()],
        steps: vec![],
        events: vec![],
        stopped_by: EventKind::ReachedTarget,
    };
    let mut t = t0.clone();
    let mut x = x0.to_vec();
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(t.to_f64(), &to_f64s(&x))).collect();
    for _ in 0..opts.max_steps {
        let remaining = Float::with_val(prec, t_end - &t);
        if remaining.is_zero() || (remaining.is_sign_negative() == forward && !remaining.is_zero()) {
            return Ok(tr);
        }
        let coeffs = sys.expand(&t, &x, opts.order)?;
        let h_len = step_length(&coeffs, opts).min(opts.h_max);
        if h_len < opts.h_min {
            let at = t.to_f64();
            tr.events.push(Event { kind: EventKind::StepFailure, at, state: to_f64s(&x) });
            return Err(Error::IntegrationFailure(format!("{:?} step size underflow at {at}", sys.kind())));
        }
        let mut h = Float::with_val(prec, if forward { h_len } else { -h_len });
        if Float::with_val(prec, remaining.abs_ref()) <= Float::with_val(prec, h.abs_ref()) {
            h = remaining;
        }
        let step = TaylorStep::new(t.clone(), h, coeffs);
        let x_new: Vec<Float> = step.coeffs.iter().map(|c| horner(c, &step.h)).collect();
        let t_new = step.t1();
        let xf = to_f64s(&x_new);
        if xf.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure(format!("non-finite state at {}", t_new.to_f64())));
        }
        let g_new: Vec<f64> = events.iter().map(|e| (e.g)(t_new.to_f64(), &xf)).collect();
        let hf = step.h.to_f64();
        let tf = t.to_f64();
        let mut hits: Vec<(f64, usize)> = vec![];
        for (i, e) in events.iter().enumerate() {
            if g_prev[i].is_finite() && g_new[i].is_finite() && (g_prev[i] > 0.0) != (g_new[i] > 0.0) {
                let th = bisect_fraction(
                    |th| (e.g)(tf + th * hf, &step.eval_fraction_f64(th)),
                    EVENT_TOL / hf.abs().max(EVENT_TOL),
                );
                hits.push((th, i));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut stop: Option<(f64, usize)> = None;
        for &(th, i) in &hits {
            tr.events.push(Event { kind: events[i].kind, at: tf + th * hf, state: step.eval_fraction_f64(th) });
            if events[i].terminal {
                stop = Some((th, i));
                break;
            }
        }
        if let Some((th, i)) = stop {
            let off = Float::with_val(prec, &step.h * th);
            let xe = step.eval_at_offset(&off);
            tr.t.push(Float::with_val(prec, &t + &off));
            tr.x.push(xe);
            tr.steps.push(step);
            tr.stopped_by = events[i].kind;
            return Ok(tr);
        }
        tr.steps.push(step);
        tr.t.push(t_new.clone());
        tr.x.push(x_new.clone());
        t = t_new;
        x = x_new;
        g_prev = g_new;
    }
    Err(Error::IntegrationFailure(format!("{:?}: maximum number of Taylor steps reached", sys.kind())))
}

/// Coefficients of `c(x₀ + s)` in powers of `s`.
pub fn poly_shift(c: &[Float], x0: &Float) -> Vec<Float> {
    let mut c = c.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = Float::with_val(x0.prec(), &c[j + 1] * x0);
            c[j] += t;
        }
    }
    c
}

fn dot(prec: u32, a: &[Float], b_rev: impl Iterator<Item = Float>) -> Float {
    let mut s = Float::with_val(prec, 0);
    for (x, y) in a.iter().zip(b_rev) {
        s += Float::with_val(prec, x * &y);
    }
    s
}

/// Convolution coefficient `Σ_{i≤k} a_i b_{k−i}`.
fn conv(prec: u32, a: &[Float], b: &[Float], k: usize) -> Float {
    Float::with_val(prec, Float::dot((0..=k).map(|i| (&a[i], &b[k - i]))))
}

/// `dU/dY = Δ_U/Δ_Y` with `Y` as independent variable.
pub struct YuSystem<'a> {
    pub fp: &'a FloatParams,
}

impl TaylorSystem for YuSystem<'_> {
    fn kind(&self) -> SystemKind {
        SystemKind::Yu
    }

    fn prec(&self) -> u32 {
        self.fp.prec
    }

    fn expand(&self, y: &Float, x: &[Float], order: usize) -> Result<Vec<Vec<Float>>> {
        let fp = self.fp;
        let prec = fp.prec;
        let d = fp.d;
        let dy1 = [Float::with_val(prec, y * d) - 1u32, Float::with_val(prec, d)];
        let g0 = poly_shift(&fp.g0, y);
        let hh = poly_shift(&fp.h, y);
        let mut a = vec![x[0].clone()];
        let mut dy: Vec<Float> = Vec::with_capacity(order + 1);
        // da[m] = (m+1)·a_{m+1}
        let mut da: Vec<Float> = Vec::with_capacity(order + 1);
        for k in 0..order {
            let mut v = Float::with_val(prec, &dy1[0] * &a[k]);
            if k >= 1 {
                v += Float::with_val(prec, &dy1[1] * &a[k - 1]);
            }
            if k < g0.len() {
                v += &g0[k];
            }
            dy.push(v);
            if k == 0 && dy[0].is_zero() {
                return Err(Error::IntegrationFailure(format!("Δ_Y vanishes at Y = {}", y.to_f64())));
            }
            let uu = conv(prec, &a, &a, k);
            let mut du = Float::with_val(prec, &uu * 2u32);
            for j in 0..=k.min(2) {
                du += Float::with_val(prec, &hh[j] * &a[k - j]) * 2u32;
            }
            let s = dot(prec, &dy[1..=k], da[..k].iter().rev().cloned());
            let next = (du - s) / Float::with_val(prec, &dy[0] * (k + 1) as u32);
            da.push(Float::with_val(prec, &next * (k + 1) as u32));
            a.push(next);
        }
        Ok(vec![a])
    }
}

/// `(dY/dξ, dU/dξ) = (Δ_Y, Δ_U)`; state `[Y, U]`.
pub struct DesingSystem<'a> {
    pub fp: &'a FloatParams,
}

impl TaylorSystem for DesingSystem<'_> {
    fn kind(&self) -> SystemKind {
        SystemKind::Desing
    }

    fn prec(&self) -> u32 {
        self.fp.prec
    }

    fn expand(&self, _xi: &Float, x: &[Float], order: usize) -> Result<Vec<Vec<Float>>> {
        let fp = self.fp;
        let prec = fp.prec;
        let (g0, h) = (&fp.g0, &fp.h);
        let mut y = vec![x[0].clone()];
        let mut u = vec![x[1].clone()];
        let (mut yy, mut yyy, mut yu, mut yyu) = (vec![], vec![], vec![], vec![]);
        for k in 0..order {
            yy.push(conv(prec, &y, &y, k));
            yyy.push(conv(prec, &yy, &y, k));
            yu.push(conv(prec, &y, &u, k));
            yyu.push(conv(prec, &yy, &u, k));
            let uu = conv(prec, &u, &u, k);
            let mut dy = Float::with_val(prec, &yu[k] * fp.d) - &u[k];
            if k == 0 {
                dy += &g0[0];
            }
            dy += Float::with_val(prec, &g0[1] * &y[k]);
            dy += Float::with_val(prec, &g0[2] * &yy[k]);
            dy += Float::with_val(prec, &g0[3] * &yyy[k]);
            let mut du = Float::with_val(prec, &h[0] * &u[k]);
            du += Float::with_val(prec, &h[1] * &yu[k]);
            du += Float::with_val(prec, &h[2] * &yyu[k]);
            du += uu;
            du *= 2u32;
            y.push(dy / (k + 1) as u32);
            u.push(du / (k + 1) as u32);
        }
        Ok(vec![y, u])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_float, gamma_of_kappa, Config};

    fn fp() -> FloatParams {
        let cfg = Config::default();
        let g = gamma_of_kappa(&Float::with_val(256, 101.5), &cfg, 256).unwrap();
        derive_float(&cfg, &g, 256).unwrap()
    }

    #[test]
    fn shift_of_quadratic() {
        let p = 128;
        let c: Vec<Float> = [1, 2, 3].iter().map(|&v| Float::with_val(p, v)).collect();
        let s = poly_shift(&c, &Float::with_val(p, 2));
        // 1 + 2(x+2) + 3(x+2)² = 17 + 14x + 3x²
        let want = [17, 14, 3];
        for (a, b) in s.iter().zip(want) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn yu_expansion_satisfies_the_ode_at_the_centre() {
        let fp = fp();
        let pp = fp.phase();
        let y = Float::with_val(fp.prec, 0.1);
        let u = Float::with_val(fp.prec, 0.7);
        let c = YuSystem { fp: &fp }.expand(&y, &[u], 30).unwrap();
        let (du, dy) = crate::phase::field_yu(&pp, 0.1, 0.7);
        assert!((c[0][1].to_f64() - du / dy).abs() < 1e-12);
    }

    #[test]
    fn desing_and_yu_trace_the_same_curve() {
        let fp = fp();
        let prec = fp.prec;
        let opts = TaylorOptions { order: 40, ..TaylorOptions::for_prec(prec) };
        let (y0, u0) = (Float::with_val(prec, 0.1), Float::with_val(prec, 0.3));
        let yu = integrate_taylor(
            &YuSystem { fp: &fp },
            &y0,
            &[u0.clone()],
            &Float::with_val(prec, 0.12),
            &opts,
            &[],
        )
        .unwrap();
        let u_end = yu.last_x()[0].to_f64();
        let ev = [EventSpec::new(EventKind::Stop, true, |_, x: &[f64]| x[0] - 0.12)];
        let xi_end = Float::with_val(prec, if crate::phase::field_yu(&fp.phase(), 0.1, 0.3).1 > 0.0 { 10 } else { -10 });
        let ds = integrate_taylor(
            &DesingSystem { fp: &fp },
            &Float::with_val(prec, 0),
            &[y0, u0],
            &xi_end,
            &opts,
            &ev,
        )
        .unwrap();
        assert_eq!(ds.stopped_by, EventKind::Stop);
        let last = ds.last_x();
        assert!((last[0].to_f64() - 0.12).abs() < 1e-10);
        assert!((last[1].to_f64() - u_end).abs() < 1e-9);
    }
}
