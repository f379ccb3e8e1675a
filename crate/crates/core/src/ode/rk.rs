//! Dormand–Prince 5(4) with Shampine's dense output and event location.

use crate::error::{Error, Result};

use super::{bisect_fraction, Event, EventSpec, EVENT_TOL};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Step-size control settings.
#[derive(Clone, Copy, Debug)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl RkOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, h_init: 1e-4, h_min: 1e-14, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// Continuous extension over one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    r: [Vec<f64>; 5],
}

impl DenseSegment {
    /// State at `t0 + θh`.
    pub fn eval_fraction(&self, theta: f64) -> Vec<f64> {
        let th1 = 1.0 - theta;
        (0..self.r[0].len())
            .map(|i| {
                let r = &self.r;
                r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])))
            })
            .collect()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.eval_fraction((t - self.t0) / self.h)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = if self.h > 0.0 { (self.t0, self.t0 + self.h) } else { (self.t0 + self.h, self.t0) };
        a <= t && t <= b
    }
}

/// Accepted nodes, dense segments and located events.
#[derive(Clone, Debug, Default)]
pub struct RkSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub segments: Vec<DenseSegment>,
    pub events: Vec<Event>,
    pub rejected: usize,
}

impl RkSolution {
    /// Dense evaluation anywhere in the integrated range.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let idx = self.segments.partition_point(|s| {
            let end = s.t0 + s.h;
            if s.h > 0.0 {
                end < t
            } else {
                end > t
            }
        });
        self.segments.get(idx).filter(|s| s.contains(t)).map(|s| s.eval(t))
    }
}

fn err_norm(y0: &[f64], y1: &[f64], err: &[f64], o: &RkOptions) -> f64 {
    let s: f64 = (0..y0.len())
        .map(|i| {
            let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (s / y0.len() as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction), stopping
/// at the first terminal event. A step size below `h_min` is recorded as a
/// `StepFailure` event and returned as an error.
pub fn dopri5(
    f: impl Fn(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &RkOptions,
    events: &[EventSpec],
) -> Result<RkSolution> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let n = y0.len();
    let mut sol = RkSolution { t: vec![t0], y: vec![y0.to_vec()], ..Default::default() };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    let mut h = opts.h_init.min(opts.h_max).min((t1 - t0).abs());
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();
    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(sol);
        }
        h = h.min((t1 - t).abs());
        let hs = h * dir;
        let mut k = vec![k1.clone()];
        for s in 1..7 {
            let yi: Vec<f64> = (0..n).map(|i| y[i] + hs * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()).collect();
            k.push(f(t + C[s] * hs, &yi));
        }
        let y_new: Vec<f64> = (0..n).map(|i| y[i] + hs * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>()).collect();
        let err: Vec<f64> = (0..n).map(|i| hs * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>()).collect();
        let en = err_norm(&y, &y_new, &err, opts);
        if !en.is_finite() || en > 1.0 {
            sol.rejected += 1;
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= fac;
            if h < opts.h_min {
                sol.events.push(Event { kind: super::EventKind::StepFailure, at: t, state: y.clone() });
                return Err(Error::IntegrationFailure(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        let r1: Vec<f64> = (0..n).map(|i| y_new[i] - y[i]).collect();
        let r2: Vec<f64> = (0..n).map(|i| hs * k[0][i] - r1[i]).collect();
        let r3: Vec<f64> = (0..n).map(|i| r1[i] - hs * k[6][i] - r2[i]).collect();
        let r4: Vec<f64> = (0..n).map(|i| hs * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>()).collect();
        let seg = DenseSegment { t0: t, h: hs, r: [y.clone(), r1, r2, r3, r4] };
        // Events: earliest sign change among all event functions.
        let g_new: Vec<f64> = events.iter().map(|e| (e.g)(t + hs, &y_new)).collect();
        let mut first: Option<(f64, usize)> = None;
        for (i, e) in events.iter().enumerate() {
            if g_prev[i].is_finite() && g_new[i].is_finite() && (g_prev[i] > 0.0) != (g_new[i] > 0.0) {
                let th = bisect_fraction(|th| (e.g)(t + th * hs, &seg.eval_fraction(th)), EVENT_TOL / h.max(EVENT_TOL));
                if first.is_none_or(|(t0, _)| th < t0) {
                    first = Some((th, i));
                }
            }
        }
        if let Some((th, i)) = first {
            let te = t + th * hs;
            let ye = seg.eval_fraction(th);
            sol.events.push(Event { kind: events[i].kind, at: te, state: ye.clone() });
            if events[i].terminal {
                sol.segments.push(seg);
                sol.t.push(te);
                sol.y.push(ye);
                return Ok(sol);
            }
        }
        sol.segments.push(seg);
        t += hs;
        y = y_new;
        k1 = k[6].clone();
        sol.t.push(t);
        sol.y.push(y.clone());
        g_prev = g_new;
        h *= (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
        h = h.min(opts.h_max);
    }
    Err(Error::IntegrationFailure("maximum number of steps reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::EventKind;

    #[test]
    fn exponential_growth_to_tolerance() {
        let o = RkOptions::with_tol(1e-11);
        let s = dopri5(|_, y| vec![y[0]], 0.0, &[1.0], 2.0, &o, &[]).unwrap();
        let y = s.y.last().unwrap()[0];
        assert!((y - 2f64.exp()).abs() < 1e-9);
        let mid = s.eval(1.234).unwrap()[0];
        assert!((mid - 1.234f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn backward_integration_and_terminal_event() {
        let o = RkOptions::with_tol(1e-10);
        // y = cos t from t = 0 back to t = -3; event at y = 0 (t = -π/2).
        let ev = [EventSpec::new(EventKind::Stop, true, |_, y: &[f64]| y[0])];
        let s = dopri5(|_, y| vec![y[1], -y[0]], 0.0, &[1.0, 0.0], -3.0, &o, &ev).unwrap();
        assert_eq!(s.events.len(), 1);
        assert!((s.events[0].at + std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}
