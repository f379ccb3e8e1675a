//! Exact verification, at the limit parameters, of the finite conditions
//! that anchor the coefficient-asymptotics induction.
//!
//! Every comparison is decided in `Q[√15]` (or, for the large uniform grid,
//! in `Z[√15]` after clearing denominators). Floats appear only in the
//! reported slack values, which are diagnostics and never decide a verdict.

use std::cmp::Ordering;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::One;
use rug::{Float, Integer};
use serde::Serialize;

use crate::kernel::decimal::to_sig_digits;
use crate::kernel::{rational, Field, QSqrt15, Rational};
use crate::params::{bigint_to_gmp, q_to_float, ExactParams};
use crate::series::{delta_y_coeff, RecursionData, SeriesCoeffs};

/// Digits used when printing the three closing inequalities.
pub const REPORT_DIGITS: usize = 32;

/// Fixed parameters of the induction.
#[derive(Clone, Debug, Serialize)]
pub struct InductionParams {
    pub l0: usize,
    pub n0: usize,
    pub j0: usize,
    pub n_trunc: usize,
    pub n1: usize,
    /// `δ̂` as a rational.
    pub delta_hat: (i64, i64),
    /// `C̄₁` as a rational.
    pub c_bar1: (i64, i64),
}

impl Default for InductionParams {
    fn default() -> Self {
        Self { l0: 2, n0: 20, j0: 25, n_trunc: 30, n1: 450, delta_hat: (49, 1000), c_bar1: (1246, 100) }
    }
}

impl InductionParams {
    fn delta_hat_q(&self) -> QSqrt15 {
        QSqrt15::from_rat(rational(self.delta_hat.0, self.delta_hat.1))
    }

    fn c_bar1_q(&self) -> QSqrt15 {
        QSqrt15::from_rat(rational(self.c_bar1.0, self.c_bar1.1))
    }

    /// Structural requirements `N < (n₁−2)/2` and `n₁ > n₀ + 2N`.
    pub fn is_consistent(&self) -> bool {
        2 * self.n_trunc < self.n1 - 2 && self.n1 > self.n0 + 2 * self.n_trunc
    }
}

/// One verified clause.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// First failing index, if any.
    pub witness: Option<String>,
    /// Index attaining the smallest slack.
    pub tightest: Option<String>,
    /// Smallest slack `rhs − lhs` (or its logarithm for multiplicative
    /// bounds, as stated in `detail`), as a diagnostic.
    pub margin: f64,
    pub detail: String,
}

/// A set of checks with overall verdict and timing.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub wall_time_s: f64,
}

impl VerificationReport {
    fn new(checks: Vec<CheckResult>, start: Instant) -> Self {
        Self { passed: checks.iter().all(|c| c.passed), checks, wall_time_s: start.elapsed().as_secs_f64() }
    }

    /// Concatenates two reports.
    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.checks.extend(other.checks);
        self.passed = self.passed && other.passed;
        self.wall_time_s += other.wall_time_s;
        self
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tracks the first failure and the tightest slack across a grid.
struct Tracker {
    witness: Option<String>,
    tightest: Option<String>,
    margin: f64,
}

impl Tracker {
    fn new() -> Self {
        Self { witness: None, tightest: None, margin: f64::INFINITY }
    }

    fn record(&mut self, ok: bool, slack: f64, label: impl Fn() -> String) {
        if !ok && self.witness.is_none() {
            self.witness = Some(label());
        }
        if slack < self.margin {
            self.margin = slack;
            self.tightest = Some(label());
        }
    }

    fn finish(self, name: &str, detail: String) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            passed: self.witness.is_none(),
            witness: self.witness,
            tightest: self.tightest,
            margin: self.margin,
            detail,
        }
    }
}

fn f64_of(x: &QSqrt15) -> f64 {
    q_to_float(x, 128).to_f64()
}

/// `ln|x|` at 128 bits (finite for values far outside `f64` range).
fn ln_abs(x: &QSqrt15) -> f64 {
    let v = q_to_float(x, 256).abs();
    if v.is_zero() {
        f64::NEG_INFINITY
    } else {
        v.ln().to_f64()
    }
}

fn max_one(x: &QSqrt15) -> QSqrt15 {
    x.abs().max(QSqrt15::fone())
}

fn lt(a: &QSqrt15, b: &QSqrt15) -> bool {
    a.fcmp(b) == Ordering::Less
}

fn le(a: &QSqrt15, b: &QSqrt15) -> bool {
    a.fcmp(b) != Ordering::Greater
}

/// An element `a + b√15` of `Z[√15]` with GMP parts.
#[derive(Clone, Debug)]
struct Gz {
    a: Integer,
    b: Integer,
}

impl Gz {
    fn mul(&self, o: &Gz) -> Gz {
        Gz {
            a: Integer::from(&self.a * &o.a) + Integer::from(&self.b * &o.b) * 15u32,
            b: Integer::from(&self.a * &o.b) + Integer::from(&self.b * &o.a),
        }
    }

    fn scale(&self, k: &Integer) -> Gz {
        Gz { a: Integer::from(&self.a * k), b: Integer::from(&self.b * k) }
    }

    fn scale_i64(&self, k: i64) -> Gz {
        Gz { a: Integer::from(&self.a * k), b: Integer::from(&self.b * k) }
    }

    fn sub(&self, o: &Gz) -> Gz {
        Gz { a: Integer::from(&self.a - &o.a), b: Integer::from(&self.b - &o.b) }
    }

    fn sign(&self) -> Ordering {
        let (sa, sb) = (self.a.cmp0(), self.b.cmp0());
        if sa == Ordering::Equal {
            return sb;
        }
        if sb == Ordering::Equal || sa == sb {
            return sa;
        }
        // Mixed signs: the larger of a² and 15b² decides.
        let a2 = Integer::from(self.a.square_ref());
        let b2 = Integer::from(self.b.square_ref()) * 15u32;
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    fn abs(&self) -> Gz {
        if self.sign() == Ordering::Less {
            Gz { a: Integer::from(-&self.a), b: Integer::from(-&self.b) }
        } else {
            self.clone()
        }
    }
}

/// `x = num/den` with `num ∈ Z[√15]` and `den > 0`; comparisons between
/// such values need only integer products, no gcd.
#[derive(Clone, Debug)]
struct Scaled {
    num: Gz,
    den: Integer,
}

impl Scaled {
    fn new(x: &QSqrt15) -> Self {
        let den = x.a.denom().lcm(x.b.denom());
        let a = (x.a.clone() * Rational::from_integer(den.clone())).to_integer();
        let b = (x.b.clone() * Rational::from_integer(den.clone())).to_integer();
        Self { num: Gz { a: bigint_to_gmp(&a), b: bigint_to_gmp(&b) }, den: bigint_to_gmp(&den) }
    }

    fn abs(&self) -> Self {
        Self { num: self.num.abs(), den: self.den.clone() }
    }

    /// Sign of `self − o`.
    fn cmp(&self, o: &Scaled) -> Ordering {
        self.num.scale(&o.den).sub(&o.num.scale(&self.den)).sign()
    }
}

/// Exact check of `|Û_j Û_{n−j}| ≤ C̄₁|Û_n|` for `0 ≤ j ≤ n ≤ n₁`, split
/// across `workers` threads by `n`.
fn check_uniform(abs: &[Scaled], lns: &[f64], ip: &InductionParams, workers: usize) -> CheckResult {
    let (cn, cd) = (ip.c_bar1.0, ip.c_bar1.1);
    let ln_c = (cn as f64 / cd as f64).ln();
    let workers = workers.max(1);
    let results: Vec<Tracker> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                sc.spawn(move || {
                    let mut t = Tracker::new();
                    // Interleave rows so that threads get similar work.
                    for n in (w..=ip.n1).step_by(workers) {
                        let rn = abs[n].num.scale_i64(cn);
                        let k = Integer::from(&abs[n].den * cd);
                        for j in 0..=n / 2 {
                            let (x, y) = (&abs[j], &abs[n - j]);
                            // C̄₁|Û_n| − |Û_jÛ_{n−j}| over the common denominator.
                            let dd = Integer::from(&x.den * &y.den);
                            let diff = rn.scale(&dd).sub(&x.num.mul(&y.num).scale(&k));
                            let ok = diff.sign() != Ordering::Less;
                            let slack = if lns[j].is_finite() && lns[n - j].is_finite() {
                                ln_c + lns[n] - lns[j] - lns[n - j]
                            } else {
                                f64::INFINITY
                            };
                            t.record(ok, slack, || format!("n={n}, j={j}"));
                        }
                    }
                    t
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = Tracker::new();
    for t in results {
        if let Some(w) = t.witness {
            total.witness.get_or_insert(w);
        }
        if t.margin < total.margin {
            total.margin = t.margin;
            total.tightest = t.tightest;
        }
    }
    total.finish(
        "a.uniform_bound",
        format!("|U^_j U^_(n-j)| <= C1bar |U^_n| for 0 <= j <= n <= {}; margin = smallest log-slack", ip.n1),
    )
}

/// Clause (a): uniform bound, sign, monotonicity, ratio law and `C̄₁`.
pub fn check_base_case(series: &SeriesCoeffs<QSqrt15>, c_star: &QSqrt15, ip: &InductionParams, workers: usize) -> VerificationReport {
    let start = Instant::now();
    let uh = &series.u_hat;
    assert!(uh.len() > ip.n1, "series must reach order n1");
    let scaled: Vec<Scaled> = uh[..=ip.n1].iter().map(Scaled::new).collect();
    let abs: Vec<Scaled> = scaled.iter().map(Scaled::abs).collect();
    let floats: Vec<Float> = uh[..=ip.n1].iter().map(|x| q_to_float(x, 256)).collect();
    let lns: Vec<f64> =
        floats.iter().map(|v| if v.is_zero() { f64::NEG_INFINITY } else { Float::with_val(256, v.abs_ref()).ln().to_f64() }).collect();
    let mut checks = vec![check_uniform(&abs, &lns, ip, workers)];

    let mut t = Tracker::new();
    for n in ip.n0..=ip.n1 {
        let ok = scaled[n].num.sign() == Ordering::Greater;
        t.record(ok, lns[n] * if ok { 1.0 } else { -1.0 }, || format!("n={n}"));
    }
    checks.push(t.finish("a.sign", format!("U^_n > 0 for {} <= n <= {}; margin = min signed ln|U^_n|", ip.n0, ip.n1)));

    let mut t = Tracker::new();
    for n in ip.n0..=ip.n1 {
        let ok = abs[n - 1].cmp(&abs[n]) == Ordering::Less;
        t.record(ok, lns[n] - lns[n - 1], || format!("n={n}"));
    }
    checks.push(t.finish("a.monotone", format!("|U^_(n-1)| < |U^_n| for {} <= n <= {}; margin = min log-ratio", ip.n0, ip.n1)));

    // |Û_n − T| ≤ δ̂|T| with T = (C*/4)·n·Û_{n−1}, all over one denominator.
    let quarter = Scaled::new(&c_star.fmul_rational(&rational(1, 4)));
    let quarter_f = q_to_float(c_star, 256) / 4u32;
    let (dn, dd) = ip.delta_hat;
    let mut t = Tracker::new();
    for n in ip.n0..=ip.n1 {
        let (x, y) = (&scaled[n], &scaled[n - 1]);
        let t_num = quarter.num.mul(&y.num).scale_i64(n as i64);
        let t_den = Integer::from(&quarter.den * &y.den);
        // Multiply both sides by den_n·t_den.
        let lhs = x.num.scale(&t_den).sub(&t_num.scale(&x.den)).abs().scale_i64(dd);
        let rhs = t_num.scale(&x.den).abs().scale_i64(dn);
        let ok = rhs.sub(&lhs).sign() != Ordering::Less;
        let target = Float::with_val(256, &quarter_f * &floats[n - 1]) * n as u32;
        let rel = (Float::with_val(256, &floats[n] / &target) - 1u32).abs().to_f64();
        t.record(ok, dn as f64 / dd as f64 - rel, || format!("n={n}"));
    }
    checks.push(t.finish(
        "a.ratio_law",
        format!("|U^_n - (C*/4) n U^_(n-1)| <= delta_hat (C*/4) n |U^_(n-1)| for {} <= n <= {}", ip.n0, ip.n1),
    ));

    let c1 = ip.c_bar1_q();
    let m = max_one(&uh[0]);
    let mut t = Tracker::new();
    t.record(lt(&m, &c1), f64_of(&c1.fsub(&m)), || "n=0".into());
    checks.push(t.finish("a.c_bar1", "C1bar > max(1, |U^_0|)".into()));
    VerificationReport::new(checks, start)
}

/// `M₁ = max_{l ≤ l₀} |Û_{n₀}|/(n₀!·max(|Û_l|,1))·(C*/4)^{l−n₀}`.
pub fn m1(series: &SeriesCoeffs<QSqrt15>, c_star: &QSqrt15, ip: &InductionParams) -> QSqrt15 {
    let uh = &series.u_hat;
    let fact: BigInt = (1..=ip.n0 as u64).map(BigInt::from).product();
    let quarter_inv = c_star.fmul_rational(&rational(1, 4)).finv().expect("C* is nonzero");
    let mut best: Option<QSqrt15> = None;
    for l in 0..=ip.l0 {
        let v = uh[ip.n0]
            .abs()
            .fmul_rational(&Rational::new(BigInt::one(), fact.clone()))
            .fmul(&max_one(&uh[l]).finv().expect("nonzero"))
            .fmul(&quarter_inv.pow((ip.n0 - l) as u32));
        best = Some(match best {
            None => v,
            Some(b) => b.max(v),
        });
    }
    best.expect("l0 >= 0")
}

/// Clauses (b) and (c): the growth grid and the `M₁` product inequality.
pub fn check_growth_conditions(series: &SeriesCoeffs<QSqrt15>, c_star: &QSqrt15, ip: &InductionParams) -> VerificationReport {
    let start = Instant::now();
    let uh = &series.u_hat;
    let dh = ip.delta_hat_q();
    let base = c_star
        .fmul_rational(&rational(1, 4))
        .fmul(&QSqrt15::fone().fsub(&dh))
        .fmul_rational(&rational((ip.n1 + 1 - ip.n_trunc - ip.j0) as i64, 1));
    let mut t = Tracker::new();
    for j in 1..=ip.j0 {
        for l in 0..=ip.l0 {
            let lhs = base.pow((j - 1) as u32);
            let rhs = uh[j + l - 1]
                .abs()
                .fmul_rational(&Rational::from_integer(BigInt::one() << (j - 1)))
                .fmul(&max_one(&uh[l]).finv().expect("nonzero"));
            let slack = ln_abs(&lhs) - ln_abs(&rhs);
            t.record(le(&rhs, &lhs), slack, || format!("j={j}, l={l}"));
        }
    }
    let mut checks = vec![t.finish(
        "b.growth_grid",
        format!("((C*/4)(1-delta_hat)(n1+1-N-j0))^(j-1) >= 2^(j-1)|U^_(j+l-1)|/max(|U^_l|,1), 1<=j<={}, 0<=l<={}; margin = min log-slack", ip.j0, ip.l0),
    )];

    let m1v = m1(series, c_star, ip);
    // (1/(j0+l0))^l0 · (1/M1) · (9/5)^j0 / (3√j0) > 1, with √j0 replaced by
    // an upper bound when j0 is not a perfect square.
    let j0 = ip.j0 as i64;
    let sqrt_up = {
        let r = crate::kernel::qsqrt15::rational_sqrt(&rational(j0, 1));
        r.unwrap_or_else(|| {
            let s = (j0 as f64).sqrt().ceil() as i64;
            rational(s, 1)
        })
    };
    let lhs = QSqrt15::from_rat(
        rational(1, (ip.j0 + ip.l0) as i64).pow(ip.l0 as i32)
            * rational(9, 5).pow(ip.j0 as i32)
            / (rational(3, 1) * sqrt_up),
    )
    .fmul(&m1v.finv().expect("M1 > 0"));
    let mut t = Tracker::new();
    t.record(lt(&QSqrt15::fone(), &lhs), f64_of(&lhs) - 1.0, || "c".into());
    checks.push(t.finish("c.m1_product", format!("M1 = {}; product = {}", to_sig_digits(&m1v, 12), to_sig_digits(&lhs, 12))));
    let mut t = Tracker::new();
    t.record(m1v.signum_exact() == Ordering::Greater, f64_of(&m1v), || "M1".into());
    checks.push(t.finish("c.m1_positive", "M1 > 0".into()));
    VerificationReport::new(checks, start)
}

/// Exact constants of the closing inequalities.
#[derive(Clone, Debug)]
pub struct InductionConstants {
    pub c_star: QSqrt15,
    pub lam_plus: QSqrt15,
    pub b3: QSqrt15,
    pub q_n1: QSqrt15,
    pub m1: QSqrt15,
    pub nu1: QSqrt15,
    pub c_j1: QSqrt15,
    pub c_j2: QSqrt15,
    pub c_j3: QSqrt15,
    pub c_e: QSqrt15,
    /// `e_l` for `l = 0..=N−2`.
    pub e: Vec<QSqrt15>,
    /// `Δ_{Y,l}` for `l = 0..=N−1`.
    pub delta_y: Vec<QSqrt15>,
}

/// `b_{2,l} = C̄₁^l·max(|Û₁|,1)` for `l ≥ 0`, and `b_{2,−1} = 1`.
fn b2(l: i64, uh1: &QSqrt15, c1: &QSqrt15) -> QSqrt15 {
    if l < 0 {
        QSqrt15::fone()
    } else {
        c1.pow(l as u32).fmul(&max_one(uh1))
    }
}

fn pow2(k: i64) -> Rational {
    if k >= 0 {
        Rational::from_integer(BigInt::one() << k as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Assembles `b₃`, `q_{n₁}`, `ν₁`, `C_{J1}`, `C_{J2}`, `C_{J3}`, `e_l` and
/// `C_ℰ(n₁)` from the exact series.
pub fn compute_constants(series: &SeriesCoeffs<QSqrt15>, ep: &ExactParams, ip: &InductionParams) -> InductionConstants {
    let u = &series.u;
    let uh = &series.u_hat;
    let nn = ip.n_trunc;
    let c1 = ip.c_bar1_q();
    let dh = ip.delta_hat_q();
    let data = RecursionData::from_exact(ep);
    let d = ep.d as i64;
    // Polynomial degrees of the U-expansion of Δ_Y (d_G) and of Δ_U / Δ_Y in U.
    let (d_g, d_y) = (3i64, 1i64);

    let delta_y: Vec<QSqrt15> = (0..nn).map(|l| delta_y_coeff(&data, u, l)).collect();
    let c_star = ep.c_star.clone();

    // b₃: terms with Û_i = 0 contribute 0.
    let mut b3 = QSqrt15::fzero();
    for i in 0..=nn {
        if uh[i].fis_zero() {
            continue;
        }
        for l in 0..=ip.l0 {
            let v = uh[i].fmul(&uh[i + l].finv().expect("nonzero")).abs();
            b3 = b3.max(v);
        }
    }
    let q_n1 = c_star
        .fmul_rational(&rational((ip.n1 - nn) as i64, 4))
        .fmul(&QSqrt15::fone().fsub(&dh));

    let nu = |l: i64| -> QSqrt15 {
        let mut best = QSqrt15::fzero();
        let q_inv = q_n1.finv().expect("q > 0");
        for m in 0..=(nn - 2) {
            let a1 = c1.pow((l - 1) as u32).fmul(&q_inv.pow(m as u32));
            let a2 = b2(l - 2, &uh[1], &c1).fmul_rational(&pow2(-((nn - 2 - m) as i64)));
            best = best.max(uh[m + 2].abs().fmul(&a1.min(a2)));
        }
        let m012 = (0..=2).map(|m| max_one(&uh[m])).fold(QSqrt15::fone(), |a, b| a.max(b));
        let second = max_one(&uh[0])
            .fmul_rational(&pow2(d_g - 1))
            .max(m012.fmul_rational(&rational(2, 1)))
            .fmul_rational(&pow2(-(nn as i64)));
        b3.fmul(&best).fadd(&second)
    };
    let nu1 = nu(1);

    // Coefficients of Δ_Y = G₀ + G₁U and Δ_U = F₁U + F₂U².
    let g1 = [QSqrt15::from_i64(-1), QSqrt15::from_i64(d)];
    let f1: Vec<QSqrt15> = ep.h.iter().map(|x| x.fadd(x)).collect();
    let f2 = [QSqrt15::from_i64(2)];

    let g1_abs_sum = g1.iter().fold(QSqrt15::fzero(), |a, c| a.fadd(&c.abs()));
    let c_j1 = g1_abs_sum.fmul(&nu1).fmul_rational(&pow2(2 * (d_y + 2)));

    let mut s = QSqrt15::fzero();
    for (j, c) in g1.iter().enumerate() {
        s = s.fadd(&c.abs().fmul(&b2(-1, &uh[1], &c1)).fmul_rational(&pow2(j as i64 + 1)));
    }
    let c_j2 = s.fmul(&u[1].abs()).fmul_rational(&pow2(-(nn as i64) + 2 * d_g));

    let mut s = QSqrt15::fzero();
    for (j, c) in f1.iter().enumerate() {
        s = s.fadd(&c.abs().fmul(&b2(-1, &uh[1], &c1)).fmul_rational(&pow2(j as i64 + 1)));
    }
    for (j, c) in f2.iter().enumerate() {
        s = s.fadd(&c.abs().fmul(&b2(0, &uh[1], &c1)).fmul_rational(&pow2(j as i64 + 1)));
    }
    let c_j3 = s.fmul_rational(&pow2(-(nn as i64) + 2 * d_y));

    // e_l = Σ_j c_{Y,j}(l+1−j)U_{l+1−j} − c_{U,l}, with c_Y = (−1, d, 0, …)
    // and c_{U,j} = 4U_j + 2h_j.
    let e_of = |l: usize| -> QSqrt15 {
        let mut s = QSqrt15::fzero();
        for (j, cy) in g1.iter().enumerate().take(l + 1) {
            let k = l + 1 - j;
            s = s.fadd(&cy.fmul(&u[k]).fmul_rational(&rational(k as i64, 1)));
        }
        let mut cu = u[l].fmul_rational(&rational(4, 1));
        if let Some(h) = ep.h.get(l) {
            cu = cu.fadd(&h.fadd(h));
        }
        s.fsub(&cu)
    };
    let e: Vec<QSqrt15> = (0..=nn - 2).map(e_of).collect();

    let three_q_inv = q_n1.fmul_rational(&rational(3, 1)).finv().expect("q > 0");
    let mut c_e = QSqrt15::fzero();
    for l in 2..=nn - 2 {
        let term = e[l]
            .abs()
            .fmul_rational(&rational(1, ip.n1 as i64))
            .fadd(&delta_y[l + 1].abs())
            .fmul(&three_q_inv.pow((l - 1) as u32));
        c_e = c_e.fadd(&term);
    }

    InductionConstants {
        c_star,
        lam_plus: ep.lam_plus.clone(),
        b3,
        q_n1,
        m1: m1(series, &ep.c_star, ip),
        nu1,
        c_j1,
        c_j2,
        c_j3,
        c_e,
        e,
        delta_y,
    }
}

/// Printable form of one closing inequality.
#[derive(Clone, Debug, Serialize)]
pub struct ClosingInequality {
    pub label: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

/// Outcome of the closing inequalities, with the left and right sides to
/// [`REPORT_DIGITS`] significant digits.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub report: VerificationReport,
    pub inequalities: Vec<ClosingInequality>,
}

/// Left side of inequality (i).
pub fn claim_i_lhs(k: &InductionConstants, ip: &InductionParams) -> QSqrt15 {
    k.c_j2
        .fadd(&k.c_j3)
        .fadd(&k.e[1].abs())
        .fadd(&k.delta_y[2].abs())
        .fmul_rational(&rational(1, ip.n1 as i64))
        .fadd(&k.c_j1)
        .fadd(&k.c_e)
}

/// Verifies the three closing inequalities for the given `δ̂` (passed
/// separately so that perturbation tests can tighten it).
pub fn check_closing_inequalities(k: &InductionConstants, series: &SeriesCoeffs<QSqrt15>, ip: &InductionParams) -> ClaimReport {
    let start = Instant::now();
    let dh = ip.delta_hat_q();
    let mut rows = vec![];
    let mut checks = vec![];
    let mut push = |label: &str, lhs: QSqrt15, rhs: QSqrt15, desc: &str| {
        let holds = lt(&lhs, &rhs);
        let mut t = Tracker::new();
        t.record(holds, f64_of(&rhs.fsub(&lhs)), || label.to_string());
        checks.push(t.finish(label, desc.to_string()));
        rows.push(ClosingInequality {
            label: label.to_string(),
            lhs: to_sig_digits(&lhs, REPORT_DIGITS),
            rhs: to_sig_digits(&rhs, REPORT_DIGITS),
            holds,
        });
    };
    push(
        "claim.i",
        claim_i_lhs(k, ip),
        dh.clone(),
        "n1^-1 (C_J2 + C_J3 + |e_1| + |Delta_Y2|) + C_J1 + C_E(n1) < delta_hat",
    );
    push("claim.ii", max_one(&series.u_hat[1]), k.q_n1.clone(), "max(|U^_1|, 1) < q_n1");
    let lhs3 = k
        .c_star
        .fmul_rational(&rational(3, 2 * (4 * ip.n1 as i64 - 2)))
        .fadd(&QSqrt15::from_rat(rational(5, 100)).fmul(&k.lam_plus.finv().expect("lambda+ > 0")));
    let rhs3 = k.c_star.fmul_rational(&rational(1, 4)).fmul(&dh);
    push("claim.iii", lhs3, rhs3, "3 C* / (2(4 n1 - 2)) + 0.05/lambda+ < (C*/4) delta_hat");
    ClaimReport { report: VerificationReport::new(checks, start), inequalities: rows }
}

/// JSON-friendly dump of the constants.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsJson {
    pub c_star: String,
    pub b3: String,
    pub q_n1: String,
    pub m1: String,
    pub nu1: String,
    pub c_j1: String,
    pub c_j2: String,
    pub c_j3: String,
    pub c_e: String,
    pub e1: String,
    pub delta_y2: String,
}

impl InductionConstants {
    pub fn to_json(&self, digits: usize) -> ConstantsJson {
        let s = |x: &QSqrt15| to_sig_digits(x, digits);
        ConstantsJson {
            c_star: s(&self.c_star),
            b3: s(&self.b3),
            q_n1: s(&self.q_n1),
            m1: s(&self.m1),
            nu1: s(&self.nu1),
            c_j1: s(&self.c_j1),
            c_j2: s(&self.c_j2),
            c_j3: s(&self.c_j3),
            c_e: s(&self.c_e),
            e1: s(&self.e[1]),
            delta_y2: s(&self.delta_y[2]),
        }
    }
}

/// Full induction verification output.
#[derive(Clone, Debug, Serialize)]
pub struct InductionOutcome {
    pub passed: bool,
    pub params: InductionParams,
    pub base_case: VerificationReport,
    pub growth: VerificationReport,
    pub closing: ClaimReport,
    pub constants: ConstantsJson,
}

/// Runs every clause at the limit parameters.
pub fn verify_all(series: &SeriesCoeffs<QSqrt15>, ep: &ExactParams, ip: &InductionParams, workers: usize) -> InductionOutcome {
    let base_case = check_base_case(series, &ep.c_star, ip, workers);
    let growth = check_growth_conditions(series, &ep.c_star, ip);
    let k = compute_constants(series, ep, ip);
    let closing = check_closing_inequalities(&k, series, ip);
    InductionOutcome {
        passed: base_case.passed && growth.passed && closing.report.passed,
        params: ip.clone(),
        base_case,
        growth,
        closing,
        constants: k.to_json(REPORT_DIGITS),
    }
}

/// Series order needed by [`verify_all`].
pub fn required_order(ip: &InductionParams) -> usize {
    ip.n1 + 1
}

/// Environment variable seeding every stochastic sampling (mutation tests,
/// random evidence points).
pub const SEED_ENV: &str = "IMPLODE_CERT_SEED";
/// Seed used when [`SEED_ENV`] is unset or unparsable.
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Seed from [`SEED_ENV`], falling back to [`DEFAULT_SEED`].
pub fn cert_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// A single-coefficient corruption of `Û`.
#[derive(Clone, Debug, Serialize)]
pub struct Mutation {
    pub index: usize,
    /// `Û_index` is multiplied by `sign·10^exponent`.
    pub exponent: i32,
    pub sign: i8,
}

impl Mutation {
    /// Draws an index in `[2, n₁]` (orders 0 and 1 are fixed by the sonic
    /// point data), a decade shift in `±{1, 2, 3}` and a random sign.
    pub fn random(rng: &mut impl rand::Rng, ip: &InductionParams) -> Self {
        let index = rng.random_range(2..=ip.n1);
        let exponent = rng.random_range(1..=3) * if rng.random_bool(0.5) { 1 } else { -1 };
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        Self { index, exponent, sign }
    }

    /// Applies the corruption to `u_hat` (and consistently to `u`).
    pub fn apply(&self, series: &mut SeriesCoeffs<QSqrt15>) {
        let ten = rational(10, 1);
        let mut f = Rational::one();
        for _ in 0..self.exponent.unsigned_abs() {
            f *= &ten;
        }
        if self.exponent < 0 {
            f = f.recip();
        }
        if self.sign < 0 {
            f = -f;
        }
        let i = self.index;
        series.u_hat[i] = series.u_hat[i].fmul_rational(&f);
        series.u[i] = series.u[i].fmul_rational(&f);
    }
}

/// Outcome of one mutation run: which clauses flipped.
#[derive(Clone, Debug, Serialize)]
pub struct MutationOutcome {
    pub mutation: Mutation,
    pub failed_clauses: Vec<String>,
    pub witnesses: Vec<String>,
}

impl MutationOutcome {
    pub fn detected(&self) -> bool {
        !self.failed_clauses.is_empty()
    }
}

/// Runs clause (a) on `count` independently mutated copies of `series`.
pub fn mutation_suite(
    series: &SeriesCoeffs<QSqrt15>,
    c_star: &QSqrt15,
    ip: &InductionParams,
    count: usize,
    seed: u64,
    workers: usize,
) -> Vec<MutationOutcome> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mutation = Mutation::random(&mut rng, ip);
            let mut m = series.clone();
            mutation.apply(&mut m);
            let r = check_base_case(&m, c_star, ip, workers);
            let failed: Vec<&CheckResult> = r.checks.iter().filter(|c| !c.passed).collect();
            MutationOutcome {
                mutation,
                failed_clauses: failed.iter().map(|c| c.name.clone()).collect(),
                witnesses: failed.iter().filter_map(|c| c.witness.clone()).collect(),
            }
        })
        .collect()
}
