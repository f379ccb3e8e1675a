//! Far-field barriers and their exact sign certificates at the limit
//! parameters, plus sampled sign evidence for the local barriers at a
//! working `γ`.
//!
//! The far-field upper barrier is `B_u(Y) = U₀ + U₁Y + 2Y²` and the lower one
//! `B_l(Y) = (e₁Y + e₂Y² − U₀)/(dY − 1)`. Every condition on `(0, Y_O]` is
//! reduced to `Yⁱ·g(Y) > 0` for a polynomial `g`, and `g > 0` is then
//! certified on `[0, Y_O]` with [`poly_sign_on`].

use std::cmp::Ordering;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::decimal::to_sig_digits;
use crate::kernel::sign::SignCertificateJson;
use crate::kernel::{rational, ExactPoly, Field, QSqrt15, Rational, Verdict, DEFAULT_MAX_DEPTH};
use crate::kernel::poly_sign_on;
use crate::params::{ExactParams, FloatParams};
use crate::series::FloatSeries;

/// Second derivative imposed on the lower-barrier residual at `Y = 0`.
pub const LOWER_BARRIER_CURVATURE: i64 = -40;

/// Default local-barrier coefficient factor: `β = −8n²`.
pub const DEFAULT_BETA_FACTOR: f64 = -8.0;

/// Grid size for sampled evidence.
pub const EVIDENCE_GRID: usize = 2048;

/// Rounds of local refinement around the sampled minimum.
pub const EVIDENCE_REFINEMENTS: usize = 3;

/// Digits used for scalar values in certificates.
const DIGITS: usize = 30;

/// The two far-field barriers.
#[derive(Clone, Debug)]
pub struct FarBarriers {
    pub d: u32,
    pub u0: QSqrt15,
    pub u1: QSqrt15,
    pub e1: QSqrt15,
    pub e2: QSqrt15,
}

fn q(v: i64) -> QSqrt15 {
    QSqrt15::from_i64(v)
}

fn poly(c: &[QSqrt15]) -> ExactPoly<QSqrt15> {
    ExactPoly::new(c.to_vec())
}

impl FarBarriers {
    /// `B_u(Y) = U₀ + U₁Y + 2Y²`.
    pub fn upper(&self) -> ExactPoly<QSqrt15> {
        poly(&[self.u0.clone(), self.u1.clone(), q(2)])
    }

    /// Numerator `N(Y) = −U₀ + e₁Y + e₂Y²` of `B_l`.
    pub fn lower_numerator(&self) -> ExactPoly<QSqrt15> {
        poly(&[self.u0.fneg(), self.e1.clone(), self.e2.clone()])
    }

    /// Denominator `D(Y) = dY − 1` of `B_l`.
    pub fn lower_denominator(&self) -> ExactPoly<QSqrt15> {
        poly(&[q(-1), q(self.d as i64)])
    }

    /// `B_l'(0) = −e₁ + dU₀` (equal to `U₁` by construction).
    pub fn lower_slope_at_zero(&self) -> QSqrt15 {
        self.u0.fmul(&q(self.d as i64)).fsub(&self.e1)
    }

    /// `B_l''(0) = −2(e₂ + de₁ − d²U₀)`.
    pub fn lower_curvature_at_zero(&self) -> QSqrt15 {
        let d = q(self.d as i64);
        self.e2.fadd(&d.fmul(&self.e1)).fsub(&d.fmul(&d).fmul(&self.u0)).fmul(&q(-2))
    }

    /// `lim_{Y→Y_O} B_l(Y)(Y − Y_O) = (e₁Y_O + e₂Y_O² − U₀)/d`.
    pub fn lower_pole_residue(&self) -> QSqrt15 {
        let yo = rational(1, self.d as i64);
        self.e1
            .fmul_rational(&yo)
            .fadd(&self.e2.fmul_rational(&(&yo * &yo)))
            .fsub(&self.u0)
            .fmul_rational(&yo)
    }
}

/// The lower-barrier residual numerator
/// `P_l = (N'D − dN)(N + (Y−1)f) − 2N(N + hD)`, so that
/// `B_l'Δ_Y(B_l) − Δ_U(B_l) = P_l/D²`.
fn lower_residual(ep: &ExactParams, n: &ExactPoly<QSqrt15>, dpoly: &ExactPoly<QSqrt15>) -> ExactPoly<QSqrt15> {
    let f = poly(&ep.f);
    let h = poly(&ep.h);
    let ym1 = poly(&[q(-1), q(1)]);
    let d = q(ep.d as i64);
    let t1 = n.derivative().mul(dpoly).sub(&n.scale(&d));
    let t2 = n.add(&ym1.mul(&f));
    let t3 = n.add(&h.mul(dpoly));
    t1.mul(&t2).sub(&n.mul(&t3).scale(&q(2)))
}

/// `[Y²]` of `P/D²` using `1/D² = Σ (k+1)dᵏYᵏ`.
fn second_coeff_over_d2(p: &ExactPoly<QSqrt15>, d: u32) -> QSqrt15 {
    let inv: Vec<QSqrt15> = (0..3).map(|k| q((k + 1) * (d as i64).pow(k as u32))).collect();
    (0..3).fold(QSqrt15::fzero(), |acc, i| acc.fadd(&p.coeff(i).fmul(&inv[2 - i])))
}

/// Builds the far-field barriers: `e₁ = dU₀ − U₁` fixes the slope at zero,
/// and `e₂` solves the (affine in `e₂`) curvature condition on the residual.
pub fn build_far_barriers(ep: &ExactParams) -> FarBarriers {
    let e1 = ep.u0.fmul(&q(ep.d as i64)).fsub(&ep.u1);
    let dpoly = poly(&[q(-1), q(ep.d as i64)]);
    let coeff_at = |e2: QSqrt15| {
        let n = poly(&[ep.u0.fneg(), e1.clone(), e2]);
        second_coeff_over_d2(&lower_residual(ep, &n, &dpoly), ep.d)
    };
    let c0 = coeff_at(QSqrt15::fzero());
    let c1 = coeff_at(QSqrt15::fone());
    // 2(c0 + e2(c1 − c0)) = −40.
    let target = QSqrt15::from_rat(rational(LOWER_BARRIER_CURVATURE, 2));
    let e2 = target.fsub(&c0).fmul(&c1.fsub(&c0).finv().expect("curvature condition depends on e2"));
    FarBarriers { d: ep.d, u0: ep.u0.clone(), u1: ep.u1.clone(), e1, e2 }
}

/// One piece of evidence inside a certificate.
#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    /// `Yⁱ·g(Y) > 0` with `g` certified on the interval.
    Polynomial {
        statement: String,
        /// How the rational inequality was turned into a polynomial one.
        cleared: String,
        stripped_power: usize,
        certificate: SignCertificateJson,
    },
    /// An exact scalar inequality `lhs > rhs`.
    Scalar { statement: String, lhs: String, rhs: String, holds: bool },
    /// Sampled sign data (not a proof).
    Sampled(LocalEvidence),
}

/// A named condition with its evidence.
#[derive(Serialize)]
pub struct BarrierCertificate {
    pub condition: String,
    pub passed: bool,
    /// True only for exact certificates at the limit parameters.
    pub proof_grade: bool,
    pub gamma_mode: String,
    pub evidence: Vec<Evidence>,
    /// For failures: the subinterval (or scalar) where certification stopped.
    pub failure: Option<String>,
}

fn y_o(ep: &ExactParams) -> Rational {
    ep.y_o.clone()
}

/// Certifies `P(Y) > 0` on `(0, Y_O]` by stripping the `Yⁱ` factor and
/// certifying the quotient on `[0, Y_O]`.
fn poly_evidence(statement: &str, cleared: &str, p: &ExactPoly<QSqrt15>, ep: &ExactParams) -> (Evidence, Option<String>) {
    let (i, g) = p.factor_low_power();
    let cert = poly_sign_on(&g, &rational(0, 1), &y_o(ep), DEFAULT_MAX_DEPTH);
    let failure = if cert.verdict == Verdict::Positive {
        None
    } else {
        let from = cert.breakpoints.last().cloned().unwrap_or_default();
        Some(format!("{statement}: sign not certified on [{}, {}]", from, y_o(ep)))
    };
    (
        Evidence::Polynomial {
            statement: statement.to_string(),
            cleared: cleared.to_string(),
            stripped_power: i,
            certificate: cert.to_json(),
        },
        failure,
    )
}

fn scalar_evidence(statement: &str, lhs: &QSqrt15, rhs: &QSqrt15) -> (Evidence, Option<String>) {
    let holds = lhs.fcmp(rhs) == Ordering::Greater;
    let failure = (!holds).then(|| format!("{statement}: fails"));
    (
        Evidence::Scalar {
            statement: statement.to_string(),
            lhs: to_sig_digits(lhs, DIGITS),
            rhs: to_sig_digits(rhs, DIGITS),
            holds,
        },
        failure,
    )
}

fn certificate(condition: &str, parts: Vec<(Evidence, Option<String>)>) -> BarrierCertificate {
    let failure = parts.iter().find_map(|(_, f)| f.clone());
    BarrierCertificate {
        condition: condition.to_string(),
        passed: failure.is_none(),
        proof_grade: true,
        gamma_mode: "exact_limit".into(),
        evidence: parts.into_iter().map(|(e, _)| e).collect(),
        failure,
    }
}

/// Certifies the seven far-field conditions at the limit parameters.
/// `u2` is the second series coefficient.
pub fn certify_prop_bar_f(fb: &FarBarriers, ep: &ExactParams, u2: &QSqrt15) -> Vec<BarrierCertificate> {
    let d = q(ep.d as i64);
    let f = poly(&ep.f);
    let h = poly(&ep.h);
    let ym1 = poly(&[q(-1), q(1)]);
    let n = fb.lower_numerator();
    let dpoly = fb.lower_denominator();
    let bu = fb.upper();
    let mut out = vec![];

    // B_u''(0) = 4 < U''(0) = 2U₂ < B_l''(0).
    let two_u2 = u2.fmul(&q(2));
    out.push(certificate(
        "valida",
        vec![
            scalar_evidence("2 U_2 > 4", &two_u2, &q(4)),
            scalar_evidence("B_l''(0) > 2 U_2", &fb.lower_curvature_at_zero(), &two_u2),
        ],
    ));

    // B_l < U_DY: both share the denominator D < 0 on [0, Y_O).
    let validc = n.add(&ym1.mul(&f));
    out.push(certificate(
        "validc",
        vec![poly_evidence("N + (Y-1) f > 0", "multiplied by -(dY-1) > 0", &validc, ep)],
    ));

    // U_DU = −h < B_u, and B_u < B_l ⇔ B_u·D − N > 0.
    let validd1 = bu.add(&h);
    let validd2 = bu.mul(&dpoly).sub(&n);
    out.push(certificate(
        "validd",
        vec![
            poly_evidence("B_u + h > 0", "none", &validd1, ep),
            poly_evidence("B_u (dY-1) - N > 0", "multiplied by -(dY-1) > 0", &validd2, ep),
        ],
    ));

    // B_l'Δ_Y(B_l) − Δ_U(B_l) = P_l/D² < 0.
    let pl = lower_residual(ep, &n, &dpoly);
    out.push(certificate(
        "ds_a",
        vec![poly_evidence("-P_l > 0", "multiplied by (dY-1)^2 > 0", &pl.neg(), ep)],
    ));

    // B_u'Δ_Y(B_u) − Δ_U(B_u) > 0.
    let dy_bu = dpoly.mul(&bu).add(&ym1.mul(&f));
    let du_bu = bu.mul(&bu.add(&h)).scale(&q(2));
    let dsb = bu.derivative().mul(&dy_bu).sub(&du_bu);
    out.push(certificate("ds_b", vec![poly_evidence("B_u' D_Y(B_u) - D_U(B_u) > 0", "none", &dsb, ep)]));

    // U'(0) = U₁ exceeds 0, U_DU'(0) = A − (d−1) and U_g'(0) = 2ℓγ + 2.
    let ell = QSqrt15::from_rat(ep.ell.clone());
    let ug1 = ell.fmul(&ep.gamma).fmul(&q(2)).fadd(&q(2));
    let udu1 = ep.big_a.fsub(&d.fsub(&q(1)));
    out.push(certificate(
        "root_ineq",
        vec![
            scalar_evidence("U_1 > 0", &ep.u1, &QSqrt15::fzero()),
            scalar_evidence("U_1 > U_DU'(0)", &ep.u1, &udu1),
            scalar_evidence("U_1 > U_g'(0)", &ep.u1, &ug1),
        ],
    ));

    // d/dY Z(Y, U₀ + U₁Y) at 0 has the sign of S'T − 2ST'.
    let g1 = ep.gamma.fadd(&q(1));
    let g1_inv = g1.finv().expect("gamma + 1 > 0");
    let s = ep.u0.fadd(&q(1));
    let sp = ep.u1.fsub(&q(2));
    let t = ep.u0.fmul(&g1_inv).fadd(&q(1));
    let tp = ep.u1.fmul(&g1_inv).fsub(&q(1));
    let dz = sp.fmul(&t).fsub(&s.fmul(&tp).fmul(&q(2)));
    out.push(certificate("dZ_dY", vec![scalar_evidence("-(S'T - 2 S T') > 0", &dz.fneg(), &QSqrt15::fzero())]));
    out
}

/// `C∞ = −(γ+1)³(V₃ − V₁² + V₁³)` from the small-`Z` expansion of the
/// far-field solution.
pub fn c_infinity(ep: &ExactParams) -> QSqrt15 {
    let d = ep.d as i64;
    let g1 = ep.gamma.fadd(&q(1));
    let g1_inv = g1.finv().expect("gamma + 1 > 0");
    let ell = QSqrt15::from_rat(ep.ell.clone());
    let v1 = q(d - 1).fmul(&g1_inv).fmul_rational(&rational(1, d));
    let v1sq = v1.fmul(&v1);
    let v1cu = v1sq.fmul(&v1);
    let inner = v1sq.fmul(&g1_inv).fmul(&q(-2)).fadd(&v1cu).fadd(&v1sq).fmul(&q(d - 1));
    let vm1 = v1.fsub(&q(1));
    let tail = v1.fmul(&v1.fmul(&q(2)).fadd(&ell.fmul(&vm1).fmul(&vm1)));
    let v3 = inner.fadd(&tail).fmul_rational(&rational(1, d + 2));
    g1.pow(3).fmul(&v3.fsub(&v1sq).fadd(&v1cu)).fneg()
}

/// Exact check that the pole residue of `B_l` lies below `C∞`.
pub fn certify_limit_lemma(fb: &FarBarriers, ep: &ExactParams) -> BarrierCertificate {
    let lhs = fb.lower_pole_residue();
    let cinf = c_infinity(ep);
    certificate("limit_residue", vec![scalar_evidence("C_inf > (e1 Y_O + e2 Y_O^2 - U_0)/d", &cinf, &lhs)])
}

/// Requires every certificate to pass.
pub fn require_all(certs: &[BarrierCertificate]) -> Result<()> {
    match certs.iter().find(|c| !c.passed) {
        None => Ok(()),
        Some(c) => Err(Error::CertificateFailed {
            condition: c.condition.clone(),
            detail: c.failure.clone().unwrap_or_default(),
        }),
    }
}

/// Far-field barriers in double precision at a working `γ` (for region
/// bookkeeping along numerical trajectories).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FarBarriersF64 {
    pub d: f64,
    pub u0: f64,
    pub u1: f64,
    pub e1: f64,
    pub e2: f64,
}

fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

fn padd(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    (0..a.len().max(b.len())).map(|i| a.get(i).copied().unwrap_or(0.0) + s * b.get(i).copied().unwrap_or(0.0)).collect()
}

impl FarBarriersF64 {
    /// Same construction as [`build_far_barriers`] at the parameters of `fp`.
    pub fn from_float(fp: &FloatParams) -> Self {
        let d = fp.d as f64;
        let u0 = fp.u0.to_f64();
        let u1 = fp.u1.to_f64();
        let f: Vec<f64> = fp.f.iter().map(Float::to_f64).collect();
        let h: Vec<f64> = fp.h.iter().map(Float::to_f64).collect();
        let e1 = d * u0 - u1;
        let dp = [-1.0, d];
        let coeff = |e2: f64| {
            let n = [-u0, e1, e2];
            let nd = [e1, 2.0 * e2];
            let t1 = padd(&pmul(&nd, &dp), &n, -d);
            let t2 = padd(&n, &pmul(&[-1.0, 1.0], &f), 1.0);
            let t3 = padd(&n, &pmul(&h, &dp), 1.0);
            let p = padd(&pmul(&t1, &t2), &pmul(&n, &t3), -2.0);
            (0..3).map(|i| p[i] * ((3 - i) as f64) * d.powi((2 - i) as i32)).sum::<f64>()
        };
        let (c0, c1) = (coeff(0.0), coeff(1.0));
        let e2 = (LOWER_BARRIER_CURVATURE as f64 / 2.0 - c0) / (c1 - c0);
        Self { d, u0, u1, e1, e2 }
    }

    pub fn from_exact(fb: &FarBarriers) -> Self {
        Self { d: fb.d as f64, u0: fb.u0.to_f64(), u1: fb.u1.to_f64(), e1: fb.e1.to_f64(), e2: fb.e2.to_f64() }
    }

    pub fn upper(&self, y: f64) -> f64 {
        self.u0 + self.u1 * y + 2.0 * y * y
    }

    pub fn lower(&self, y: f64) -> f64 {
        (self.e1 * y + self.e2 * y * y - self.u0) / (self.d * y - 1.0)
    }
}

/// Kinds of local barriers near the sonic point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalKind {
    /// `Σ_{i≤n} U_iYⁱ + βU_nY^{n+1}` for `κ < n` (residual expected `> 0`).
    NearUpper,
    /// The same polynomial for `κ > n` (residual expected `< 0`).
    NearLower,
    /// `Σ_{i≤n} U_iYⁱ` on `Y < 0`, `n` odd (residual expected `> 0`).
    GUpper,
}

/// A polynomial local barrier with MPFR coefficients.
#[derive(Clone, Debug)]
pub struct LocalBarrier {
    pub kind: LocalKind,
    pub n: usize,
    pub beta: f64,
    pub coefficients: Vec<Float>,
}

impl LocalBarrier {
    /// The `β`-corrected truncation; the kind follows from the side of `n`
    /// on which `κ` lies.
    pub fn near(series: &FloatSeries, n: usize, beta: f64, kappa: f64) -> Result<Self> {
        if n + 1 >= series.u.len() {
            return Err(Error::Config(format!("series of order {} too short for n = {n}", series.u.len() - 1)));
        }
        let mut c: Vec<Float> = series.u[..=n].to_vec();
        c.push(Float::with_val(series.prec, &series.u[n] * beta));
        let kind = if kappa < n as f64 { LocalKind::NearUpper } else { LocalKind::NearLower };
        Ok(Self { kind, n, beta, coefficients: c })
    }

    /// The plain truncation `𝐆_[n]`; `n` must be odd.
    pub fn g_upper(series: &FloatSeries, n: usize) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::Config(format!("n must be odd, got {n}")));
        }
        if n >= series.u.len() {
            return Err(Error::Config(format!("series too short for n = {n}")));
        }
        Ok(Self { kind: LocalKind::GUpper, n, beta: 0.0, coefficients: series.u[..=n].to_vec() })
    }

    /// Expected sign of the residual polynomial.
    pub fn expected(&self) -> Verdict {
        match self.kind {
            LocalKind::NearLower => Verdict::Negative,
            _ => Verdict::Positive,
        }
    }
}

fn horner(c: &[Float], y: &Float) -> Float {
    let mut s = Float::with_val(y.prec(), 0);
    for a in c.iter().rev() {
        s *= y;
        s += a;
    }
    s
}

/// `𝐏(Y) = B'(Y)Δ_Y(Y, B(Y)) − Δ_U(Y, B(Y))` at one point.
pub fn eval_barrier_poly(lb: &LocalBarrier, fp: &FloatParams, y: &Float) -> Float {
    let prec = fp.prec;
    let b = horner(&lb.coefficients, y);
    let deriv: Vec<Float> =
        lb.coefficients.iter().enumerate().skip(1).map(|(i, c)| Float::with_val(prec, c * i as u32)).collect();
    let bp = horner(&deriv, y);
    let f = horner(&fp.f, y);
    let h = horner(&fp.h, y);
    let dyv = Float::with_val(prec, y * fp.d) - 1u32;
    let delta_y = Float::with_val(prec, &dyv * &b) + Float::with_val(prec, y - 1u32) * &f;
    let delta_u = Float::with_val(prec, &b + &h) * &b * 2u32;
    bp * delta_y - delta_u
}

/// Coefficients of `𝐏` (for structural checks).
pub fn barrier_poly_coeffs(lb: &LocalBarrier, fp: &FloatParams) -> Vec<Float> {
    let prec = fp.prec;
    let mul = |a: &[Float], b: &[Float]| {
        let mut r = vec![Float::with_val(prec, 0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                r[i + j] += Float::with_val(prec, x * y);
            }
        }
        r
    };
    let add = |a: &[Float], b: &[Float], s: i32| {
        (0..a.len().max(b.len()))
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(|| Float::with_val(prec, 0));
                let y = b.get(i).cloned().unwrap_or_else(|| Float::with_val(prec, 0));
                x + y * s
            })
            .collect::<Vec<Float>>()
    };
    let b = &lb.coefficients;
    let bp: Vec<Float> = b.iter().enumerate().skip(1).map(|(i, c)| Float::with_val(prec, c * i as u32)).collect();
    let dyv = vec![Float::with_val(prec, -1), Float::with_val(prec, fp.d)];
    let ym1 = vec![Float::with_val(prec, -1), Float::with_val(prec, 1)];
    let delta_y = add(&mul(&dyv, b), &mul(&ym1, &fp.f), 1);
    let b_plus_h = add(b, &fp.h, 1);
    let delta_u = add(&mul(b, &b_plus_h), &[], 1).into_iter().map(|x| x * 2u32).collect::<Vec<_>>();
    add(&mul(&bp, &delta_y), &delta_u, -1)
}

/// Sampled sign data for a local barrier.
#[derive(Clone, Debug, Serialize)]
pub struct LocalEvidence {
    pub kind: LocalKind,
    pub n: usize,
    pub beta: f64,
    pub range: (f64, f64),
    pub expected: Verdict,
    /// Sampled verdict: the expected sign if every sample has it.
    pub verdict: Verdict,
    /// Minimum over samples of `s·𝐏(Y)/|Y|^{n+1}`, `s` the expected sign.
    pub min_scaled: f64,
    pub argmin: f64,
    pub samples: usize,
    /// Largest `|Y|` such that every sample between the sonic point and it
    /// carries the expected sign.
    pub validity_extent: f64,
    /// Largest `|P_k|/scale_k` over the dropped orders `k ≤ n`.
    pub dropped_residual: f64,
}

/// Default sampling range: `[−2/(C*κ), 0)` for `𝐆_[n]`, and
/// `(0, ½·min(|(n−κ)β|^{1/(n−2)}, |β|⁻¹)]` for the `β`-corrected barriers.
pub fn default_range(lb: &LocalBarrier, fp: &FloatParams, kappa: f64) -> (f64, f64) {
    match lb.kind {
        LocalKind::GUpper => (-2.0 / (fp.c_star.to_f64() * kappa), 0.0),
        _ => {
            let n = lb.n as f64;
            let b = lb.beta.abs();
            let a = (((n - kappa) * b).abs()).powf(1.0 / (n - 2.0));
            (0.0, 0.5 * a.min(1.0 / b))
        }
    }
}

/// Evaluates `𝐏(Y)/|Y|^{n+1}` on a uniform grid over `range` (excluding the
/// sonic point `Y = 0`), then refines around the minimum.
///
/// The coefficients of `𝐏` up to order `n` vanish identically by the series
/// recursion; in floating point they leave roundoff far above `|Y|^{n+1}`, so
/// they are dropped and only their relative size is reported.
pub fn eval_local_barrier_sign(lb: &LocalBarrier, fp: &FloatParams, range: (f64, f64)) -> LocalEvidence {
    let prec = fp.prec;
    let s = if lb.expected() == Verdict::Negative { -1.0 } else { 1.0 };
    let coeffs = barrier_poly_coeffs(lb, fp);
    let tail: Vec<Float> = coeffs[lb.n + 1..].to_vec();
    let dropped_residual = dropped_relative_residual(&coeffs[..=lb.n], &lb.coefficients, fp);
    let sign_y = if range.1 <= 0.0 { -1.0 } else { 1.0 };
    // P(Y)/|Y|^{n+1} = sgn(Y)^{n+1} Σ_k P_{n+1+k} Y^k.
    let parity = if (lb.n + 1) % 2 == 1 { sign_y } else { 1.0 };
    let scaled = |y: f64| -> f64 { horner(&tail, &Float::with_val(prec, y)).to_f64() * s * parity };
    let (lo, hi) = range;
    let negative_side = hi <= 0.0;
    let m = EVIDENCE_GRID;
    // Points ordered from the sonic point outwards.
    let pts: Vec<f64> = (0..m)
        .map(|k| {
            let t = (k + 1) as f64 / m as f64;
            if negative_side {
                hi - t * (hi - lo)
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect();
    let vals: Vec<f64> = pts.iter().map(|&y| scaled(y)).collect();
    let mut validity_extent = 0.0;
    for (y, v) in pts.iter().zip(&vals) {
        if *v > 0.0 {
            validity_extent = y.abs();
        } else {
            break;
        }
    }
    let (mut kmin, mut vmin) = (0, f64::INFINITY);
    for (k, v) in vals.iter().enumerate() {
        if *v < vmin {
            vmin = *v;
            kmin = k;
        }
    }
    let mut argmin = pts[kmin];
    let mut all_ok = vals.iter().all(|v| *v > 0.0);
    let mut width = (hi - lo) / m as f64;
    let mut samples = m;
    for _ in 0..EVIDENCE_REFINEMENTS {
        let (a, b) = ((argmin - width).max(lo.min(hi)), (argmin + width).min(lo.max(hi)));
        for k in 0..=64 {
            let y = a + (b - a) * k as f64 / 64.0;
            if y == 0.0 {
                continue;
            }
            let v = scaled(y);
            samples += 1;
            all_ok &= v > 0.0;
            if v < vmin {
                vmin = v;
                argmin = y;
            }
        }
        width /= 32.0;
    }
    LocalEvidence {
        kind: lb.kind,
        n: lb.n,
        beta: lb.beta,
        range,
        expected: lb.expected(),
        verdict: if all_ok { lb.expected() } else { Verdict::Indeterminate },
        min_scaled: vmin,
        argmin,
        samples,
        validity_extent,
        dropped_residual,
    }
}

/// `max_k |P_k| / (Σ_{i+j=k} |B_i||B_j| + 1)` over the dropped orders.
fn dropped_relative_residual(low: &[Float], b: &[Float], fp: &FloatParams) -> f64 {
    let prec = fp.prec;
    let mut worst = 0.0f64;
    for (k, pk) in low.iter().enumerate() {
        let mut scale = Float::with_val(prec, 1);
        for i in 0..=k {
            scale += Float::with_val(prec, b[i].abs_ref()) * Float::with_val(prec, b[k - i].abs_ref()) * (k + 1) as u32;
        }
        worst = worst.max((Float::with_val(prec, pk.abs_ref()) / scale).to_f64());
    }
    worst
}

/// Wraps sampled evidence as a (non-proof-grade) certificate.
pub fn local_certificate(condition: &str, ev: LocalEvidence) -> BarrierCertificate {
    let passed = ev.verdict == ev.expected;
    let failure = (!passed).then(|| format!("sampled sign failed near Y = {:e}", ev.argmin));
    BarrierCertificate {
        condition: condition.to_string(),
        passed,
        proof_grade: false,
        gamma_mode: "float".into(),
        evidence: vec![Evidence::Sampled(ev)],
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_limit;

    #[test]
    fn lower_barrier_slope_and_e1() {
        let ep = default_limit();
        let fb = build_far_barriers(&ep);
        assert_eq!(fb.e1, ep.u1.fneg());
        assert_eq!(fb.lower_slope_at_zero(), ep.u1);
        assert_eq!(fb.upper().coeff(0), ep.u0);
        assert_eq!(fb.lower_numerator().eval(&QSqrt15::fzero()).fneg(), ep.u0);
    }

    #[test]
    fn e2_solves_the_curvature_condition() {
        let ep = default_limit();
        let fb = build_far_barriers(&ep);
        let pl = lower_residual(&ep, &fb.lower_numerator(), &fb.lower_denominator());
        let c2 = second_coeff_over_d2(&pl, ep.d);
        assert_eq!(c2.fmul(&q(2)), q(-40));
        // The residual vanishes to second order at Y = 0.
        assert!(pl.coeff(0).fis_zero() && pl.coeff(1).fis_zero());
    }

    #[test]
    fn float_barriers_match_exact_at_limit() {
        let ep = default_limit();
        let fb = FarBarriersF64::from_exact(&build_far_barriers(&ep));
        let cfg = crate::params::Config::default();
        let g = crate::params::gamma_of_kappa(&Float::with_val(200, 1e15), &cfg, 200).unwrap();
        let fp = crate::params::derive_float(&cfg, &g, 200).unwrap();
        let ff = FarBarriersF64::from_float(&fp);
        assert!((ff.e2 - fb.e2).abs() < 1e-9 * fb.e2.abs());
        assert!((ff.lower(0.1) - fb.lower(0.1)).abs() < 1e-9);
    }

    fn working(kappa: f64) -> (FloatParams, FloatSeries) {
        let cfg = crate::params::Config::default();
        let g = crate::params::gamma_of_kappa(&Float::with_val(300, kappa), &cfg, 300).unwrap();
        let fp = crate::params::derive_float(&cfg, &g, 300).unwrap();
        let s = crate::series::compute_series_float(&fp, 70).unwrap();
        (fp, s)
    }

    fn rel(a: &Float, b: &Float) -> f64 {
        (Float::with_val(a.prec(), a - b) / b).to_f64().abs()
    }

    #[test]
    fn near_barrier_residual_starts_at_order_n_plus_one() {
        let (fp, s) = working(60.4);
        let n = 61;
        let beta = -8.0 * (n * n) as f64;
        let lb = LocalBarrier::near(&s, n, beta, 60.4).unwrap();
        let c = barrier_poly_coeffs(&lb, &fp);
        let lead = Float::with_val(fp.prec, &fp.lam_minus * (n + 1) as u32) - &fp.lam_plus;
        let want = lead * (Float::with_val(fp.prec, &s.u[n] * beta) - &s.u[n + 1]);
        assert!(rel(&c[n + 1], &want) < 1e-40);
        assert!(dropped_relative_residual(&c[..=n], &lb.coefficients, &fp) < 1e-60);
    }

    #[test]
    fn truncation_residual_high_orders_depend_only_on_its_square() {
        let (fp, s) = working(60.4);
        let n = 61;
        let lb = LocalBarrier::g_upper(&s, n).unwrap();
        let c = barrier_poly_coeffs(&lb, &fp);
        let g = &lb.coefficients;
        let sq = |m: usize| {
            let mut acc = Float::with_val(fp.prec, 0);
            for i in 0..=m {
                if i < g.len() && m - i < g.len() {
                    acc += Float::with_val(fp.prec, &g[i] * &g[m - i]);
                }
            }
            acc
        };
        let d = fp.d as f64;
        for m in n + 3..c.len() {
            let want = sq(m) * (d * m as f64 / 2.0 - 2.0) - sq(m + 1) * ((m + 1) as f64 / 2.0);
            assert!(rel(&c[m], &want) < 1e-40, "m = {m}");
        }
    }
}
