//! Scalar constants of the problem derived from `(d, p, γ)`.
//!
//! Two representations are provided:
//!
//! * [`ExactParams`] at the limit exponent `γ* = ℓ^{-1/2}`, with every
//!   constant an exact element of `Q[√15]` (or `Q` when possible), and
//!   `κ = ∞` carried as a tagged sentinel;
//! * [`FloatParams`] for `γ > γ*` in MPFR arithmetic at a caller-chosen
//!   precision (53 bits reproduces double precision).
//!
//! The polynomial `f(Y) = −ε − AY + BY²` and the derived coefficient lists
//! `h = f + (d−1)Y(1−Y)` and `G₀ = (Y−1)f` drive both the Taylor recursion and
//! the barrier polynomials.


use num_bigint::BigInt;
use num_traits::Zero;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{rational, Field, QSqrt15, Rational};

/// Relative error size of the ratio law.
pub const DELTA: f64 = 0.05;
/// Relative error size used by the induction.
pub const DELTA_HAT: f64 = 0.049;
/// Default lower end of the monotone `κ` range.
pub const DEFAULT_C_KAPPA: f64 = 50.0;
/// Width `c` of the `γ` window `(γ*, γ* + c)` on which `κ(γ)` is inverted.
pub const GAMMA_WINDOW: f64 = 0.05;

/// How the exponent `γ` is selected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// `γ = ℓ^{-1/2}` exactly (`κ = ∞`).
    ExactLimit,
    /// `γ = Γ(κ)` for a decimal target `κ`.
    KappaTarget(String),
    /// `γ = num/den`.
    Explicit { num: i64, den: i64 },
}

/// Problem configuration `(d, p, γ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub d: u32,
    pub p: u32,
    pub gamma: GammaMode,
    /// Floor `C_κ` of the monotone range of `κ(γ)`.
    pub c_kappa: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self { d: 4, p: 7, gamma: GammaMode::ExactLimit, c_kappa: DEFAULT_C_KAPPA }
    }
}

impl Config {
    pub fn new(d: u32, p: u32, gamma: GammaMode) -> Self {
        Self { d, p, gamma, c_kappa: DEFAULT_C_KAPPA }
    }

    /// `ℓ = 4/(p−1) + 1 = (p+3)/(p−1)`.
    pub fn ell(&self) -> Rational {
        rational(self.p as i64 + 3, self.p as i64 - 1)
    }

    /// Checks `d ≥ 4`, `p` odd, and `ℓ + ℓ^{1/2} < d − 1`.
    pub fn validate(&self) -> Result<()> {
        if self.d < 4 {
            return Err(Error::ConstraintViolation(format!("d = {} < 4", self.d)));
        }
        if self.p < 3 || self.p % 2 == 0 {
            return Err(Error::ConstraintViolation(format!("p = {} must be odd and >= 3", self.p)));
        }
        // ℓ + √ℓ < d − 1  ⇔  √ℓ < d − 1 − ℓ  ⇔  (d−1−ℓ > 0 and ℓ < (d−1−ℓ)²).
        let ell = self.ell();
        let gap = Rational::from_integer(BigInt::from(self.d as i64 - 1)) - &ell;
        if gap <= Rational::zero() || ell >= &gap * &gap {
            return Err(Error::ConstraintViolation(format!(
                "l + sqrt(l) < d - 1 fails for d = {}, p = {} (l = {})",
                self.d, self.p, ell
            )));
        }
        if !(self.c_kappa.is_finite() && self.c_kappa > 0.0) {
            return Err(Error::Config(format!("c_kappa must be positive, got {}", self.c_kappa)));
        }
        if let GammaMode::Explicit { den, .. } = self.gamma {
            if den <= 0 {
                return Err(Error::Config("gamma_den must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Eigenvalue ratio `κ = λ₊/λ₋`, with the limit `κ = ∞` as a sentinel.
#[derive(Clone, Debug, PartialEq)]
pub enum Kappa {
    Finite(Float),
    Infinite,
}

impl Kappa {
    pub fn to_f64(&self) -> f64 {
        match self {
            Kappa::Finite(k) => k.to_f64(),
            Kappa::Infinite => f64::INFINITY,
        }
    }
}

/// Coefficient lists of `f`, `h = f + (d−1)Y(1−Y)` and `G₀ = (Y−1)f`.
fn poly_lists<T: Clone>(
    d: i64,
    eps: &T,
    big_a: &T,
    big_b: &T,
    add: impl Fn(&T, &T) -> T,
    neg: impl Fn(&T) -> T,
    int: impl Fn(i64) -> T,
) -> ([T; 3], [T; 3], [T; 4]) {
    let f = [neg(eps), neg(big_a), big_b.clone()];
    let h = [neg(eps), add(&int(d - 1), &neg(big_a)), add(big_b, &int(1 - d))];
    // (Y − 1)(f0 + f1 Y + f2 Y²)
    let g0 = [neg(&f[0]), add(&f[0], &neg(&f[1])), add(&f[1], &neg(&f[2])), f[2].clone()];
    (f, h, g0)
}

/// Parameters at the limit exponent `γ* = ℓ^{-1/2}`, exactly.
#[derive(Clone, Debug)]
pub struct ExactParams {
    pub d: u32,
    pub p: u32,
    pub ell: Rational,
    pub gamma: QSqrt15,
    pub eps: QSqrt15,
    pub big_a: QSqrt15,
    pub big_b: QSqrt15,
    pub c1: QSqrt15,
    pub c2: QSqrt15,
    pub c3: QSqrt15,
    pub c4: QSqrt15,
    pub lam_plus: QSqrt15,
    pub lam_minus: QSqrt15,
    pub u0: QSqrt15,
    pub u1: QSqrt15,
    /// Second coefficient `U₂` of the sonic series.
    pub u2: QSqrt15,
    pub y_o: Rational,
    /// `C* = Δ_{Y,2}/λ₊` at the limit.
    pub c_star: QSqrt15,
    /// Blow-up exponent `b = (d−1)/(ℓ(γ+1)) − 1`.
    pub b_exponent: QSqrt15,
    /// Density exponent `a = 2(d−1)/((p−1)ℓ(γ+1))`.
    pub a_exponent: QSqrt15,
    pub f: [QSqrt15; 3],
    pub h: [QSqrt15; 3],
    pub g0: [QSqrt15; 4],
}

impl ExactParams {
    /// `κ` is infinite at the limit exponent.
    pub fn kappa(&self) -> Kappa {
        Kappa::Infinite
    }

    /// Residual of the eigen-relation `M_Q·(1, U₁) = λ₋·(1, U₁)`; exactly
    /// zero when the constants are consistent.
    pub fn eigen_residual(&self) -> (QSqrt15, QSqrt15) {
        eigen_residual_generic(&self.c1, &self.c2, &self.c3, &self.c4, &self.u1, &self.lam_minus)
    }
}

fn eigen_residual_generic<F: Field>(c1: &F, c2: &F, c3: &F, c4: &F, u1: &F, lam: &F) -> (F, F) {
    // M_Q = [[c1, c3], [c2, c4]] acting on (U, Y)-components ordered as
    // (∂_U, ∂_Y); the eigenvector in (Y, U) order (1, U₁) corresponds to
    // (U₁, 1) in this ordering.
    let r1 = c1.fmul(u1).fadd(c3).fsub(&lam.fmul(u1));
    let r2 = c2.fmul(u1).fadd(c4).fsub(lam);
    (r1, r2)
}

/// Derives the exact limit parameters for `cfg.d`, `cfg.p`.
///
/// Fails with [`Error::Config`] if `ℓ^{-1/2}` is not an element of `Q[√15]`.
pub fn derive_exact_limit(cfg: &Config) -> Result<ExactParams> {
    cfg.validate()?;
    let ell = cfg.ell();
    let inv_ell = ell.recip();
    let gamma = QSqrt15::sqrt_of_rational(&inv_ell).ok_or_else(|| {
        Error::Config(format!("l^(-1/2) = sqrt({inv_ell}) is not in Q[sqrt(15)]; exact mode unavailable"))
    })?;
    let q = |r: Rational| QSqrt15::from_rat(r);
    let int = |v: i64| QSqrt15::from_rat(rational(v, 1));
    let d = cfg.d as i64;
    let ellq = q(ell.clone());
    let eps = &(&ellq * &(&gamma * &gamma)) - &int(1);
    debug_assert!(eps.fis_zero());
    let big_a = &int(d + 1) - &(&(&int(d - 1) - &(&int(2) * &ellq)) * &gamma);
    let big_b = &int(2 * d - 1) - &ellq;
    let c1 = &int(2) * &eps;
    let c2 = int(-1);
    let c3 = &(&int(2) * &eps) * &(&int(d - 1) - &big_a);
    let c4 = &(&int(d - 1) * &eps) + &big_a;
    // ε = 0: the characteristic polynomial is λ² − Aλ, so λ₊ = A, λ₋ = 0.
    let lam_plus = big_a.clone();
    let lam_minus = QSqrt15::fzero();
    let u0 = eps.clone();
    let u1 = &c4 - &lam_minus; // U₁ = (λ₋ − c₄)/c₂ with c₂ = −1
    let (f, h, g0) = poly_lists(d, &eps, &big_a, &big_b, |x, y| x + y, |x| -x, int);
    // Order-2 recursion: (2λ₋ − λ₊)U₂ = 2U₁² + 2h₁U₁ + 2h₂U₀ − U₁·Δ_{Y,2}|_{U₂=0},
    // with Δ_{Y,2}|_{U₂=0} = dU₁ + G₀,₂.
    let dy2_0 = &(&int(d) * &u1) + &g0[2];
    let rhs = &(&(&int(2) * &(&u1 * &u1)) + &(&(&int(2) * &h[1]) * &u1)) + &(&(&int(2) * &h[2]) * &u0);
    let rhs = &rhs - &(&u1 * &dy2_0);
    let a22 = &(&int(2) * &lam_minus) - &lam_plus;
    let u2 = &rhs * &a22.inv().ok_or(Error::ResonantOrder { n: 2 })?;
    let dy2 = &dy2_0 - &u2;
    let c_star = &dy2 * &lam_plus.inv().ok_or(Error::DivisionByZero)?;
    let gp1 = &gamma + &int(1);
    let ell_gp1_inv = (&ellq * &gp1).inv().ok_or(Error::DivisionByZero)?;
    let b_exponent = &(&int(d - 1) * &ell_gp1_inv) - &int(1);
    let a_exponent = &q(rational(2 * (d - 1), cfg.p as i64 - 1)) * &ell_gp1_inv;
    Ok(ExactParams {
        d: cfg.d,
        p: cfg.p,
        ell,
        gamma,
        eps,
        big_a,
        big_b,
        c1,
        c2,
        c3,
        c4,
        lam_plus,
        lam_minus,
        u0,
        u1,
        u2,
        y_o: rational(1, d),
        c_star,
        b_exponent,
        a_exponent,
        f,
        h,
        g0,
    })
}

/// Parameters at `γ > γ*` in MPFR arithmetic.
#[derive(Clone, Debug)]
pub struct FloatParams {
    pub prec: u32,
    pub d: u32,
    pub p: u32,
    pub ell: Float,
    pub gamma: Float,
    pub eps: Float,
    pub big_a: Float,
    pub big_b: Float,
    pub c1: Float,
    pub c2: Float,
    pub c3: Float,
    pub c4: Float,
    pub lam_plus: Float,
    pub lam_minus: Float,
    pub kappa: Kappa,
    pub u0: Float,
    pub u1: Float,
    pub y_o: Float,
    /// Limit constant `C*` (independent of `γ`).
    pub c_star: Float,
    pub b_exponent: Float,
    pub a_exponent: Float,
    pub f: [Float; 3],
    pub h: [Float; 3],
    pub g0: [Float; 4],
}

/// Converts a `num-bigint` integer to a GMP integer.
pub fn bigint_to_gmp(x: &BigInt) -> rug::Integer {
    let (sign, digits) = x.to_u32_digits();
    let v = rug::Integer::from_digits(&digits, rug::integer::Order::Lsf);
    if sign == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// Exact field element converted to MPFR.
pub fn q_to_float(x: &QSqrt15, prec: u32) -> Float {
    let rat = |r: &Rational| {
        let n = Float::with_val(prec, bigint_to_gmp(r.numer()));
        let d = Float::with_val(prec, bigint_to_gmp(r.denom()));
        n / d
    };
    let s15 = Float::with_val(prec, 15).sqrt();
    rat(&x.a) + rat(&x.b) * s15
}

fn lambdas(cfg_d: u32, ell: &Float, g: &Float) -> (Float, Float, [Float; 6]) {
    let prec = g.prec();
    let d = cfg_d as i32;
    let eps = Float::with_val(prec, ell * g) * g - 1u32;
    let big_a = Float::with_val(prec, d + 1) - (Float::with_val(prec, d - 1) - Float::with_val(prec, ell * 2u32)) * g;
    let c1 = Float::with_val(prec, &eps * 2u32);
    let c2 = Float::with_val(prec, -1);
    let c3 = Float::with_val(prec, &eps * 2u32) * (Float::with_val(prec, d - 1) - &big_a);
    let c4 = Float::with_val(prec, &eps * (d - 1)) + &big_a;
    let s = Float::with_val(prec, &c1 + &c4);
    let disc = (Float::with_val(prec, &c1 - &c4).square() + Float::with_val(prec, &c2 * &c3) * 4u32).sqrt();
    let lp = Float::with_val(prec, &s + &disc) / 2u32;
    // λ₋ via Vieta avoids cancellation when λ₋ ≪ λ₊.
    let prod = Float::with_val(prec, &c1 * &c4) - Float::with_val(prec, &c2 * &c3);
    let lm = prod / &lp;
    (lp, lm, [eps, big_a, c1, c2, c3, c4])
}

/// `κ(γ) = λ₊/λ₋` in MPFR.
pub fn kappa_of_gamma(d: u32, ell: &Float, g: &Float) -> Float {
    let (lp, lm, _) = lambdas(d, ell, g);
    lp / lm
}

fn ell_float(cfg: &Config, prec: u32) -> Float {
    Float::with_val(prec, cfg.p + 3) / (cfg.p - 1)
}

/// `γ* = ℓ^{-1/2}` in MPFR.
pub fn gamma_star(cfg: &Config, prec: u32) -> Float {
    ell_float(cfg, prec).sqrt().recip()
}

/// Derives the MPFR parameters at `γ` (which must exceed `γ*`).
pub fn derive_float(cfg: &Config, gamma: &Float, prec: u32) -> Result<FloatParams> {
    cfg.validate()?;
    let g = Float::with_val(prec, gamma);
    let ell = ell_float(cfg, prec);
    let (lam_plus, lam_minus, [eps, big_a, c1, c2, c3, c4]) = lambdas(cfg.d, &ell, &g);
    if eps <= 0 {
        return Err(Error::ConstraintViolation(format!(
            "gamma = {} must exceed l^(-1/2) in float mode",
            g.to_f64()
        )));
    }
    let d = cfg.d as i64;
    let big_b = Float::with_val(prec, 2 * d - 1) - &ell;
    let kappa = Kappa::Finite(Float::with_val(prec, &lam_plus / &lam_minus));
    let u0 = eps.clone();
    // U₁ = (λ₋ − c₄)/c₂ = c₄ − λ₋.
    let u1 = Float::with_val(prec, &c4 - &lam_minus);
    let (f, h, g0) = poly_lists(
        d,
        &eps,
        &big_a,
        &big_b,
        |x, y| Float::with_val(prec, x + y),
        |x| Float::with_val(prec, -x),
        |v| Float::with_val(prec, v),
    );
    let limit = derive_exact_limit(&Config { gamma: GammaMode::ExactLimit, ..cfg.clone() });
    let c_star = match limit {
        Ok(l) => q_to_float(&l.c_star, prec),
        Err(_) => Float::with_val(prec, f64::NAN),
    };
    let ell_gp1 = Float::with_val(prec, &ell * (Float::with_val(prec, &g + 1u32)));
    let b_exponent = Float::with_val(prec, d - 1) / &ell_gp1 - 1u32;
    let a_exponent = Float::with_val(prec, 2 * (d - 1)) / (cfg.p - 1) / &ell_gp1;
    Ok(FloatParams {
        prec,
        d: cfg.d,
        p: cfg.p,
        ell,
        gamma: g,
        eps,
        big_a,
        big_b,
        c1,
        c2,
        c3,
        c4,
        lam_plus,
        lam_minus,
        kappa,
        u0,
        u1,
        y_o: Float::with_val(prec, 1) / cfg.d,
        c_star,
        b_exponent,
        a_exponent,
        f,
        h,
        g0,
    })
}

impl FloatParams {
    /// Residuals of the eigen-relation and of the Vieta identities.
    pub fn invariant_residuals(&self) -> [f64; 4] {
        let prec = self.prec;
        let r1 = Float::with_val(prec, &self.c1 * &self.u1) + &self.c3 - Float::with_val(prec, &self.lam_minus * &self.u1);
        let r2 = Float::with_val(prec, &self.c2 * &self.u1) + &self.c4 - &self.lam_minus;
        let sum = Float::with_val(prec, &self.lam_plus + &self.lam_minus) - &self.c1 - &self.c4;
        let prod = Float::with_val(prec, &self.lam_plus * &self.lam_minus)
            - (Float::with_val(prec, &self.c1 * &self.c4) - Float::with_val(prec, &self.c2 * &self.c3));
        [r1.to_f64(), r2.to_f64(), sum.to_f64(), prod.to_f64()]
    }

    /// `(κ+1)²/κ` computed from `κ`, and from the closed form in `γ`.
    pub fn kappa_identity(&self) -> (f64, f64) {
        let prec = self.prec;
        let Kappa::Finite(k) = &self.kappa else { return (f64::INFINITY, f64::INFINITY) };
        let lhs = Float::with_val(prec, k + 1u32).square() / k;
        let d = self.d as i32;
        let num = (Float::with_val(prec, &self.ell * &self.gamma) * (d + 1)
            - (Float::with_val(prec, d - 1) - Float::with_val(prec, &self.ell * 2u32)))
        .square();
        let den = Float::with_val(prec, &self.ell * (2 * (d - 1))) * &self.eps;
        (lhs.to_f64(), (num / den).to_f64())
    }

    /// Double-precision view used by the phase-plane routines.
    pub fn phase(&self) -> crate::phase::PhaseParams {
        crate::phase::PhaseParams {
            d: self.d as f64,
            p: self.p as f64,
            ell: self.ell.to_f64(),
            gamma: self.gamma.to_f64(),
            eps: self.eps.to_f64(),
            big_a: self.big_a.to_f64(),
            big_b: self.big_b.to_f64(),
        }
    }
}

/// Inverts `κ(γ)` on `(γ*, γ* + c)` by bisection at `prec` bits.
///
/// The result satisfies `|κ(γ) − κ_target| < 10⁻¹²·κ_target` (much better in
/// practice: bisection runs to the working precision).
pub fn gamma_of_kappa(kappa_target: &Float, cfg: &Config, prec: u32) -> Result<Float> {
    cfg.validate()?;
    let target = Float::with_val(prec, kappa_target);
    let oor = |reason: String| Error::OutOfMonotoneRange { target: format!("{:.20}", target), reason };
    if !target.is_finite() || target <= cfg.c_kappa {
        return Err(oor(format!("target must exceed C_kappa = {}", cfg.c_kappa)));
    }
    let ell = ell_float(cfg, prec);
    let gs = gamma_star(cfg, prec);
    let mut lo = Float::with_val(prec, &gs * (Float::with_val(prec, 1) + Float::with_val(prec, Float::i_exp(1, -(prec as i32 - 24)))));
    let mut hi = Float::with_val(prec, &gs + GAMMA_WINDOW);
    let k_lo = kappa_of_gamma(cfg.d, &ell, &lo);
    let k_hi = kappa_of_gamma(cfg.d, &ell, &hi);
    if !(k_hi < target && target < k_lo) {
        return Err(oor(format!(
            "bracket kappa(gamma*+) = {:.3e}, kappa(gamma*+{GAMMA_WINDOW}) = {:.3e} does not straddle the target",
            k_lo.to_f64(),
            k_hi.to_f64()
        )));
    }
    for _ in 0..(prec + 8) {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        if kappa_of_gamma(cfg.d, &ell, &mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = Float::with_val(prec, &lo + &hi) / 2u32;
    let k = kappa_of_gamma(cfg.d, &ell, &g);
    let rel = (Float::with_val(prec, &k - &target) / &target).abs();
    if rel.to_f64() >= 1e-12 {
        return Err(oor(format!("bisection stalled with relative error {:.3e}", rel.to_f64())));
    }
    Ok(g)
}

/// Resolves a configuration to MPFR parameters (`kappa_target` or
/// `explicit` modes).
pub fn resolve_float(cfg: &Config, prec: u32) -> Result<FloatParams> {
    let gamma = match &cfg.gamma {
        GammaMode::ExactLimit => {
            return Err(Error::Config("exact_limit has no finite-kappa float parameters".into()))
        }
        GammaMode::KappaTarget(s) => {
            let k = Float::parse(s).map_err(|e| Error::Config(format!("kappa `{s}`: {e}")))?;
            gamma_of_kappa(&Float::with_val(prec, k), cfg, prec)?
        }
        GammaMode::Explicit { num, den } => Float::with_val(prec, *num) / *den as i32,
    };
    derive_float(cfg, &gamma, prec)
}

/// Sonic point `(Z₀, V₀) = ((γ+1)√ℓ/(ℓγ+1), 1/(γ√ℓ))`.
pub fn sonic_point_zv(ell: f64, gamma: f64) -> (f64, f64) {
    let s = ell.sqrt();
    ((gamma + 1.0) * s / (ell * gamma + 1.0), 1.0 / (gamma * s))
}


/// Convenience constructor for the limit configuration `d = 4, p = 7`.
pub fn default_limit() -> ExactParams {
    derive_exact_limit(&Config::default()).expect("default configuration is valid")
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::qsqrt15::QSqrt15;

    #[test]
    fn ell_for_d4_p7() {
        assert_eq!(Config::default().ell(), rational(5, 3));
    }

    #[test]
    fn limit_values() {
        let p = default_limit();
        assert!(p.eps.fis_zero());
        assert!(p.c1.fis_zero() && p.c3.fis_zero());
        assert_eq!(p.c2, QSqrt15::from_rat(rational(-1, 1)));
        // A = 5 + γ/3 with γ = √15/5.
        let a = QSqrt15::new(rational(5, 1), rational(1, 15));
        assert_eq!(p.big_a, a);
        assert_eq!(p.lam_plus, a);
        assert!(p.lam_minus.fis_zero());
        assert_eq!(p.u1, a);
        assert_eq!(p.big_b, QSqrt15::from_rat(rational(16, 3)));
        let (r1, r2) = p.eigen_residual();
        assert!(r1.fis_zero() && r2.fis_zero());
        assert!(matches!(p.kappa(), Kappa::Infinite));
    }

    #[test]
    fn c_star_value() {
        let p = default_limit();
        // Δ_{Y,2} = 6 at the limit, hence C* = 6/A.
        let expect = &QSqrt15::from_rat(rational(6, 1)) * &p.big_a.inv().unwrap();
        assert_eq!(p.c_star, expect);
        assert!((p.c_star.to_f64() - 1.141_075_13).abs() < 1e-8);
    }

    #[test]
    fn constraint_violations() {
        assert!(Config::new(3, 7, GammaMode::ExactLimit).validate().is_err());
        assert!(Config::new(4, 6, GammaMode::ExactLimit).validate().is_err());
        // d = 4, p = 5: ℓ = 2, 2 + √2 > 3.
        assert!(Config::new(4, 5, GammaMode::ExactLimit).validate().is_err());
        assert!(Config::new(4, 7, GammaMode::ExactLimit).validate().is_ok());
    }

    #[test]
    fn exact_mode_requires_field_membership() {
        // p = 9: ℓ = 3/2, ℓ^{-1/2} = √(2/3) ∉ Q[√15].
        let r = derive_exact_limit(&Config::new(5, 9, GammaMode::ExactLimit));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn kappa_round_trip_and_identities() {
        let cfg = Config::new(4, 7, GammaMode::KappaTarget("101.5".into()));
        let fp = resolve_float(&cfg, 200).unwrap();
        let k = fp.kappa.to_f64();
        assert!((k - 101.5).abs() < 1e-10);
        assert!((fp.gamma.to_f64() - 0.792_395_847_702_350_7).abs() < 1e-15);
        assert!((fp.eps.to_f64() - 0.046_485_299_093_211_49).abs() < 1e-15);
        for r in fp.invariant_residuals() {
            assert!(r.abs() < 1e-40, "residual {r}");
        }
        let (a, b) = fp.kappa_identity();
        assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn out_of_monotone_range() {
        let cfg = Config::default();
        let r = gamma_of_kappa(&Float::with_val(100, 20), &cfg, 100);
        assert!(matches!(r, Err(Error::OutOfMonotoneRange { .. })));
    }

    #[test]
    fn sonic_point_at_gamma_one() {
        let (z0, v0) = sonic_point_zv(5.0 / 3.0, 1.0);
        assert!((z0 - 2.0 * (5.0f64 / 3.0).sqrt() / (8.0 / 3.0)).abs() < 1e-15);
        assert!((v0 - (3.0f64 / 5.0).sqrt()).abs() < 1e-15);
    }
}
