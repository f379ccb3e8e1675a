//! Exact evaluation of the recursion, generically over a [`Field`] and via a
//! denominator-free integer path for the limit parameters.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{delta_y_coeff, RecursionData, SeriesCoeffs};
use crate::error::{Error, Result};
use crate::kernel::{Field, QSqrt15, ZSqrt15};
use crate::params::ExactParams;

/// Which evaluation strategy produced an exact series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactPath {
    /// Integer arithmetic in `Z[√15]` after scaling `V_n = c·Sⁿ·U_n`.
    Scaled { c: u64, s: u64 },
    /// Reduced rationals throughout.
    Generic,
}

/// Runs the recursion to order `n_max` in an arbitrary field.
pub fn compute_series_generic<F: Field>(data: &RecursionData<F>, n_max: usize) -> Result<Vec<F>> {
    let mut u = vec![data.u0.clone(), data.u1.clone()];
    let mut dy = vec![F::fzero(), delta_y_coeff(data, &u, 1)];
    for n in 2..=n_max {
        let a_nn = data.lam_minus.fmul(&F::from_i64(n as i64)).fsub(&data.lam_plus);
        let inv = a_nn.finv().ok_or(Error::ResonantOrder { n })?;
        let mut rhs = F::fzero();
        for i in 1..n {
            rhs = rhs.fadd(&u[i].fmul(&u[n - i]));
        }
        rhs = rhs.fadd(&data.h[1].fmul(&u[n - 1])).fadd(&data.h[2].fmul(&u[n - 2]));
        rhs = rhs.fadd(&rhs);
        // Δ_{Y,n} with U_n still unknown (treated as zero).
        let dy_n0 = delta_y_coeff(data, &u, n);
        for i in 2..=n {
            let k = n + 1 - i;
            let dyi = if i == n { &dy_n0 } else { &dy[i] };
            rhs = rhs.fsub(&u[k].fmul(dyi).fmul(&F::from_i64(k as i64)));
        }
        u.push(rhs.fmul(&inv));
        dy.push(delta_y_coeff(data, &u, n));
    }
    u.truncate(n_max + 1);
    Ok(u)
}

/// Least common denominator of the rational parts of the given elements.
fn common_denominator(xs: &[&QSqrt15]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.a.denom()).lcm(x.b.denom()))
}

fn scaled(x: &QSqrt15, c: &BigInt) -> Option<ZSqrt15> {
    ZSqrt15::from_q(&x.fmul_rational(&crate::kernel::Rational::from_integer(c.clone())))
}

/// Integer recursion for `V_n = c·Sⁿ·U_n`; `None` when some quotient is not
/// integral for this `S`.
fn scaled_recursion(data: &RecursionData<QSqrt15>, c: &BigInt, s: &BigInt, n_max: usize) -> Option<Vec<ZSqrt15>> {
    let ch1 = scaled(&data.h[1], c)?;
    let ch2 = scaled(&data.h[2], c)?;
    let clp = scaled(&data.lam_plus, c)?;
    let clm = scaled(&data.lam_minus, c)?;
    let cg0: Vec<ZSqrt15> = data.g0.iter().map(|g| scaled(g, c)).collect::<Option<_>>()?;
    let s2 = s * s;
    let s3 = &s2 * s;
    let d = data.d as i64;

    let v0 = scaled(&data.u0, c)?;
    let v1 = scaled(&data.u1, c)?.scale(s);
    let mut v = vec![v0, v1];
    // g0 terms scaled by S^i.
    let mut cg0s = Vec::with_capacity(cg0.len());
    let mut pw = BigInt::one();
    for g in &cg0 {
        cg0s.push(g.scale(&pw));
        pw *= s;
    }
    // Wt_i = c·S^i·Δ_{Y,i} in terms of V.
    let wt = |v: &[ZSqrt15], i: usize, with_vi: bool| -> ZSqrt15 {
        let mut w = v[i - 1].scale(s).scale_i64(d);
        if with_vi {
            w -= &v[i];
        }
        if let Some(g) = cg0s.get(i) {
            w += g;
        }
        w
    };
    let mut wts = vec![ZSqrt15::zero(), wt(&v, 1, true)];
    for n in 2..=n_max {
        let mut conv = ZSqrt15::zero();
        for i in 1..n {
            conv += &(&v[i] * &v[n - i]);
        }
        let mut rhs = conv.scale(s).scale_i64(2);
        rhs += &(&ch1 * &v[n - 1]).scale(&s2).scale_i64(2);
        rhs += &(&ch2 * &v[n - 2]).scale(&s3).scale_i64(2);
        let wn0 = wt(&v, n, false);
        for i in 2..=n {
            let k = n + 1 - i;
            let w = if i == n { &wn0 } else { &wts[i] };
            rhs -= &(&v[k] * w).scale_i64(k as i64);
        }
        let q = (&clm.scale_i64(n as i64) - &clp).scale(s);
        if q.is_zero() {
            return None;
        }
        let vn = rhs.div_exact_by(&q)?;
        v.push(vn);
        let w = wt(&v, n, true);
        wts.push(w);
    }
    v.truncate(n_max + 1);
    Some(v)
}

/// Converts `V_n = c·Sⁿ·U_n` back to field elements.
fn unscale(v: &[ZSqrt15], c: &BigInt, s: &BigInt) -> Vec<QSqrt15> {
    let mut den = c.clone();
    v.iter()
        .map(|x| {
            let r = crate::kernel::Rational::new(BigInt::one(), den.clone());
            den *= s;
            x.to_q().fmul_rational(&r)
        })
        .collect()
}

/// Exact series at the limit parameters, to order `n_max`.
///
/// Tries the integer path with `S = |N(c·λ₊)|/gcd(|N(c·λ₊)|, c)` and then
/// `S = |N(c·λ₊)|`, falling back to reduced-rational arithmetic if neither
/// scaling keeps every quotient integral.
pub fn compute_exact_limit(ep: &ExactParams, n_max: usize) -> Result<(SeriesCoeffs<QSqrt15>, ExactPath)> {
    if n_max < 2 {
        // U₀ and U₁ come from the sonic-point data; truncate a short run.
        let (mut s, path) = compute_exact_limit(ep, 2)?;
        s.u.truncate(n_max + 1);
        s.u_hat.truncate(n_max + 1);
        s.catalan.truncate(n_max + 1);
        return Ok((s, path));
    }
    let data = RecursionData::from_exact(ep);
    let c = common_denominator(&[&data.u0, &data.u1, &data.lam_plus, &data.lam_minus, &data.h[1], &data.h[2], &data.g0[0], &data.g0[1], &data.g0[2], &data.g0[3]]);
    if let Some(clp) = scaled(&data.lam_plus, &c) {
        let norm = clp.norm().abs();
        let mut candidates = vec![];
        if !norm.is_zero() {
            candidates.push(&norm / norm.gcd(&c));
            candidates.push(norm.clone());
        }
        for s in candidates {
            if let Some(v) = scaled_recursion(&data, &c, &s, n_max) {
                let u = unscale(&v, &c, &s);
                let path = ExactPath::Scaled {
                    c: c.clone().try_into().unwrap_or(u64::MAX),
                    s: s.clone().try_into().unwrap_or(u64::MAX),
                };
                return Ok((SeriesCoeffs::from_coeffs(ep.gamma.clone(), u), path));
            }
        }
    }
    let u = compute_series_generic(&data, n_max)?;
    Ok((SeriesCoeffs::from_coeffs(ep.gamma.clone(), u), ExactPath::Generic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{rational, Rational};
    use crate::params::default_limit;
    use crate::series::recursion_residual;

    #[test]
    fn scaled_and_generic_paths_agree() {
        let ep = default_limit();
        let (fast, path) = compute_exact_limit(&ep, 40).unwrap();
        assert!(matches!(path, ExactPath::Scaled { .. }));
        let slow = compute_series_generic(&RecursionData::from_exact(&ep), 40).unwrap();
        assert_eq!(fast.u, slow);
    }

    #[test]
    fn residual_vanishes_exactly() {
        let ep = default_limit();
        let (s, _) = compute_exact_limit(&ep, 50).unwrap();
        let data = RecursionData::from_exact(&ep);
        for n in 2..=50 {
            assert!(recursion_residual(&data, &s.u, n).fis_zero(), "n = {n}");
        }
    }

    #[test]
    fn resonant_order_is_reported() {
        // λ₋ = 1, λ₊ = 3 resonates at n = 3.
        let one = Rational::from_integer(1.into());
        let data = RecursionData::<Rational> {
            d: 4,
            u0: rational(0, 1),
            u1: one.clone(),
            lam_plus: rational(3, 1),
            lam_minus: one.clone(),
            h: [rational(0, 1), one.clone(), one.clone()],
            g0: [rational(0, 1), one.clone(), one.clone(), one],
        };
        assert!(matches!(compute_series_generic(&data, 5), Err(Error::ResonantOrder { n: 3 })));
    }
}
