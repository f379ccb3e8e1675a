//! The recursion in MPFR arithmetic, for `γ > ℓ^{-1/2}` where the
//! coefficients are no longer in `Q[√15]`.

use rug::Float;

use super::catalan_table;
use crate::error::{Error, Result};
use crate::params::FloatParams;

/// Relative size of `|nλ₋ − λ₊|/λ₊` below which an order is flagged as
/// near-resonant.
pub const RESONANCE_WARNING: f64 = 1e-6;

/// Float series coefficients with per-order conditioning data.
#[derive(Clone, Debug)]
pub struct FloatSeries {
    pub prec: u32,
    pub u: Vec<Float>,
    /// `|nλ₋ − λ₊|/λ₊` for each order (`∞` for orders 0 and 1).
    pub conditioning: Vec<f64>,
    /// Orders whose conditioning fell below [`RESONANCE_WARNING`].
    pub near_resonant: Vec<usize>,
    catalan: Vec<Float>,
}

impl FloatSeries {
    /// `Û_n = U_n/𝔠_n`.
    pub fn u_hat(&self, n: usize) -> Float {
        Float::with_val(self.prec, &self.u[n] / &self.catalan[n])
    }

    /// Evaluates the truncated series at `y` by Horner's rule.
    pub fn eval(&self, y: &Float) -> Float {
        let mut s = Float::with_val(self.prec, 0);
        for c in self.u.iter().rev() {
            s *= y;
            s += c;
        }
        s
    }
}

/// Runs the recursion to order `n_max` at the working precision of `fp`.
pub fn compute_series_float(fp: &FloatParams, n_max: usize) -> Result<FloatSeries> {
    let prec = fp.prec;
    let zero = Float::with_val(prec, 0);
    let d = fp.d;
    let dy_coeff = |u: &[Float], n: usize, with_un: bool| -> Float {
        let mut v = fp.g0.get(n).cloned().unwrap_or_else(|| zero.clone());
        if with_un {
            v -= &u[n];
        }
        if n >= 1 {
            v += Float::with_val(prec, &u[n - 1] * d);
        }
        v
    };
    let mut u = vec![fp.u0.clone(), fp.u1.clone()];
    let mut dy = vec![zero.clone(), dy_coeff(&u, 1, true)];
    let mut conditioning = vec![f64::INFINITY, f64::INFINITY];
    let mut near_resonant = vec![];
    let lp = fp.lam_plus.to_f64();
    for n in 2..=n_max {
        let a_nn = Float::with_val(prec, &fp.lam_minus * n as u32) - &fp.lam_plus;
        if a_nn.is_zero() {
            return Err(Error::ResonantOrder { n });
        }
        let cond = (a_nn.to_f64() / lp).abs();
        conditioning.push(cond);
        if cond < RESONANCE_WARNING {
            near_resonant.push(n);
        }
        let mut conv = zero.clone();
        for i in 1..n {
            conv += Float::with_val(prec, &u[i] * &u[n - i]);
        }
        let mut rhs = conv;
        rhs += Float::with_val(prec, &fp.h[1] * &u[n - 1]);
        rhs += Float::with_val(prec, &fp.h[2] * &u[n - 2]);
        rhs *= 2;
        let dy_n0 = dy_coeff(&u, n, false);
        for i in 2..=n {
            let k = n + 1 - i;
            let dyi = if i == n { &dy_n0 } else { &dy[i] };
            rhs -= Float::with_val(prec, &u[k] * dyi) * k as u32;
        }
        u.push(rhs / &a_nn);
        dy.push(dy_coeff(&u, n, true));
    }
    u.truncate(n_max + 1);
    let catalan = catalan_table(n_max)
        .into_iter()
        .map(|c| Float::with_val(prec, Float::parse(c.to_string()).expect("decimal integer")))
        .collect();
    Ok(FloatSeries { prec, u, conditioning: conditioning[..=n_max].to_vec(), near_resonant, catalan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_float, gamma_of_kappa, Config};

    #[test]
    fn near_limit_float_series_approaches_exact_values() {
        let cfg = Config::default();
        let g = gamma_of_kappa(&Float::with_val(256, 1e12), &cfg, 256).unwrap();
        let fp = derive_float(&cfg, &g, 256).unwrap();
        let s = compute_series_float(&fp, 5).unwrap();
        let want = [4.44126333590815, 14.617008492338861, 65.4754445603861, 351.6247365555407];
        for (n, w) in (2..=5).zip(want) {
            assert!((s.u[n].to_f64() / w - 1.0).abs() < 1e-8, "n = {n}");
        }
    }
}
