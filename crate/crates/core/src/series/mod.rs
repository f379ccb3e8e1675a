//! Sonic-point power series `U(Y) = Σ U_n Yⁿ` of the `(Y, U)` trajectory.
//!
//! Coefficients follow from matching powers of `Y` in
//! `Δ_Y(Y, U(Y))·U'(Y) = Δ_U(Y, U(Y))`. Since `Δ_U` is quadratic and `Δ_Y`
//! linear in `U`, order `n` involves `U_n` only through the scalar
//! `nλ₋ − λ₊`, which gives an explicit recursion. It runs either exactly in a
//! [`Field`] (the limit `γ = ℓ^{-1/2}` lives in `Q[√15]`) or in MPFR
//! arithmetic for the shooting parameters.

mod exact;
mod float;

use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::Result;
use crate::kernel::{Field, QSqrt15, Rational};
use crate::params::ExactParams;

pub use exact::{compute_exact_limit, compute_series_generic, ExactPath};
pub use float::{compute_series_float, FloatSeries};

/// Catalan numbers `𝔠_0..𝔠_n`, built from `𝔠_{k+1} = 𝔠_k(4k+2)/(k+2)`.
pub fn catalan_table(n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = BigInt::one();
    for k in 0..=n {
        out.push(c.clone());
        c = c * BigInt::from(4 * k + 2) / BigInt::from(k + 2);
    }
    out
}

/// The `n`-th Catalan number.
pub fn catalan(n: usize) -> BigInt {
    catalan_table(n).pop().expect("table is non-empty")
}

/// Coefficient data entering the recursion, in any field.
#[derive(Clone, Debug)]
pub struct RecursionData<F> {
    pub d: u32,
    pub u0: F,
    pub u1: F,
    pub lam_plus: F,
    pub lam_minus: F,
    /// `h(Y) = f(Y) + (d−1)Y(1−Y)`, so that `Δ_U = 2U(U + h)`.
    pub h: [F; 3],
    /// `(Y − 1)f(Y)`, the `U`-free part of `Δ_Y`.
    pub g0: [F; 4],
}

impl RecursionData<QSqrt15> {
    pub fn from_exact(ep: &ExactParams) -> Self {
        Self {
            d: ep.d,
            u0: ep.u0.clone(),
            u1: ep.u1.clone(),
            lam_plus: ep.lam_plus.clone(),
            lam_minus: ep.lam_minus.clone(),
            h: ep.h.clone(),
            g0: ep.g0.clone(),
        }
    }
}

/// `Δ_{Y,n}` from the coefficient list `u` (entries beyond its end read as 0).
pub fn delta_y_coeff<F: Field>(data: &RecursionData<F>, u: &[F], n: usize) -> F {
    let mut v = data.g0.get(n).cloned().unwrap_or_else(F::fzero);
    if let Some(un) = u.get(n) {
        v = v.fsub(un);
    }
    if n >= 1 {
        if let Some(um) = u.get(n - 1) {
            v = v.fadd(&um.fmul(&F::from_i64(data.d as i64)));
        }
    }
    v
}

/// `Δ_{U,n}` from the coefficient list `u` (entries beyond its end read as 0).
pub fn delta_u_coeff<F: Field>(data: &RecursionData<F>, u: &[F], n: usize) -> F {
    let get = |i: usize| u.get(i).cloned().unwrap_or_else(F::fzero);
    let mut s = F::fzero();
    for i in 0..=n {
        s = s.fadd(&get(i).fmul(&get(n - i)));
    }
    for j in 0..=n.min(2) {
        s = s.fadd(&data.h[j].fmul(&get(n - j)));
    }
    s.fadd(&s)
}

/// Order-`n` residual `Σ_{1≤i≤n} Δ_{Y,i}(n−i+1)U_{n−i+1} − Δ_{U,n}` of the
/// matched ODE; exactly zero for a correct coefficient list.
pub fn recursion_residual<F: Field>(data: &RecursionData<F>, u: &[F], n: usize) -> F {
    let get = |i: usize| u.get(i).cloned().unwrap_or_else(F::fzero);
    let mut s = F::fzero();
    for i in 1..=n {
        let k = n - i + 1;
        s = s.fadd(&delta_y_coeff(data, u, i).fmul(&get(k)).fmul(&F::from_i64(k as i64)));
    }
    s.fsub(&delta_u_coeff(data, u, n))
}

/// Exact series coefficients with their Catalan renormalisation.
#[derive(Clone, Debug)]
pub struct SeriesCoeffs<F> {
    pub gamma: F,
    pub u: Vec<F>,
    pub u_hat: Vec<F>,
    pub catalan: Vec<BigInt>,
}

impl<F: Field> SeriesCoeffs<F> {
    pub fn from_coeffs(gamma: F, u: Vec<F>) -> Self {
        let catalan = catalan_table(u.len().saturating_sub(1));
        let u_hat = u
            .iter()
            .zip(&catalan)
            .map(|(x, c)| x.fmul_rational(&Rational::new(BigInt::one(), c.clone())))
            .collect();
        Self { gamma, u, u_hat, catalan }
    }

    /// Highest computed order.
    pub fn order(&self) -> usize {
        self.u.len() - 1
    }
}

/// Writes `n, U_n, Û_n, 𝔠_n` rows: `U_n` as an exact string, `Û_n` as a
/// decimal with `digits` significant digits.
pub fn write_csv_exact<W: Write>(s: &SeriesCoeffs<QSqrt15>, digits: usize, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "U_n", "U_hat_n", "catalan_n"]).map_err(csv_err)?;
    for (n, ((u, uh), c)) in s.u.iter().zip(&s.u_hat).zip(&s.catalan).enumerate() {
        wr.write_record([
            n.to_string(),
            u.exact_string(),
            crate::kernel::decimal::to_sig_digits(uh, digits),
            c.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes float coefficients with an extra conditioning column
/// `|nλ₋ − λ₊|/λ₊`.
pub fn write_csv_float<W: Write>(s: &FloatSeries, digits: usize, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "U_n", "U_hat_n", "catalan_n", "conditioning"]).map_err(csv_err)?;
    let cat = catalan_table(s.u.len().saturating_sub(1));
    for (n, (u, c)) in s.u.iter().zip(&cat).enumerate() {
        let uh = s.u_hat(n);
        wr.write_record([
            n.to_string(),
            format!("{:.*e}", digits.saturating_sub(1), u),
            format!("{:.*e}", digits.saturating_sub(1), uh),
            c.to_string(),
            format!("{:e}", s.conditioning[n]),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_csv_exact_file(s: &SeriesCoeffs<QSqrt15>, digits: usize, path: &Path) -> Result<()> {
    write_csv_exact(s, digits, std::fs::File::create(path)?)
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_catalan_numbers() {
        let c: Vec<i64> = catalan_table(4).iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14]);
        assert_eq!(catalan(10), BigInt::from(16796));
    }

    #[test]
    fn catalan_convolution_and_growth() {
        let c = catalan_table(201);
        for n in 0..200 {
            let conv: BigInt = (0..=n).map(|i| &c[i] * &c[n - i]).sum();
            assert_eq!(conv, c[n + 1], "n = {n}");
        }
        for n in 4..=100 {
            assert!(BigInt::from(3) * &c[n] <= c[n + 1] && c[n + 1] < BigInt::from(4) * &c[n]);
        }
    }
}
