//! Phase-plane objects in double precision: the `(Z, V)` and `(Y, U)` vector
//! fields, the desingularised system, the coordinate maps between them, the
//! root curves of each field component, and region membership in
//! signed-margin form.

use serde::Serialize;

use crate::error::{Error, Result};

/// Double-precision parameter view.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseParams {
    pub d: f64,
    pub p: f64,
    pub ell: f64,
    pub gamma: f64,
    pub eps: f64,
    pub big_a: f64,
    pub big_b: f64,
}

impl PhaseParams {
    /// Parameters for explicit `(d, p, γ)`.
    pub fn new(d: u32, p: u32, gamma: f64) -> Self {
        let d = d as f64;
        let p = p as f64;
        let ell = 4.0 / (p - 1.0) + 1.0;
        Self {
            d,
            p,
            ell,
            gamma,
            eps: ell * gamma * gamma - 1.0,
            big_a: d + 1.0 - (d - 1.0 - 2.0 * ell) * gamma,
            big_b: 2.0 * d - 1.0 - ell,
        }
    }

    /// `f(Y) = −ε − AY + BY²`.
    pub fn f(&self, y: f64) -> f64 {
        -self.eps - self.big_a * y + self.big_b * y * y
    }

    /// `Y_O = 1/d`.
    pub fn y_o(&self) -> f64 {
        1.0 / self.d
    }
}

/// `(Δ_V, Δ_Z)` of `dV/dZ = Δ_V/Δ_Z`.
pub fn field_zv(pp: &PhaseParams, z: f64, v: f64) -> (f64, f64) {
    let one_v2 = 1.0 - v * v;
    let dv = (pp.d - 1.0) * one_v2 * (one_v2 * z / (pp.gamma + 1.0) - v * (1.0 - v * z));
    let dz = z * ((1.0 - z * v).powi(2) - pp.ell * (v - z).powi(2));
    (dv, dz)
}

/// `Δ_Z` from its factored form `Z(V² − ℓ)(Z − Z₊)(Z − Z₋)`.
pub fn delta_z_factored(pp: &PhaseParams, z: f64, v: f64) -> Result<f64> {
    Ok(z * (v * v - pp.ell) * (z - z_plus(pp, v)?) * (z - z_minus(pp, v)?))
}

/// `Δ_V` from its factored form `(d−1)/(γ+1)·(1−V²)(1+γV²)(Z − Z_V)`.
pub fn delta_v_factored(pp: &PhaseParams, z: f64, v: f64) -> f64 {
    (pp.d - 1.0) / (pp.gamma + 1.0) * (1.0 - v * v) * (1.0 + pp.gamma * v * v) * (z - z_v(pp, v))
}

/// `(Δ_U, Δ_Y)` of `dU/dY = Δ_U/Δ_Y`.
pub fn field_yu(pp: &PhaseParams, y: f64, u: f64) -> (f64, f64) {
    let f = pp.f(y);
    let du = 2.0 * u * (u + f + (pp.d - 1.0) * y * (1.0 - y));
    let dy = (pp.d * y - 1.0) * u + (y - 1.0) * f;
    (du, dy)
}

/// Desingularised field `(dY/dξ, dU/dξ) = (Δ_Y, Δ_U)`.
pub fn field_desingularized(pp: &PhaseParams, y: f64, u: f64) -> (f64, f64) {
    let (du, dy) = field_yu(pp, y, u);
    (dy, du)
}

/// `Δ_Z` expressed through `(Y, U)` (valid at `(Y, U) = (𝒴, 𝒰)(Z, V)`).
pub fn delta_z_via_yu(pp: &PhaseParams, z: f64, y: f64, u: f64) -> f64 {
    let s = u + (1.0 - y).powi(2);
    z * u * u * (s - pp.ell * (y + pp.gamma).powi(2)) / (s * (u + (1.0 + pp.gamma) * (1.0 - y)).powi(2))
}

/// `(Y, U) = (𝒴, 𝒰)(Z, V)`, defined on `R_ZV = {0 < V < 1, 0 < ZV < 1}`.
pub fn zv_to_yu(pp: &PhaseParams, z: f64, v: f64) -> Result<(f64, f64)> {
    if !(0.0 < v && v < 1.0 && 0.0 < z * v && z * v < 1.0) {
        return Err(Error::DomainError(format!("(Z, V) = ({z}, {v}) is outside R_ZV")));
    }
    Ok(zv_to_yu_unchecked(pp, z, v))
}

/// The map `(𝒴, 𝒰)` without the domain check (the formula itself is
/// defined whenever `Z ≠ 0` and `|V| ≠ 1`).
pub fn zv_to_yu_unchecked(pp: &PhaseParams, z: f64, v: f64) -> (f64, f64) {
    let g1 = pp.gamma + 1.0;
    let one_v2 = 1.0 - v * v;
    let y = (one_v2 * z - g1 * v * (1.0 - v * z)) / (z * one_v2);
    let u = g1 * g1 * (1.0 - v * z).powi(2) / (one_v2 * z * z);
    (y, u)
}

/// `(Z, V) = (𝒵, 𝒱)(Y, U)`, defined on `R_YU = {U > 0, Y < 1}`.
pub fn yu_to_zv(pp: &PhaseParams, y: f64, u: f64) -> Result<(f64, f64)> {
    if !(u > 0.0 && y < 1.0) {
        return Err(Error::DomainError(format!("(Y, U) = ({y}, {u}) is outside R_YU")));
    }
    let s = (u + (1.0 - y).powi(2)).sqrt();
    let z = s / (u / (1.0 + pp.gamma) + 1.0 - y);
    let v = (1.0 - y) / s;
    Ok((z, v))
}

/// Jacobian `[[∂_Y𝒵, ∂_U𝒵], [∂_Y𝒱, ∂_U𝒱]]` of `(𝒵, 𝒱)`.
pub fn jacobian_zv_of_yu(pp: &PhaseParams, y: f64, u: f64) -> [[f64; 2]; 2] {
    let s = u + (1.0 - y).powi(2);
    let rs = s.sqrt();
    let t = u / (1.0 + pp.gamma) + 1.0 - y;
    let zy = -(1.0 - y) / (rs * t) + rs / (t * t);
    let zu = 0.5 / (rs * t) - rs / ((1.0 + pp.gamma) * t * t);
    let s32 = s * rs;
    let vy = -u / s32;
    let vu = -(1.0 - y) / (2.0 * s32);
    [[zy, zu], [vy, vu]]
}

/// Jacobian `[[∂_Z𝒴, ∂_V𝒴], [∂_Z𝒰, ∂_V𝒰]]` of `(𝒴, 𝒰)`.
pub fn jacobian_yu_of_zv(pp: &PhaseParams, z: f64, v: f64) -> [[f64; 2]; 2] {
    let g1 = pp.gamma + 1.0;
    let one_v2 = 1.0 - v * v;
    let yz = g1 * v / (z * z * one_v2);
    let yv = -g1 * (1.0 + v * v - 2.0 * v * z) / (z * one_v2 * one_v2);
    let (_, u) = zv_to_yu_unchecked(pp, z, v);
    let uz = u * (-2.0 * v / (1.0 - v * z) - 2.0 / z);
    let uv = u * (-2.0 * z / (1.0 - v * z) + 2.0 * v / one_v2);
    [[yz, yv], [uz, uv]]
}

/// `U_{Δ_Y}(Y) = −(Y−1)f(Y)/(dY−1)`, the root of `Δ_Y`.
pub fn u_delta_y(pp: &PhaseParams, y: f64) -> Result<f64> {
    let den = pp.d * y - 1.0;
    if den == 0.0 {
        return Err(Error::PoleAtRoot(format!("U_DY at Y = {y}")));
    }
    Ok(-(y - 1.0) * pp.f(y) / den)
}

/// `U_{Δ_U}(Y) = −f(Y) − (d−1)Y(1−Y)`, the nonzero root of `Δ_U`.
pub fn u_delta_u(pp: &PhaseParams, y: f64) -> f64 {
    -pp.f(y) - (pp.d - 1.0) * y * (1.0 - y)
}

/// `U_g(Y) = ℓ(Y+γ)² − (1−Y)²`, where `Δ_Z` changes sign.
pub fn u_g(pp: &PhaseParams, y: f64) -> f64 {
    pp.ell * (y + pp.gamma).powi(2) - (1.0 - y).powi(2)
}

/// `Z_V(V) = (1+γ)V/(1+γV²)`, the root of `Δ_V`.
pub fn z_v(pp: &PhaseParams, v: f64) -> f64 {
    (1.0 + pp.gamma) * v / (1.0 + pp.gamma * v * v)
}

/// `Z₊(V) = (√ℓV + 1)/(V + √ℓ)`.
pub fn z_plus(pp: &PhaseParams, v: f64) -> Result<f64> {
    let s = pp.ell.sqrt();
    if v + s == 0.0 {
        return Err(Error::PoleAtRoot(format!("Z+ at V = {v}")));
    }
    Ok((s * v + 1.0) / (v + s))
}

/// `Z₋(V) = (−√ℓV + 1)/(V − √ℓ)`.
pub fn z_minus(pp: &PhaseParams, v: f64) -> Result<f64> {
    let s = pp.ell.sqrt();
    if v - s == 0.0 {
        return Err(Error::PoleAtRoot(format!("Z- at V = {v}")));
    }
    Ok((-s * v + 1.0) / (v - s))
}

/// Values of all root curves at a point, for reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RootCurves {
    pub u_delta_y: f64,
    pub u_delta_u: f64,
    pub u_g: f64,
}

pub fn root_curves(pp: &PhaseParams, y: f64) -> Result<RootCurves> {
    Ok(RootCurves { u_delta_y: u_delta_y(pp, y)?, u_delta_u: u_delta_u(pp, y), u_g: u_g(pp, y) })
}

/// Named phase-plane regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    OmegaBf,
    OmegaTri1,
    OmegaTri2,
    OmegaFar,
    Outside,
}

/// Signed margins of `Ω_B^f = {B_u(Y) < U < B_l(Y), 0 < Y < Y_O}`; the point
/// is inside iff all margins are positive.
pub fn margins_omega_bf(pp: &PhaseParams, y: f64, u: f64, bu: f64, bl: f64) -> [f64; 4] {
    [y, pp.y_o() - y, u - bu, bl - u]
}

/// Margins of `Ω_tri,1 = {−γ < Y < 0, 0 < U < min(U_g, U_{Δ_U}), U > U_{Δ_Y}}`
/// (the region where `Δ_Y < 0` and `Δ_U < 0`).
pub fn margins_tri1(pp: &PhaseParams, y: f64, u: f64) -> [f64; 6] {
    let udy = u_delta_y(pp, y).unwrap_or(f64::NAN);
    [y + pp.gamma, -y, u, u_g(pp, y) - u, u_delta_u(pp, y) - u, u - udy]
}

/// Margins of `Ω_tri,2 = {−γ < Y < 0, 0 < U < min(U_g, U_{Δ_Y})}`.
pub fn margins_tri2(pp: &PhaseParams, y: f64, u: f64) -> [f64; 5] {
    let udy = u_delta_y(pp, y).unwrap_or(f64::NAN);
    [y + pp.gamma, -y, u, u_g(pp, y) - u, udy - u]
}

/// Margins of `Ω_far = {|V| < 1, Z > Z₊(V), Z > Z_V(V), Z > V}`.
pub fn margins_far(pp: &PhaseParams, z: f64, v: f64) -> [f64; 5] {
    let zp = z_plus(pp, v).unwrap_or(f64::NAN);
    [v + 1.0, 1.0 - v, z - zp, z - z_v(pp, v), z - v]
}

fn all_positive(m: &[f64]) -> bool {
    m.iter().all(|x| *x > 0.0)
}

/// Classifies a `(Y, U)` point; `barriers` gives `(B_u(Y), B_l(Y))` when the
/// far-field barriers are available.
pub fn classify_yu(pp: &PhaseParams, y: f64, u: f64, barriers: Option<(f64, f64)>) -> RegionTag {
    if let Some((bu, bl)) = barriers {
        if all_positive(&margins_omega_bf(pp, y, u, bu, bl)) {
            return RegionTag::OmegaBf;
        }
    }
    if all_positive(&margins_tri1(pp, y, u)) {
        return RegionTag::OmegaTri1;
    }
    if all_positive(&margins_tri2(pp, y, u)) {
        return RegionTag::OmegaTri2;
    }
    if let Ok((z, v)) = yu_to_zv(pp, y, u) {
        if all_positive(&margins_far(pp, z, v)) {
            return RegionTag::OmegaFar;
        }
    }
    RegionTag::Outside
}

/// Classifies a `(Z, V)` point (only `Ω_far` is defined in these coordinates).
pub fn classify_zv(pp: &PhaseParams, z: f64, v: f64) -> RegionTag {
    if all_positive(&margins_far(pp, z, v)) {
        RegionTag::OmegaFar
    } else {
        RegionTag::Outside
    }
}

/// Relative disagreement between the `(Y, U)` slope `Δ_U/Δ_Y` and the slope
/// obtained by pushing `(Δ_Z, Δ_V)` through the Jacobian of `(𝒴, 𝒰)`.
pub fn slope_covariance_error(pp: &PhaseParams, y: f64, u: f64) -> Result<f64> {
    let (z, v) = yu_to_zv(pp, y, u)?;
    let (dv, dz) = field_zv(pp, z, v);
    let m = jacobian_yu_of_zv(pp, z, v);
    let num = m[1][0] * dz + m[1][1] * dv;
    let den = m[0][0] * dz + m[0][1] * dv;
    let (du, dy) = field_yu(pp, y, u);
    // Compare the cross product against the natural scale.
    let cross = num * dy - den * du;
    Ok(cross.abs() / ((num * dy).abs() + (den * du).abs()).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::sonic_point_zv;

    fn pp() -> PhaseParams {
        PhaseParams::new(4, 7, 0.792_395_847_702_350_7)
    }

    #[test]
    fn equilibria_of_zv_field() {
        let p = pp();
        let (z0, v0) = sonic_point_zv(p.ell, p.gamma);
        let (dv, dz) = field_zv(&p, z0, v0);
        assert!(dv.abs() < 1e-14 && dz.abs() < 1e-14);
        assert_eq!(field_zv(&p, 0.0, 0.0), (0.0, 0.0));
        let (dv, dz) = field_zv(&p, 1.0, 1.0);
        assert!(dv == 0.0 && dz == 0.0);
    }

    #[test]
    fn sonic_point_maps_to_q_s() {
        let p = pp();
        let (z0, v0) = sonic_point_zv(p.ell, p.gamma);
        let (y, u) = zv_to_yu(&p, z0, v0).unwrap();
        assert!(y.abs() < 1e-13);
        assert!((u - p.eps).abs() < 1e-13);
        let (du, dy) = field_yu(&p, 0.0, p.eps);
        assert!(du.abs() < 1e-15 && dy.abs() < 1e-15);
    }

    #[test]
    fn factored_forms_agree() {
        let p = pp();
        for &(z, v) in &[(0.3, 0.2), (1.5, -0.4), (2.0, 0.9), (0.7, 0.65)] {
            let (dv, dz) = field_zv(&p, z, v);
            assert!((delta_z_factored(&p, z, v).unwrap() - dz).abs() < 1e-12 * (1.0 + dz.abs()));
            assert!((delta_v_factored(&p, z, v) - dv).abs() < 1e-12 * (1.0 + dv.abs()));
        }
    }

    #[test]
    fn root_curve_values_at_zero() {
        let p = pp();
        assert!((u_g(&p, 0.0) - p.eps).abs() < 1e-15);
        assert!((u_delta_y(&p, 0.0).unwrap() - p.eps).abs() < 1e-15);
        assert!(u_delta_y(&p, 0.25).is_err());
    }

    #[test]
    fn root_curves_are_roots() {
        let p = pp();
        for &y in &[-0.5, -0.1, 0.05, 0.2] {
            let (_, dy) = field_yu(&p, y, u_delta_y(&p, y).unwrap());
            assert!(dy.abs() < 1e-13);
            let (du, _) = field_yu(&p, y, u_delta_u(&p, y));
            assert!(du.abs() < 1e-13);
        }
    }

    #[test]
    fn v_below_z_iff_y_above_minus_gamma() {
        let p = pp();
        for &(y, u) in &[(-0.9, 0.3), (-0.7, 0.3), (0.1, 0.5), (-0.2, 2.0)] {
            let (z, v) = yu_to_zv(&p, y, u).unwrap();
            assert_eq!(v < z, y > -p.gamma, "at ({y}, {u})");
        }
    }

    #[test]
    fn domain_errors() {
        let p = pp();
        assert!(yu_to_zv(&p, 0.5, -1.0).is_err());
        assert!(zv_to_yu(&p, 2.0, 0.9).is_err());
    }
}
