//! Property-based checks of the kernel and the phase-plane maps.

use implode_core::kernel::{poly_sign_on, rational, ExactPoly, Field, Interval, QSqrt15, Rational, Verdict};
use implode_core::phase::{
    field_yu, jacobian_yu_of_zv, jacobian_zv_of_yu, slope_covariance_error, yu_to_zv, zv_to_yu, PhaseParams,
};
use num_rational::BigRational;
use proptest::prelude::*;

fn pp() -> PhaseParams {
    PhaseParams::new(4, 7, 0.7925)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn q(a: i64, b: i64, c: i64, e: i64) -> QSqrt15 {
    QSqrt15::new(rational(a, b.max(1)), rational(c, e.max(1)))
}

fn small_q() -> impl Strategy<Value = QSqrt15> {
    (-50i64..50, 1i64..20, -50i64..50, 1i64..20).prop_map(|(a, b, c, e)| q(a, b, c, e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn zv_yu_roundtrip(v in 0.001f64..0.999, w in 0.001f64..0.999) {
        // In double precision `Y` only carries `1 − Y` to relative accuracy
        // `ε/(1 − Y)`, which bounds the roundtrip error near `Y = 1`.
        let p = pp();
        let z = w / v;
        let (y, u) = zv_to_yu(&p, z, v).unwrap();
        let (z2, v2) = yu_to_zv(&p, y, u).unwrap();
        let bound = 1e-12 + 16.0 * f64::EPSILON / (1.0 - y);
        prop_assert!(rel(z2, z) < bound && rel(v2, v) < bound, "({z}, {v}) -> ({z2}, {v2})");
    }

    #[test]
    fn yu_zv_roundtrip(y in -3.0f64..0.999, u in 1e-3f64..20.0) {
        let p = pp();
        let (z, v) = yu_to_zv(&p, y, u).unwrap();
        prop_assume!(v > 0.0);
        let (y2, u2) = zv_to_yu(&p, z, v).unwrap();
        prop_assert!((y2 - y).abs() < 1e-11 * (1.0 + y.abs()) && rel(u2, u) < 1e-11);
    }

    #[test]
    fn jacobian_matches_finite_differences(y in -1.0f64..0.9, u in 0.05f64..5.0) {
        let p = pp();
        let j = jacobian_zv_of_yu(&p, y, u);
        let h = 1e-6;
        let fy = |dy: f64, du: f64| yu_to_zv(&p, y + dy, u + du).unwrap();
        let (zp, vp) = fy(h, 0.0);
        let (zm, vm) = fy(-h, 0.0);
        let (zq, vq) = fy(0.0, h);
        let (zn, vn) = fy(0.0, -h);
        let fd = [[(zp - zm) / (2.0 * h), (zq - zn) / (2.0 * h)], [(vp - vm) / (2.0 * h), (vq - vn) / (2.0 * h)]];
        for i in 0..2 {
            for k in 0..2 {
                prop_assert!((fd[i][k] - j[i][k]).abs() < 1e-6 * (1.0 + j[i][k].abs()), "entry {i}{k}: {} vs {}", fd[i][k], j[i][k]);
            }
        }
    }

    #[test]
    fn jacobians_are_mutually_inverse(y in -1.0f64..0.9, u in 0.05f64..5.0) {
        let p = pp();
        let (z, v) = yu_to_zv(&p, y, u).unwrap();
        prop_assume!(v > 0.0 && z * v < 1.0);
        let a = jacobian_zv_of_yu(&p, y, u);
        let b = jacobian_yu_of_zv(&p, z, v);
        for i in 0..2 {
            for k in 0..2 {
                let e: f64 = (0..2).map(|m| a[i][m] * b[m][k]).sum();
                let id = if i == k { 1.0 } else { 0.0 };
                let scale: f64 = (0..2).map(|m| (a[i][m] * b[m][k]).abs()).sum::<f64>().max(1.0);
                prop_assert!((e - id).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn fields_are_covariant_under_the_maps(y in -0.9f64..0.9, u in 0.05f64..5.0) {
        let p = pp();
        let (_, v) = yu_to_zv(&p, y, u).unwrap();
        prop_assume!(v > 0.0);
        let (du, dy) = field_yu(&p, y, u);
        prop_assume!(du.abs() + dy.abs() > 1e-6);
        prop_assert!(slope_covariance_error(&p, y, u).unwrap() < 1e-10);
    }

    #[test]
    fn qsqrt15_field_axioms(a in small_q(), b in small_q(), c in small_q()) {
        prop_assert_eq!(a.fmul(&b.fadd(&c)), a.fmul(&b).fadd(&a.fmul(&c)));
        prop_assert_eq!(a.fmul(&b).fmul(&c), a.fmul(&b.fmul(&c)));
        prop_assert_eq!(a.fadd(&b).fsub(&b), a.clone());
        if !a.fis_zero() {
            prop_assert_eq!(a.fmul(&a.finv().unwrap()), QSqrt15::fone());
        }
    }

    #[test]
    fn qsqrt15_sign_agrees_with_float(a in small_q(), b in small_q()) {
        let d = a.fsub(&b);
        let x = d.to_f64();
        if x.abs() > 1e-9 {
            prop_assert_eq!(d.sign() == std::cmp::Ordering::Greater, x > 0.0);
        }
        prop_assert_eq!(a.fcmp(&b), d.sign());
    }

    #[test]
    fn interval_ops_enclose_exact_results(
        a in -1e3f64..1e3, wa in 0.0f64..10.0, b in 0.5f64..1e3, wb in 0.0f64..10.0,
        s in 0.0f64..1.0, t in 0.0f64..1.0,
    ) {
        let x = Interval::new(a, a + wa);
        let y = Interval::new(b, b + wb);
        let xv = a + s * wa;
        let yv = b + t * wb;
        let exact = |v: f64| BigRational::from_float(v).unwrap();
        let inside = |i: Interval, r: BigRational| exact(i.lo) <= r && r <= exact(i.hi);
        prop_assert!(inside(x.add(&y), exact(xv) + exact(yv)));
        prop_assert!(inside(x.sub(&y), exact(xv) - exact(yv)));
        prop_assert!(inside(x.mul(&y), exact(xv) * exact(yv)));
        prop_assert!(inside(x.div(&y).unwrap(), exact(xv) / exact(yv)));
    }

    #[test]
    fn sign_certificates_are_sound(r in 0i64..40, c in 1i64..50, k in 1i64..6) {
        // (t − r/10)² + c/1000 > 0 everywhere; its negative is < 0.
        let root = rational(r, 10);
        let lin = ExactPoly::new(vec![-root.clone(), Rational::from_integer(1.into())]);
        let p = lin.mul(&lin).add(&ExactPoly::constant(rational(c, 1000)));
        let (lo, hi) = (rational(0, 1), rational(k, 1));
        prop_assert_eq!(poly_sign_on(&p, &lo, &hi, 40).verdict, Verdict::Positive);
        prop_assert_eq!(poly_sign_on(&p.neg(), &lo, &hi, 40).verdict, Verdict::Negative);
        // A polynomial with a root inside never certifies.
        let z = lin.mul(&ExactPoly::constant(rational(1, 1)));
        if 0 < r && r < 10 * k {
            prop_assert_eq!(poly_sign_on(&z, &lo, &hi, 40).verdict, Verdict::Indeterminate);
        }
    }
}

#[test]
fn extended_precision_roundtrip_on_ten_thousand_points() {
    use implode_core::params::{derive_float, Config};
    use implode_core::shooting::{yu_to_zv_mp, zv_to_yu_mp};
    use rand::{Rng, SeedableRng};
    use rug::Float;
    let fp = derive_float(&Config::default(), &Float::with_val(128, 0.7925), 128).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(implode_core::induction::cert_seed());
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let v: f64 = rng.random_range(0.001..0.999);
        let w: f64 = rng.random_range(0.001..0.999);
        let (z, v) = (Float::with_val(128, w / v), Float::with_val(128, v));
        let (y, u) = zv_to_yu_mp(&fp, &z, &v);
        let (z2, v2) = yu_to_zv_mp(&fp, &y, &u);
        let ez = (Float::with_val(128, &z2 - &z) / &z).to_f64().abs();
        let ev = (Float::with_val(128, &v2 - &v) / &v).to_f64().abs();
        worst = worst.max(ez).max(ev);
    }
    assert!(worst < 1e-12, "worst relative roundtrip error {worst:e}");
}
