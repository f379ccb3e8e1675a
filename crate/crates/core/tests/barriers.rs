//! Far-field certificates at the limit exponent and sampled local-barrier
//! evidence at a working exponent.

use implode_core::barrier::*;
use implode_core::kernel::{rational, Field, QSqrt15, Verdict};
use implode_core::params::{default_limit, derive_float, gamma_of_kappa, Config};
use implode_core::series::{compute_exact_limit, compute_series_float};
use rug::Float;

#[test]
fn e2_matches_closed_form() {
    let fb = build_far_barriers(&default_limit());
    // Independent oracle obtained by symbolic elimination.
    let want = QSqrt15::new(rational(6913, 561), rational(337, 2805));
    assert_eq!(fb.e2, want);
}

#[test]
fn all_far_field_certificates_pass() {
    let ep = default_limit();
    let fb = build_far_barriers(&ep);
    let (s, _) = compute_exact_limit(&ep, 3).unwrap();
    let certs = certify_prop_bar_f(&fb, &ep, &s.u[2]);
    let names: Vec<_> = certs.iter().map(|c| c.condition.as_str()).collect();
    assert_eq!(names, ["valida", "validc", "validd", "ds_a", "ds_b", "root_ineq", "dZ_dY"]);
    for c in &certs {
        assert!(c.passed, "{}: {:?}", c.condition, c.failure);
        assert!(c.proof_grade);
    }
    require_all(&certs).unwrap();
    let json = serde_json::to_string(&certs).unwrap();
    assert!(json.contains("\"verdict\":\"Positive\""));
}

#[test]
fn pole_residue_lies_below_c_infinity() {
    let ep = default_limit();
    let fb = build_far_barriers(&ep);
    let lhs = fb.lower_pole_residue().to_f64();
    let cinf = c_infinity(&ep).to_f64();
    assert!((lhs + 0.128826).abs() < 1e-6, "{lhs}");
    assert!((cinf + 0.122652).abs() < 1e-6, "{cinf}");
    assert!(certify_limit_lemma(&fb, &ep).passed);
}

#[test]
fn broken_barrier_fails_with_a_localized_condition() {
    let ep = default_limit();
    let mut fb = build_far_barriers(&ep);
    fb.e2 = fb.e2.fadd(&QSqrt15::from_i64(-40));
    let (s, _) = compute_exact_limit(&ep, 3).unwrap();
    let certs = certify_prop_bar_f(&fb, &ep, &s.u[2]);
    let err = require_all(&certs).unwrap_err().to_string();
    assert!(err.contains("certificate failed"), "{err}");
}

fn working(kappa: f64, order: usize) -> (implode_core::params::FloatParams, implode_core::series::FloatSeries) {
    let cfg = Config::default();
    let g = gamma_of_kappa(&Float::with_val(400, kappa), &cfg, 400).unwrap();
    let fp = derive_float(&cfg, &g, 400).unwrap();
    let s = compute_series_float(&fp, order).unwrap();
    (fp, s)
}

#[test]
fn local_barriers_have_the_expected_sign() {
    for (kappa, n) in [(100.7, 101), (101.3, 101)] {
        let (fp, s) = working(kappa, 110);
        let lb = LocalBarrier::near(&s, n, DEFAULT_BETA_FACTOR * (n * n) as f64, kappa).unwrap();
        let ev = eval_local_barrier_sign(&lb, &fp, default_range(&lb, &fp, kappa));
        eprintln!("{ev:?}");
        assert_eq!(ev.verdict, lb.expected(), "{ev:?}");
    }
    let kappa = 101.45;
    let (fp, s) = working(kappa, 110);
    let lb = LocalBarrier::g_upper(&s, 101).unwrap();
    let ev = eval_local_barrier_sign(&lb, &fp, default_range(&lb, &fp, kappa));
    eprintln!("{ev:?}");
    assert_eq!(ev.verdict, Verdict::Positive, "{ev:?}");
    assert!(LocalBarrier::g_upper(&s, 100).is_err());
}
