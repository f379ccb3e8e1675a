//! Induction clauses at the limit parameters, with frozen constant values
//! from an independent rational-arithmetic evaluation, and mutation checks.

use std::time::Instant;

use implode_core::induction::{
    check_base_case, check_closing_inequalities, check_growth_conditions, claim_i_lhs, compute_constants, verify_all,
    InductionParams,
};
use implode_core::kernel::{Field, QSqrt15};
use implode_core::params::default_limit;
use implode_core::series::compute_exact_limit;

fn close(x: &QSqrt15, want: f64, rel: f64) -> bool {
    (x.to_f64() / want - 1.0).abs() < rel
}

#[test]
fn all_clauses_pass_at_the_limit() {
    let ep = default_limit();
    let ip = InductionParams::default();
    assert!(ip.is_consistent());
    let (series, _) = compute_exact_limit(&ep, 451).unwrap();
    let t = Instant::now();
    let out = verify_all(&series, &ep, &ip, 4);
    eprintln!("induction verified in {:?} (base {:.2}s, growth {:.2}s, closing {:.2}s)", t.elapsed(), out.base_case.wall_time_s, out.growth.wall_time_s, out.closing.report.wall_time_s);
    for c in out.base_case.checks.iter().chain(&out.growth.checks).chain(&out.closing.report.checks) {
        eprintln!("{} {} margin={:.4e} tightest={:?}", c.name, c.passed, c.margin, c.tightest);
    }
    assert!(out.passed);
    assert_eq!(out.growth.checks.len(), 3);

    let k = compute_constants(&series, &ep, &ip);
    assert!(close(&k.m1, 42.924, 1e-3));
    assert!(close(&k.b3, 2.3679, 1e-3));
    assert!(close(&k.q_n1, 113.94, 1e-3));
    assert!(close(&k.c_j1, 1.92e-4, 1e-2));
    assert!(close(&k.c_j2, 5.64e-6, 1e-2));
    assert!(close(&k.c_j3, 2.85e-7, 1e-2));
    assert!(close(&k.c_e, 0.025077, 1e-4));
    assert!(close(&k.e[1], -4.3661, 1e-4));
    assert!(close(&k.delta_y[2], 6.0, 1e-15));
    assert!(close(&claim_i_lhs(&k, &ip), 0.0483050, 1e-5));
    // (iii) left side.
    let row = &out.closing.inequalities[2];
    assert!(row.lhs.starts_with("1.046091"), "{}", row.lhs);
    assert!(row.lhs.len() >= 32);
}

#[test]
fn sign_flip_at_the_last_order_is_caught() {
    let ep = default_limit();
    let ip = InductionParams::default();
    let (mut series, _) = compute_exact_limit(&ep, 451).unwrap();
    series.u_hat[450] = series.u_hat[450].fneg();
    let r = check_base_case(&series, &ep.c_star, &ip, 2);
    let sign = r.check("a.sign").unwrap();
    assert!(!sign.passed);
    assert_eq!(sign.witness.as_deref(), Some("n=450"));
    assert!(!r.passed);
}

#[test]
fn tiny_delta_hat_breaks_the_first_claim() {
    let ep = default_limit();
    let ip = InductionParams { delta_hat: (1, 1_000_000), ..Default::default() };
    let (series, _) = compute_exact_limit(&ep, 451).unwrap();
    let k = compute_constants(&series, &ep, &ip);
    let r = check_closing_inequalities(&k, &series, &ip);
    assert!(!r.report.check("claim.i").unwrap().passed);
    // The growth grid needs only j = 1 to be trivially true.
    let g = check_growth_conditions(&series, &ep.c_star, &InductionParams { j0: 1, ..Default::default() });
    assert!(g.check("b.growth_grid").unwrap().passed);
}

#[test]
fn random_single_coefficient_mutations_are_detected() {
    use implode_core::induction::{cert_seed, mutation_suite};
    let ep = default_limit();
    let ip = InductionParams::default();
    let (series, _) = compute_exact_limit(&ep, 451).unwrap();
    let out = mutation_suite(&series, &ep.c_star, &ip, 20, cert_seed(), 4);
    for o in &out {
        assert!(o.detected(), "undetected mutation {:?}", o.mutation);
    }
}
