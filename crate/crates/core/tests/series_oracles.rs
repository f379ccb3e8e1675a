//! Frozen reference values for the limit-parameter series, computed
//! independently with a reduced-rational implementation of the recursion.

use std::cmp::Ordering;
use std::time::Instant;

use implode_core::kernel::decimal::to_sig_digits;
use implode_core::kernel::Field;
use implode_core::params::default_limit;
use implode_core::series::{compute_exact_limit, recursion_residual, RecursionData};

const FROZEN: [(usize, f64); 8] = [
    (2, 4.44126333590815),
    (3, 14.617008492338861),
    (4, 65.4754445603861),
    (5, 351.6247365555407),
    (10, 9252992.64253281),
    (20, 8.731467382404917e18),
    (50, 2.9178013350355256e66),
    (100, 4.393838707155033e162),
];

#[test]
fn limit_coefficients_match_frozen_values() {
    let ep = default_limit();
    let (s, _) = compute_exact_limit(&ep, 100).unwrap();
    assert!(s.u[0].fis_zero());
    assert_eq!(s.u[1], ep.u1);
    for (n, want) in FROZEN {
        let got = s.u[n].to_f64();
        assert!((got / want - 1.0).abs() < 1e-12, "U_{n}: {got} vs {want}");
    }
}

#[test]
fn order_500_completes_with_positive_renormalised_tail() {
    let ep = default_limit();
    let t = Instant::now();
    let (s, path) = compute_exact_limit(&ep, 500).unwrap();
    eprintln!("order 500 via {path:?} in {:?}", t.elapsed());
    for n in 20..=450 {
        assert_eq!(s.u_hat[n].sign(), Ordering::Greater, "n = {n}");
    }
    for n in 0..=500 {
        // Û_500 is near 10^860, beyond f64 range; check the decimal form.
        let dec = to_sig_digits(&s.u_hat[n], 8);
        let exp: i64 = dec.split('e').nth(1).unwrap().parse().unwrap();
        assert!(exp.abs() < 2000, "n = {n}: {dec}");
        let back = s.u_hat[n].fmul_rational(&s.catalan[n].clone().into());
        assert_eq!(back, s.u[n]);
    }
    let data = RecursionData::from_exact(&ep);
    for n in [2, 3, 17, 101, 250] {
        assert!(recursion_residual(&data, &s.u, n).fis_zero());
    }
}
