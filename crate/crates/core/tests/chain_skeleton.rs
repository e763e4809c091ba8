use drift_core::bvp::thresholds;
use drift_core::chain::*;
use drift_core::{Error, CHAIN_C};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI};

const MU: f64 = 0.75e-7;

#[test]
fn epsilon0_value_and_scaling() {
    assert!((epsilon0(MU).unwrap() - 0.0704).abs() < 1e-4);
    assert!(epsilon0(0.0).is_err());
    let mut prev = f64::INFINITY;
    for e in 6..14 {
        let mu = 10f64.powi(-e);
        let r = epsilon0(mu).unwrap() / epsilon0(16.0 * mu).unwrap();
        // the -3 inside the root makes the ratio approach 1/2 from below
        assert!(r < 0.5 && r > 0.3, "{r}");
        assert!((r - 0.5).abs() < prev);
        prev = (r - 0.5).abs();
    }
    assert!((epsilon0(1e-20).unwrap() / epsilon0(16e-20).unwrap() - 0.5).abs() < 1e-4);
}

#[test]
fn windows_at_reference_perturbation() {
    let eps = epsilon0(MU).unwrap();
    let ws = admissible_windows(MU).unwrap();
    let expect = [(0.0, 0.25), (1.0 / 3.0, 0.5), (0.5, 2.0 / 3.0), (0.75, 1.0)];
    assert_eq!(ws.len(), 4);
    for (w, (a, b)) in ws.iter().zip(expect) {
        assert!((w.lo - (a + eps)).abs() < 1e-15 && (w.hi - (b - eps)).abs() < 1e-15);
        assert!(w.lo < w.hi && w.lo > 0.0 && w.hi < 1.0);
    }
    for p in ws.windows(2) {
        assert!(p[0].hi < p[1].lo);
    }
    assert_eq!(ws[3].farey_lo, Rational::new(3, 4));
    assert!(ws[3].contains(0.885));
    assert!(admissible_windows(1e-5).unwrap().is_empty());
}

#[test]
fn transition_count_examples() {
    assert_eq!(transition_count(0.885, 0.885 + 2.0 * CHAIN_C * MU, MU).unwrap(), 6);
    assert_eq!(transition_count(0.884998, 0.885002, MU).unwrap(), 1072);
    assert_eq!(transition_count(0.885, 0.885 + 1e-15, MU).unwrap(), 6);
    assert!(matches!(transition_count(0.7, 0.885, MU), Err(Error::Window { .. })));
    assert!(transition_count(0.885, 1.26, MU).is_err());
    assert!(transition_count(0.886, 0.885, MU).is_err());
}

#[test]
fn frequency_chain_is_arithmetic() {
    let c = frequency_chain(0.884998, 0.885002, 1072).unwrap();
    assert_eq!(c.len(), 1071);
    assert_eq!(c[0], 0.884998);
    assert_eq!(c[1070], 0.885002);
    let d = 4e-6 / 1070.0;
    for w in c.windows(2) {
        assert!((w[1] - w[0] - d).abs() < 1e-15);
        assert!(w[1] - w[0] <= CHAIN_C * MU);
    }
    assert!(frequency_chain(0.1, 0.2, 2).is_err());
}

#[test]
fn reference_time_bounds() {
    let (lo, hi) = time_bounds(MU);
    assert!((lo - 16.631).abs() <= 1e-3);
    assert!((hi - 71.840).abs() <= 1e-3);
    for e in 5..12 {
        for m in [1.0, 3.0, 7.5] {
            let mu = m * 10f64.powi(-e);
            if mu > 1e-5 {
                continue;
            }
            let k0 = k0_modulus(mu).unwrap();
            let t = 2.0 * k0.k * k0.big_k;
            let (lo, hi) = time_bounds(mu);
            assert!(lo < t && t < hi, "mu={mu}");
        }
    }
}

fn nearest_farey_distance(omega: f64) -> f64 {
    farey4().iter().map(|f| (omega - f.value()).abs()).fold(f64::INFINITY, f64::min)
}

fn check_skeleton(sk: &TransitionSkeleton) {
    sk.check_invariants().unwrap();
    let mu = sk.mu;
    let k0 = k0_modulus(mu).unwrap();
    let two_k0k0 = 2.0 * k0.k * k0.big_k;
    for i in 0..sk.n {
        let gap = sk.t0[i + 1] - sk.t0[i];
        assert!(gap >= two_k0k0 + 7.0 * PI / 3.0 - 1e-9);
        let eps = nearest_farey_distance(sk.segment_omega(i + 1));
        assert!(gap <= 2.0 * PI / eps + two_k0k0 + 4.0 * PI, "gap {gap}");
    }
    let td = sk.drift_time();
    assert!(td / sk.n as f64 >= time_bounds(mu).0);
    assert_eq!(sk.t0[0], 0.0);
    assert_eq!(sk.rot0[0], 0.0);
}

fn passes_gate(sk: &TransitionSkeleton) -> bool {
    sk.t0.windows(2).all(|w| thresholds(w[1] - w[0]).mu0 >= sk.mu)
}

/// The drift-time upper bound follows from the return-time bound only when
/// every segment frequency stays far enough from its nearest resonance.
fn return_bound_below_t_plus(sk: &TransitionSkeleton) -> bool {
    let k0 = k0_modulus(sk.mu).unwrap();
    let fixed = 2.0 * k0.k * k0.big_k + 4.0 * PI;
    let t_plus = time_bounds(sk.mu).1;
    (1..=sk.n).all(|i| 2.0 * PI / nearest_farey_distance(sk.segment_omega(i)) + fixed <= t_plus)
}

fn check_drift_time(sk: &TransitionSkeleton) {
    let (lo, hi) = time_bounds(sk.mu);
    let per = sk.drift_time() / sk.n as f64;
    assert!(per >= lo && per <= hi, "T_d/N = {per}");
}

#[test]
fn reference_skeleton() {
    let omegas = frequency_chain(0.884998, 0.885002, 1072).unwrap();
    let sk = build_skeleton(&omegas, MU).unwrap();
    assert_eq!(sk.n, 1072);
    check_skeleton(&sk);
    assert!(passes_gate(&sk));
    check_drift_time(&sk);
}

#[test]
fn window_edge_exceeds_upper_time_bound() {
    // close to 1 - eps0 the return times grow past T+; such segments are
    // refused by the perturbation threshold
    let mu = 8.2e-8;
    let omegas = frequency_chain(0.9193, 0.9193 + 2.0 * CHAIN_C * mu, 6).unwrap();
    let sk = build_skeleton(&omegas, mu).unwrap();
    check_skeleton(&sk);
    assert!(sk.drift_time() > sk.n as f64 * time_bounds(mu).1);
    assert!(!passes_gate(&sk));
    assert!(!return_bound_below_t_plus(&sk));
}

#[test]
fn near_resonance_exceeds_upper_time_bound_despite_gate() {
    // small mu, frequency 0.034 from the resonance 0/1: return times near
    // 2 pi / 0.034 pass the threshold but not T+
    let mu = 1e-9;
    let w = admissible_windows(mu).unwrap()[0];
    let oi = w.lo + 0.05 * (w.hi - w.lo);
    let of = oi + 2.0 * CHAIN_C * mu;
    let omegas = frequency_chain(oi, of, transition_count(oi, of, mu).unwrap()).unwrap();
    let sk = build_skeleton(&omegas, mu).unwrap();
    check_skeleton(&sk);
    assert!(passes_gate(&sk));
    assert!(!return_bound_below_t_plus(&sk));
    assert!((sk.drift_time() / sk.n as f64 - 30.0 * PI).abs() < 1e-9);
    assert!(sk.drift_time() > sk.n as f64 * time_bounds(mu).1);
}

#[test]
fn small_skeleton_anchors() {
    // frozen from the construction: gaps in units of pi
    let omegas = frequency_chain(0.885, 0.885 + 2.0 * CHAIN_C * MU, 6).unwrap();
    let sk = build_skeleton(&omegas, MU).unwrap();
    let gaps: Vec<i64> = sk.t0.windows(2).map(|w| ((w[1] - w[0]) / PI).round() as i64).collect();
    assert_eq!(gaps, vec![16, 18, 18, 16, 18, 18]);
    for i in 1..sk.n {
        assert!(wrap_m(sk.rot0[i]).abs() < FRAC_PI_4);
    }
    check_skeleton(&sk);
}

#[test]
fn search_cap_is_enforced() {
    let omegas = [0.885; 5];
    assert!(matches!(build_skeleton_with_cap(&omegas, MU, 1), Err(Error::SearchExhausted { .. })));
    assert_eq!(default_search_cap(MU).unwrap(), 10 * (2.0 * PI / epsilon0(MU).unwrap()).ceil() as usize);
}

#[test]
fn invariant_check_catches_wide_spacing() {
    let sk = build_skeleton(&[0.85, 0.86, 0.87, 0.88, 0.89], MU).unwrap();
    assert!(sk.check_invariants().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chains_stay_in_window(mu in 1e-9..5e-7f64, win in 0usize..4, pos in 0.05..0.95f64, steps in 1usize..40) {
        let ws = admissible_windows(mu).unwrap();
        let w = ws[win % ws.len()];
        let oi = w.lo + pos * (w.hi - w.lo);
        let of = (oi + steps as f64 * 2.0 * CHAIN_C * mu).min(w.hi - 1e-12);
        prop_assume!(of > oi);
        let n = transition_count(oi, of, mu).unwrap();
        prop_assert!(n % 2 == 0 && n >= 6);
        prop_assert!((of - oi) / (n - 2) as f64 <= CHAIN_C * mu * (1.0 + 1e-9));
        let chain = frequency_chain(oi, of, n).unwrap();
        prop_assert!(chain.iter().all(|&x| w.contains(x)));
        let sk = build_skeleton(&chain, mu).unwrap();
        check_skeleton(&sk);
        if return_bound_below_t_plus(&sk) {
            check_drift_time(&sk);
        }
    }

    #[test]
    fn wrap_is_congruent(x in -1e4..1e4f64) {
        let y = wrap_m(x);
        prop_assert!((-PI..=PI).contains(&y));
        let k = ((x - y) / (2.0 * PI)).round();
        prop_assert!((x - y - 2.0 * PI * k).abs() < 1e-9);
    }
}
