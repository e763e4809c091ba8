#![allow(clippy::excessive_precision)]

mod common;

use common::{simpson, Lcg};
use drift_core::elliptic::{
    agm, carlson_rd, carlson_rf, complete_e, complete_k, incomplete_e, jacobi_am, jacobi_sn_cn_dn,
    EllipticModulus,
};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn k_oracle(k: f64) -> f64 {
    simpson(&|x: f64| 1.0 / (1.0 - (k * x.sin()).powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14)
}

fn e_oracle(phi: f64, k: f64) -> f64 {
    simpson(&|x: f64| (1.0 - (k * x.sin()).powi(2)).sqrt(), 0.0, phi, 1e-14)
}

#[test]
fn complete_integrals_match_quadrature() {
    for &k in &[0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
        let kk = complete_k(k).unwrap();
        let ee = complete_e(k).unwrap();
        assert!((kk - k_oracle(k)).abs() <= 1e-11 * kk, "K({k})");
        assert!((ee - e_oracle(FRAC_PI_2, k)).abs() <= 1e-11 * ee, "E({k})");
    }
    assert!((complete_k(0.5).unwrap() - 1.6857503548).abs() < 1e-10);
    assert!((complete_e(0.5).unwrap() - 1.4674622093).abs() < 1e-10);
}

#[test]
fn k_matches_logarithmic_asymptote() {
    let k: f64 = 1.0 - 1e-6;
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    let kk = complete_k(k).unwrap();
    assert!(((kk - (4.0 / kp).ln()) / kk).abs() < 1e-5);
}

#[test]
fn e_via_carlson_agrees_with_agm() {
    for &kp in &[1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9] {
        let m = EllipticModulus::from_kprime(kp).unwrap();
        let carlson = carlson_rf(0.0, kp * kp, 1.0) - m.k * m.k / 3.0 * carlson_rd(0.0, kp * kp, 1.0);
        assert!((m.big_e - carlson).abs() < 1e-13, "kp={kp}: {} vs {carlson}", m.big_e);
        assert!((m.big_k - carlson_rf(0.0, kp * kp, 1.0)).abs() < 1e-13 * m.big_k);
    }
}

#[test]
fn agm_self_consistency() {
    for &k in &[0.0f64, 0.2, 0.6, 0.9, 0.999] {
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        let m = EllipticModulus::new(k).unwrap();
        assert!((m.big_k - PI / (2.0 * agm(1.0, kp))).abs() < 1e-13);
        assert!((m.k * m.k + m.kprime * m.kprime - 1.0).abs() < 1e-14);
    }
}

#[test]
fn incomplete_e_example() {
    let v = incomplete_e(PI / 4.0, 0.5).unwrap();
    assert!((v - 0.767_195_985_711_122_7).abs() < 1e-15);
    assert!((v - e_oracle(PI / 4.0, 0.5)).abs() < 1e-13);
    assert_eq!(incomplete_e(0.0, 0.5).unwrap(), 0.0);
    assert!((incomplete_e(FRAC_PI_2, 0.5).unwrap() - complete_e(0.5).unwrap()).abs() < 1e-15);
}

#[test]
fn incomplete_e_beyond_half_period() {
    let phi = 2.4;
    let v = incomplete_e(phi, 0.8).unwrap();
    assert!((v - e_oracle(phi, 0.8)).abs() < 1e-12);
    assert!((incomplete_e(-phi, 0.8).unwrap() + v).abs() < 1e-14);
}

#[test]
fn jacobi_identities_random() {
    let mut rng = Lcg(7);
    for _ in 0..10_000 {
        let k = (1.0 - 1e-8) * rng.next_f64();
        let u = 60.0 * (rng.next_f64() - 0.5);
        let (s, c, d) = jacobi_sn_cn_dn(u, k).unwrap();
        assert!((s * s + c * c - 1.0).abs() <= 1e-12, "u={u} k={k}");
        assert!((k * k * s * s + d * d - 1.0).abs() <= 1e-12, "u={u} k={k}");
    }
}

#[test]
fn am_derivative_is_dn() {
    let h = 1e-5;
    let mut rng = Lcg(11);
    for _ in 0..500 {
        let k = 0.999_999 * rng.next_f64();
        let u = 10.0 * (rng.next_f64() - 0.5);
        let fd = (jacobi_am(u + h, k).unwrap() - jacobi_am(u - h, k).unwrap()) / (2.0 * h);
        let (_, _, d) = jacobi_sn_cn_dn(u, k).unwrap();
        assert!((fd - d).abs() < 1e-8, "u={u} k={k}: {fd} vs {d}");
    }
}

#[test]
fn cn_squared_antiderivative() {
    for &k in &[0.5, 0.9, 0.999] {
        let m = EllipticModulus::new(k).unwrap();
        for &t in &[0.3, 1.7, 4.0] {
            let quad = simpson(&|x: f64| m.sn_cn_dn(x).1.powi(2), 0.0, t, 1e-13);
            let closed = (m.incomplete_e(m.am(t)) - m.kprime * m.kprime * t) / (k * k);
            assert!((quad - closed).abs() < 1e-10, "k={k} t={t}: {quad} vs {closed}");
        }
    }
}

#[test]
fn separatrix_closed_forms() {
    assert!((jacobi_am(1.0, 1.0).unwrap() - (2.0 * 1f64.exp().atan() - FRAC_PI_2)).abs() < 1e-15);
    assert!((jacobi_am(1.0, 1.0).unwrap() - 0.8657694832).abs() < 1e-10);
    let (_, cn, _) = jacobi_sn_cn_dn(2.0, 1.0).unwrap();
    assert!((cn - 1.0 / 2f64.cosh()).abs() < 1e-16);
    assert!((cn - 0.2658022288).abs() < 1e-10);
}

// (u/K, u, am, sn, cn, dn) from 60-digit reference arithmetic
type Row = (f64, f64, f64, f64, f64, f64);

fn check_rows(kp: f64, big_k: f64, rows: &[Row]) {
    let m = EllipticModulus::from_kprime(kp).unwrap();
    assert!((m.big_k - big_k).abs() < 1e-13 * big_k, "K for kp={kp}");
    for &(frac, u, am, sn, cn, dn) in rows {
        let j = m.eval(u);
        let ctx = format!("kp={kp} u/K={frac}");
        assert!((j.am - am).abs() < 1e-12, "{ctx} am {} vs {am}", j.am);
        assert!((j.sn - sn).abs() < 1e-12, "{ctx} sn");
        // relative accuracy where cn and dn are tiny
        assert!((j.cn - cn).abs() <= 1e-9 * cn.abs() + 1e-15, "{ctx} cn {} vs {cn}", j.cn);
        assert!((j.dn - dn).abs() <= 1e-9 * dn.abs() + 1e-15, "{ctx} dn {} vs {dn}", j.dn);
    }
}

#[test]
fn near_separatrix_reference_values() {
    check_rows(1e-8, 19.806975105072256561, &[
        (0.1, 1.98069751050722576e+00, 1.29658168102465310e+00, 9.62638161338930542e-01, 2.70791008591502291e-01, 2.70791008591502458e-01),
        (0.3, 5.94209253152167705e+00, 1.56554328326570480e+00, 9.99986202798567425e-01, 5.25301937006958982e-03, 5.25301937007910825e-03),
        (0.49, 9.70541780148540489e+00, 1.57067442205318319e+00, 9.99999992569617024e-01, 1.21904741411494932e-04, 1.21904741821651243e-04),
        (0.51, 1.01015573035868513e+01, 1.57071429553190001e+00, 9.99999996635435928e-01, 8.20312629046566778e-05, 8.20312635141803940e-05),
        (0.7, 1.38648825735505792e+01, 1.57079442315409046e+00, 9.99999999998188116e-01, 1.90364080607513191e-06, 1.90366707135317586e-06),
        (0.95, 1.88166263498186446e+01, 1.57079631519126606e+00, 9.99999999999999889e-01, 1.16036304695158621e-08, 1.53181017124536967e-08),
        (1.6, 3.16911601681156121e+01, 1.57152110642681220e+00, 9.99999737347254114e-01, -7.24779568460517856e-04, 7.24779568529504339e-04),
    ]);
    check_rows(3e-10, 23.313533002392237768, &[
        (0.1, 2.33135330023922371e+00, 1.37707609748031956e+00, 9.81294842826940905e-01, 1.92510860579992643e-01, 1.92510860579992643e-01),
        (0.3, 6.99405990071767114e+00, 1.56896169780020456e+00, 9.99998317068697906e-01, 1.83462796550707677e-03, 1.83462796550710127e-03),
        (0.49, 1.14236311711721967e+01, 1.57077445874708799e+00, 9.99999999760894265e-01, 2.18680478068387774e-05, 2.18680478088965728e-05),
        (0.51, 1.18899018312200404e+01, 1.57078260814920134e+00, 9.99999999905899384e-01, 1.37186456948488712e-05, 1.37186456981290791e-05),
        (0.7, 1.63194731016745678e+01, 1.57079616327428062e+00, 9.99999999999986677e-01, 1.63520616038188357e-07, 1.63520891232614756e-07),
        (0.95, 2.21478563522726262e+01, 1.57079632636043942e+00, 1.00000000000000000e+00, 4.34457185171638105e-10, 5.27970686446949449e-10),
        (1.6, 3.73016528038275794e+01, 1.57097458704022097e+00, 9.99999984111642481e-01, -1.78260244380342857e-04, 1.78260244380595286e-04),
    ]);
}

#[test]
fn landen_branch_reference_values() {
    check_rows(9.9e-8, 17.514440347931752313, &[
        (0.1, 1.75144403479317523e+00, 1.22717156609112288e+00, 9.41539663900391233e-01, 3.36902153899820533e-01, 3.36902153899833467e-01),
        (0.3, 5.25433210437952614e+00, 1.56034675233944853e+00, 9.99945403693650037e-01, 1.04493842853666148e-02, 1.04493842858355401e-02),
        (0.51, 8.93236457744519363e+00, 1.57053223595878788e+00, 9.99999965128015367e-01, 2.64090833038903891e-04, 2.64090851595017405e-04),
        (0.7, 1.22601082435522262e+01, 1.57078685306972199e+00, 9.99999999955124230e-01, 9.47372517439726743e-06, 9.47424243303957501e-06),
    ]);
    check_rows(2e-6, 14.508657738537728071, &[
        (0.1, 1.45086577385377291e+00, 1.11037176713137997e+00, 8.95863934315138666e-01, 4.44328494689909592e-01, 4.44328494693522091e-01),
        (0.49, 7.10924229188348633e+00, 1.56916129938148319e+00, 9.99998663342976490e-01, 1.63502668492306654e-03, 1.63502790814096482e-03),
        (0.7, 1.01560604169764090e+01, 1.57071865970729707e+00, 9.99999996983911732e-01, 7.76670875215668848e-05, 7.76928341873213115e-05),
    ]);
}

proptest! {
    #[test]
    fn am_is_odd(u in -50.0..50.0f64, k in 0.0..1.0f64) {
        let a = jacobi_am(u, k).unwrap();
        let b = jacobi_am(-u, k).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn am_shift_by_period(u in -20.0..20.0f64, k in 0.0..0.99999f64) {
        let m = EllipticModulus::new(k).unwrap();
        let d = m.am(u + 2.0 * m.big_k) - m.am(u) - PI;
        prop_assert!(d.abs() <= 1e-11);
    }

    #[test]
    fn k_increasing(a in 0.0..0.999f64, b in 0.0..0.999f64) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(complete_k(lo).unwrap() < complete_k(hi).unwrap());
    }

    #[test]
    fn modulus_invariants(k in 0.0..0.999_999f64) {
        let m = EllipticModulus::new(k).unwrap();
        prop_assert!(m.big_k >= FRAC_PI_2 && m.big_e <= FRAC_PI_2 + 1e-15 && m.big_e >= 1.0);
    }

    #[test]
    fn am_inverts_incomplete_f(u in -8.0..8.0f64, k in 0.0..0.999f64) {
        let m = EllipticModulus::new(k).unwrap();
        prop_assert!((m.incomplete_f(m.am(u)) - u).abs() < 1e-11);
    }
}
