use std::f64::consts::PI;

use exarc_core::ep::wrap_angle;
use exarc_core::group::{D3Label, PermutationElement};
use exarc_core::linalg::{self, Mat3};
use exarc_core::model::{self, Eigensystem, ParamPoint};
use exarc_core::scenarios::{self, ETA_LOOPS, G};
use exarc_core::transport::{self, LoopPath, TransportOptions, TransportResult};
use exarc_core::Complex64;
use proptest::prelude::*;

fn planar(zx: &[(f64, f64)], sps: usize) -> LoopPath {
    scenarios::planar_loop(ETA_LOOPS, G, zx, sps, "test").unwrap()
}

fn run(l: &LoopPath) -> TransportResult {
    transport::transport(l).unwrap()
}

fn mu1_loop(sps: usize) -> LoopPath {
    planar(scenarios::rho1_negative_leg(), sps)
}

fn mu3_loop(sps: usize) -> LoopPath {
    planar(scenarios::rho2_positive_leg(), sps)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

fn abs_pattern(u: &Mat3) -> [[f64; 3]; 3] {
    u.map(|r| r.map(|z| z.norm()))
}

fn max_entry_diff(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (a[i][j] - b[i][j]).abs())).fold(0.0, f64::max)
}

/// Eigensystem with every eigenvector pair multiplied by an arbitrary phase.
fn regauged(p: &ParamPoint, phases: &[f64; 3]) -> Eigensystem {
    let mut es = model::eigensystem(p);
    for k in 0..3 {
        let z = Complex64::from_polar(1.0, phases[k]);
        es.right_vectors[k] = linalg::scale(&es.right_vectors[k], z);
        es.left_vectors[k] = linalg::scale(&es.left_vectors[k], z.inv());
    }
    es
}

/// Deterministic pseudo-random phases per parameter point.
fn point_phases(p: &ParamPoint, salt: u64) -> [f64; 3] {
    let bits = p.zeta.to_bits() ^ p.xi.to_bits().rotate_left(17) ^ p.eta.to_bits().rotate_left(31) ^ salt;
    let mut x = bits.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    [0, 1, 2].map(|_| {
        x ^= x >> 29;
        x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI
    })
}

#[test]
fn step_doubling_is_stable() {
    let loops: [&[(f64, f64)]; 5] = [
        scenarios::rho1_negative_leg(),
        scenarios::rho2_positive_leg(),
        &scenarios::RHO1_LOOP,
        &scenarios::RHO2_LOOP,
        &scenarios::BIG_LOOP,
    ];
    for zx in loops {
        let a = run(&planar(zx, 20));
        let b = run(&planar(zx, 40));
        assert!(a.loop_path.len() >= 160 || zx.len() < 9);
        assert_eq!(a.permutation, b.permutation);
        assert!(max_entry_diff(&a.nabp_abs(), &b.nabp_abs()) < 0.05);
        assert!(angle_diff(a.berry_phase, b.berry_phase) < 1e-3);
    }
    let a = transport::transport(&scenarios::planar_loop(0.0, G, &scenarios::MU2_LOOP, 20, "mu2").unwrap()).unwrap();
    let b = transport::transport(&scenarios::planar_loop(0.0, G, &scenarios::MU2_LOOP, 40, "mu2").unwrap()).unwrap();
    assert_eq!(a.permutation, b.permutation);
    assert!(angle_diff(a.berry_phase, b.berry_phase) < 1e-3);
}

#[test]
fn reversal_inverts_the_permutation() {
    for zx in [&scenarios::RHO1_LOOP[..], &scenarios::RHO2_LOOP[..], &scenarios::BIG_LOOP[..], scenarios::rho1_negative_leg()] {
        let l = planar(zx, 10);
        let fwd = run(&l);
        let rev = run(&l.reversed());
        assert_eq!(rev.permutation, fwd.permutation.inverse());
        let product = linalg::matmul(&rev.nabp, &fwd.nabp);
        assert!(transport::abs_pattern_deviation(&product, &PermutationElement::IDENTITY) < 0.05);
        if fwd.permutation.order() == 2 {
            assert_eq!(rev.permutation, fwd.permutation);
        }
    }
}

#[test]
fn homotopic_loops_agree() {
    let a = run(&mu1_loop(10));
    let b = run(&planar(&scenarios::ALPHA_ALT_LOOP, 20));
    assert_eq!(a.permutation.identify(), D3Label::Mu1);
    assert_eq!(a.permutation, b.permutation);
    assert!(angle_diff(a.berry_phase, b.berry_phase) < 1e-3);
}

#[test]
fn composition_law_for_patterns() {
    let (mu1, mu3) = (mu1_loop(10), mu3_loop(10));
    let (u1, u3) = (run(&mu1), run(&mu3));
    for (a, b, ua, ub) in [(&mu1, &mu3, &u1, &u3), (&mu3, &mu1, &u3, &u1)] {
        let joined = run(&transport::concat_loops(a, b).unwrap());
        assert_eq!(joined.permutation, ua.permutation.compose(&ub.permutation));
        let product = linalg::matmul(&ua.nabp, &ub.nabp);
        assert!(max_entry_diff(&joined.nabp_abs(), &abs_pattern(&product)) < 0.05);
    }
}

#[test]
fn non_commutativity_witness() {
    let (mu1, mu3) = (mu1_loop(10), mu3_loop(10));
    let r1 = run(&transport::concat_loops(&mu1, &mu3).unwrap());
    let r2 = run(&transport::concat_loops(&mu3, &mu1).unwrap());
    assert_ne!(r1.permutation, r2.permutation);
    assert!(max_entry_diff(&r1.nabp_abs(), &r2.nabp_abs()) > 0.95);
}

#[test]
fn double_traversal_of_mu1() {
    let once = run(&mu1_loop(40));
    let twice = run(&mu1_loop(40).repeated(2));
    assert_eq!(twice.permutation, PermutationElement::IDENTITY);
    assert!(wrap_angle(twice.berry_phase).abs() < 1e-3);
    assert!(angle_diff(twice.berry_phase, 2.0 * once.berry_phase) < 1e-3);
    // both exchanged bands, band 2 among them, return with a π phase
    let fixed = (0..3).find(|&k| once.permutation.apply(k) == k).unwrap();
    assert_eq!(fixed, 0);
    let phases: Vec<f64> = (0..3).map(|k| twice.frame_holonomy[k][k].arg()).collect();
    assert!(angle_diff(phases[fixed], 0.0) < 1e-2, "{phases:?}");
    assert!(angle_diff(phases[1], PI) < 1e-2, "{phases:?}");
    assert!(angle_diff(phases[2], PI) < 1e-2, "{phases:?}");
    for k in 0..3 {
        assert!((twice.frame_holonomy[k][k].norm() - 1.0).abs() < 1e-2);
    }
}

#[test]
fn trivial_loop_is_identity() {
    let r = run(&planar(&scenarios::TRIVIAL_LOOP, 10));
    assert_eq!(r.permutation, PermutationElement::IDENTITY);
    assert!(r.min_overlap > 0.99);
    assert_eq!(transport::cycles_to_identity(&r.loop_path).unwrap(), 1);
}

#[test]
fn loop_through_an_ep_is_rejected() {
    let eps = exarc_core::ep::find_eps_in_slice(ETA_LOOPS, G, &exarc_core::ep::SliceGrid::square(1.0, 81)).unwrap();
    let e = eps[0].point;
    let zx = [(e.zeta, e.xi), (e.zeta + 0.1, e.xi), (e.zeta + 0.1, e.xi + 0.1), (e.zeta, e.xi)];
    assert!(matches!(scenarios::planar_loop(ETA_LOOPS, G, &zx, 10, "bad"), Err(exarc_core::Error::PathTouchesEp { .. })));
}

#[test]
fn unreliable_results_have_no_nabp() {
    let mut r = run(&mu1_loop(10));
    assert!(transport::nabp(&r).is_ok());
    r.reliable = false;
    assert!(matches!(transport::nabp(&r), Err(exarc_core::Error::Unreliable { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gauge_invariance(salt in any::<u64>(), which in 0usize..4) {
        let zx: &[(f64, f64)] = match which {
            0 => scenarios::rho1_negative_leg(),
            1 => scenarios::rho2_positive_leg(),
            2 => &scenarios::RHO1_LOOP,
            _ => &scenarios::BIG_LOOP,
        };
        let l = planar(zx, 10);
        let plain = run(&l);
        let provider = move |p: &ParamPoint| regauged(p, &point_phases(p, salt));
        let gauged = transport::transport_with(&l, &TransportOptions::default(), &provider).unwrap();
        prop_assert_eq!(plain.permutation, gauged.permutation);
        prop_assert!(max_entry_diff(&plain.nabp_abs(), &gauged.nabp_abs()) < 1e-8);
        let (d0, d1) = (linalg::det3(&plain.nabp), linalg::det3(&gauged.nabp));
        prop_assert!((d0 - d1).norm() < 1e-8);
        prop_assert!(angle_diff(plain.berry_phase, gauged.berry_phase) < 1e-8);
    }
}
