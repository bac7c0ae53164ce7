//! Independent oracles for the Hamiltonian layer: nalgebra Schur
//! eigenvalues, principal-minor expansion of the characteristic polynomial
//! and the product of root differences.

use exarc_core::cubic;
use exarc_core::model::{self, ParamPoint, PolyCoeffs};
use exarc_core::Complex64;
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn to_na(h: &[[Complex64; 3]; 3]) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| h[i][j])
}

fn schur_eigenvalues(m: Matrix3<Complex64>) -> [Complex64; 3] {
    let ev = m.schur().eigenvalues().expect("complex Schur form is triangular");
    [ev[0], ev[1], ev[2]]
}

/// Smallest max-deviation over the six matchings of two root sets.
fn set_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const P: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    P.iter().map(|p| (0..3).map(|k| (a[k] - b[p[k]]).norm()).fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
}

fn random_point(rng: &mut ChaCha8Rng) -> ParamPoint {
    ParamPoint {
        eta: rng.random_range(-1.0..1.0),
        zeta: rng.random_range(-1.0..1.0),
        xi: rng.random_range(-1.0..1.0),
        g: rng.random_range(-1.0..1.0),
    }
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = 10.0 * rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..core::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

#[test]
fn cubic_solver_matches_schur_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (a2, a1, a0) = (random_coeff(&mut rng), random_coeff(&mut rng), random_coeff(&mut rng));
        let companion = Matrix3::new(-a2, -a1, -a0, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let oracle = schur_eigenvalues(companion);
        let ours = cubic::solve_monic(a2, a1, a0);
        worst = worst.max(set_distance(&ours, &oracle));
    }
    assert!(worst < 1e-10, "worst deviation {worst:e}");
}

#[test]
fn eigenvalues_match_schur_of_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..2000 {
        let p = random_point(&mut rng);
        let oracle = schur_eigenvalues(to_na(&model::build_h_ep(&p)));
        let ours = model::eigenvalues(&p);
        assert!(set_distance(&ours, &oracle) < 1e-10, "{p:?}");
    }
}

#[test]
fn char_poly_matches_principal_minor_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let p = random_point(&mut rng);
        let h = to_na(&model::build_h_ep(&p));
        let minor = |i: usize, j: usize| h[(i, i)] * h[(j, j)] - h[(i, j)] * h[(j, i)];
        let a2 = -h.trace();
        let a1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
        let a0 = -h.determinant();
        let ours = model::char_poly(&p);
        assert_eq!(ours.a3, c(1.0, 0.0));
        for (x, y) in [(ours.a2, a2), (ours.a1, a1), (ours.a0, a0)] {
            assert!((x - y).norm() < 1e-12, "{p:?}: {x} vs {y}");
        }
    }
}

#[test]
fn char_poly_examples() {
    let p = ParamPoint { eta: 0.0, zeta: 0.0, xi: 0.1, g: 0.0 };
    let cp = model::char_poly(&p);
    assert!((cp.a2 - c(0.1, 0.0)).norm() < 1e-14);
    assert!(cp.a1.norm() < 1e-14);
    assert!((cp.a0 - c(0.2, 0.0)).norm() < 1e-14);

    let p = ParamPoint { eta: 0.0, zeta: 0.0, xi: 0.0, g: 0.61 };
    let cp = model::char_poly(&p);
    assert!((cp.a1 - c(2.0 * 0.61 * 2.61, 0.0)).norm() < 1e-12);
    let mut w = model::eigenvalues(&p);
    w.sort_by(|a, b| a.im.total_cmp(&b.im));
    let r = (2.0 * 0.61 * 2.61f64).sqrt();
    assert!(set_distance(&w, &[c(0.0, -r), c(0.0, 0.0), c(0.0, r)]) < 1e-12);
    assert!((r - 1.78443).abs() < 1e-5);
}

#[test]
fn sylvester_matches_root_product_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0;
    for _ in 0..10_000 {
        let p = random_point(&mut rng);
        let w = model::eigenvalues(&p);
        if model::min_gap(&w) < 1e-4 {
            continue;
        }
        checked += 1;
        let exact = model::discriminant(&p);
        let roots = model::discriminant_from_roots(&w);
        let err = (exact - roots).norm();
        assert!(err <= 1e-8 * exact.norm().max(1e-2), "{p:?}: {exact} vs {roots}");
        let closed = model::char_poly(&p).closed_form_discriminant();
        assert!((exact - closed).norm() <= 1e-10 * exact.norm().max(1.0));
    }
    assert!(checked > 9_900);
}

#[test]
fn sylvester_on_random_cubics() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..2000 {
        let w = [random_coeff(&mut rng), random_coeff(&mut rng), random_coeff(&mut rng)];
        let a2 = -(w[0] + w[1] + w[2]);
        let a1 = w[0] * w[1] + w[0] * w[2] + w[1] * w[2];
        let a0 = -(w[0] * w[1] * w[2]);
        let d = PolyCoeffs::monic(a2, a1, a0).sylvester_discriminant();
        let oracle = model::discriminant_from_roots(&w);
        assert!((d - oracle).norm() <= 1e-9 * oracle.norm().max(1.0), "{d} vs {oracle}");
    }
}

#[test]
fn discriminant_examples() {
    let at = |xi: f64, g: f64| model::discriminant(&ParamPoint { eta: 0.0, zeta: 0.0, xi, g });
    assert!(at(0.0, 0.0).norm() < 1e-14);
    assert!((at(0.1, 0.0) - c(-1.0808, 0.0)).norm() < 1e-12);
    let c1 = 2.0 * 0.61 * 2.61;
    assert!((at(0.0, 0.61) - c(-4.0 * c1 * c1 * c1, 0.0)).norm() < 1e-9);
    assert!((at(0.0, 0.61).re + 129.14).abs() < 1e-2);
}

#[test]
fn small_param_ratio_converges() {
    let dirs = [(0.3, -0.5, 0.7, 0.2), (-0.8, 0.1, 0.4, 0.6), (0.5, 0.5, -0.5, -0.4)];
    for (e, z, x, g) in dirs {
        let ratio = |t: f64| {
            let p = ParamPoint { eta: t * e, zeta: t * z, xi: t * x, g: t * g };
            model::discriminant(&p) / model::discriminant_small_param(&p)
        };
        let (r3, r4, r5) = (ratio(1e-3), ratio(1e-4), ratio(1e-5));
        assert!((r4 - r5).norm() < 0.2 * (r3 - r4).norm() + 1e-9, "{r3} {r4} {r5}");
        assert!((r5 - c(4.0, 0.0)).norm() < 1e-3, "limit {r5}");
    }
}

#[test]
fn small_param_zero_locus_agrees_with_exact() {
    use exarc_core::ep::{self, FreeCoords, SliceGrid};
    let eps = ep::find_eps_in_slice(0.33, 0.61, &SliceGrid::square(1.0, 81)).unwrap();
    assert_eq!(eps.len(), 2);
    for e0 in eps {
        let p0 = e0.point;
        // eta and g scale like t, zeta and xi like t^{3/2}
        for t in [1e-2f64, 1e-3] {
            let s = t * t.sqrt();
            let seed = ParamPoint { eta: t * p0.eta, zeta: s * p0.zeta, xi: s * p0.xi, g: t * p0.g };
            let ep_t = ep::refine_ep(&seed, FreeCoords::ZetaXi).unwrap();
            let approx = model::discriminant_small_param(&ep_t.point).norm();
            let typical = model::discriminant_small_param(&seed.lerp(&ParamPoint { zeta: 0.0, xi: 0.0, ..seed }, 0.5)).norm();
            assert!(approx < 1e-6, "t = {t}: |approx| = {approx:e}");
            assert!(approx < 0.1 * typical, "t = {t}: {approx:e} vs {typical:e}");
        }
    }
}

#[test]
fn physical_mapping_examples() {
    let s = model::PhysicalScale::default();
    assert_eq!(model::to_physical(c(0.0, 0.0), &s), c(19729.0, 83.5));
    assert_eq!(model::to_physical(c(1.0, 0.0), &s), c(19778.5, 83.5));
    assert_eq!(model::to_physical(c(0.0, 1.0), &s), c(19729.0, 133.0));
}

proptest! {
    #[test]
    fn hamiltonian_is_complex_symmetric(e in -1.0..1.0f64, z in -1.0..1.0f64, x in -1.0..1.0f64, g in -1.0..1.0f64) {
        let h = model::build_h_ep(&ParamPoint { eta: e, zeta: z, xi: x, g });
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(h[i][j], h[j][i]);
            }
        }
    }

    #[test]
    fn eigensystem_is_biorthonormal(e in -1.0..1.0f64, z in -1.0..1.0f64, x in -1.0..1.0f64, g in -1.0..1.0f64) {
        let p = ParamPoint { eta: e, zeta: z, xi: x, g };
        let es = model::eigensystem(&p);
        prop_assume!(es.min_gap > 1e-3);
        prop_assert!(!es.is_degenerate);
        prop_assert!(es.biorthonormality_error() < 1e-8);
        prop_assert!(es.residual() < 1e-10);
        for r in &es.right_vectors {
            prop_assert!((exarc_core::linalg::norm(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn physical_round_trip(re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let s = model::PhysicalScale::default();
        let w = c(re, im);
        prop_assert!((model::to_dimensionless(model::to_physical(w, &s), &s) - w).norm() < 1e-12);
    }
}
