use exarc_core::lab::{self, CavityConfig, FitBox, FitOptions, FittedParams, NoiseSpec};
use exarc_core::linalg;
use exarc_core::model::{self, ParamPoint, PhysicalScale};
use exarc_core::scenarios::{self, Preset, ETA_LOOPS, G};
use exarc_core::transport;
use exarc_core::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config() -> CavityConfig {
    CavityConfig::default()
}

fn fit_box() -> FitBox {
    FitBox::around(&PhysicalScale::default())
}

fn fit_point(p: &ParamPoint, noise: NoiseSpec, seed: u64) -> FittedParams {
    let ds = lab::synthesize(&[*p], &config(), &noise).unwrap();
    lab::fit_step(&ds.steps[0].responses, &config(), &fit_box(), &FitOptions { seed, ..Default::default() }).unwrap()
}

fn param_error(f: &FittedParams, p: &ParamPoint) -> f64 {
    [f.point.eta - p.eta, f.point.zeta - p.zeta, f.point.xi - p.xi, f.point.g - p.g].iter().fold(0.0, |m, d| m.max(d.abs()))
}

fn random_point(rng: &mut ChaCha8Rng) -> ParamPoint {
    ParamPoint {
        eta: rng.random_range(-1.0..1.0),
        zeta: rng.random_range(-1.0..1.0),
        xi: rng.random_range(-1.0..1.0),
        g: rng.random_range(-1.0..1.0),
    }
}

#[test]
fn resolvent_is_reciprocal() {
    let s = PhysicalScale::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let p = random_point(&mut rng);
        let w = Complex64::new(s.omega0 + rng.random_range(-150.0..150.0), 0.0);
        let Ok(g) = lab::resolvent(w, &p, &s) else { continue };
        let scale = linalg::max_abs(&g);
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[i][j] - g[j][i]).norm() <= 1e-10 * scale);
            }
        }
        let expansion = lab::greens_3site(w, &p, &s).unwrap();
        assert!(linalg::max_abs(&linalg::sub(&g, &expansion)) <= 1e-8 * scale);
    }
}

#[test]
fn far_field_and_completeness() {
    let s = PhysicalScale::default();
    let p = ParamPoint { eta: 0.33, zeta: -0.6, xi: -0.16, g: 0.61 };
    // far from every pole the resolvent tends to I / (ω - ω0)
    let w = Complex64::new(s.omega0 + 1e7, 0.0);
    let g = lab::resolvent(w, &p, &s).unwrap();
    let far = (w - Complex64::new(s.omega0, 0.0)).inv();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { far } else { Complex64::new(0.0, 0.0) };
            assert!((g[i][j] - expect).norm() < 1e-3 * far.norm());
        }
    }
    // the fitted residues resolve the identity
    let f = fit_point(&p, NoiseSpec::noiseless(), 1);
    for i in 0..3 {
        for k in 0..3 {
            let sum: Complex64 = (0..3).map(|j| f.mode_coeffs.a[j][i] * f.mode_coeffs.b[j][k]).sum();
            let expect = if i == k { 1.0 } else { 0.0 };
            assert!((sum - Complex64::new(expect, 0.0)).norm() < 1e-6, "({i},{k}) = {sum}");
        }
    }
}

#[test]
fn isolated_cavity_poles_follow_the_diagonal() {
    let s = PhysicalScale::default();
    let p = ParamPoint { eta: 0.33, zeta: 0.2, xi: -0.1, g: 0.61 };
    let k = s.kappa.abs();
    let b = lab::isolated_cavity_pole(model::SITE_B, &p, &s).unwrap();
    let a = lab::isolated_cavity_pole(model::SITE_A, &p, &s).unwrap();
    let c = lab::isolated_cavity_pole(model::SITE_C, &p, &s).unwrap();
    let r2 = std::f64::consts::SQRT_2;
    assert!((b - Complex64::new(s.omega0 - r2 * k * 0.33, s.gamma0 - r2 * k * 1.61)).norm() < 1e-9);
    assert!((c - Complex64::new(s.omega0 + r2 * k * 0.33, s.gamma0 + r2 * k * 1.61)).norm() < 1e-9);
    assert!((a - Complex64::new(s.omega0 - k * -0.1, s.gamma0 - k * 0.2)).norm() < 1e-9);
    assert!(lab::isolated_cavity_pole(3, &p, &s).is_err());
}

#[test]
fn mode_profile_sampling() {
    let profile = lab::onsite_profile(&config()).unwrap();
    assert_eq!(profile.samples.len(), 7);
    assert_eq!(profile.sign_changes(), 2);
    assert!((profile.samples.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    let two = CavityConfig { n_positions_per_cavity: 2, ..config() };
    assert!(lab::onsite_profile(&two).is_err());
}

#[test]
fn noiseless_round_trip_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let truth = PhysicalScale::default();
    for k in 0..100 {
        let p = random_point(&mut rng);
        let f = fit_point(&p, NoiseSpec::noiseless(), k);
        assert!(param_error(&f, &p) < 1e-4, "{p:?} -> {:?}", f.point);
        assert!((f.scale.omega0 - truth.omega0).abs() < 1e-4 * truth.omega0);
        assert!((f.scale.gamma0 - truth.gamma0).abs() < 1e-4 * truth.gamma0);
        assert!((f.scale.kappa - truth.kappa).abs() < 1e-4 * truth.kappa.abs());
        assert!(f.residual < 1e-10);
    }
}

#[test]
fn reconstructed_eigenvectors_match_truth() {
    for p in scenarios::waypoints(ETA_LOOPS, G, &scenarios::RHO1_LOOP) {
        let f = fit_point(&p, NoiseSpec::noiseless(), 3);
        let fitted = f.eigensystem().unwrap();
        let truth = model::eigensystem(&p);
        for j in 0..3 {
            let k = (0..3)
                .min_by(|&a, &b| {
                    (truth.eigenvalues[a] - fitted.eigenvalues[j]).norm().total_cmp(&(truth.eigenvalues[b] - fitted.eigenvalues[j]).norm())
                })
                .unwrap();
            let ov = linalg::dot(&truth.left_vectors[k], &fitted.right_vectors[j]).norm();
            assert!(ov > 0.99, "{p:?} state {j}: {ov}");
        }
    }
}

#[test]
fn synthesis_and_fit_are_deterministic() {
    let points = scenarios::waypoints(ETA_LOOPS, G, scenarios::rho1_negative_leg());
    let noise = NoiseSpec { relative_amplitude: 0.01, seed: 5 };
    let a = lab::synthesize(&points, &config(), &noise).unwrap();
    let b = lab::synthesize(&points, &config(), &noise).unwrap();
    assert_eq!(a, b);
    let c = lab::synthesize(&points, &config(), &NoiseSpec { seed: 6, ..noise }).unwrap();
    assert_ne!(a, c);
    // a step's noise depends only on the seed and its index
    let head = lab::synthesize(&points[..5], &config(), &noise).unwrap();
    assert_eq!(head.steps[..], a.steps[..5]);
    assert_eq!(lab::step_rng(5, 3).random::<u64>(), lab::step_rng(5, 3).random::<u64>());

    let opts = FitOptions { seed: 9, ..Default::default() };
    let f1 = lab::fit_step(&a.steps[0].responses, &config(), &fit_box(), &opts).unwrap();
    let f2 = lab::fit_step(&a.steps[0].responses, &config(), &fit_box(), &opts).unwrap();
    assert_eq!(f1, f2);
}

#[test]
fn noise_monotonicity() {
    let p = ParamPoint { eta: 0.33, zeta: -0.6, xi: -0.16, g: 0.61 };
    let mut medians = Vec::new();
    for amp in [0.0, 0.005, 0.01, 0.02] {
        let mut errs: Vec<f64> =
            (0..9u64).map(|seed| param_error(&fit_point(&p, NoiseSpec { relative_amplitude: amp, seed }, seed), &p)).collect();
        errs.sort_by(f64::total_cmp);
        medians.push(errs[errs.len() / 2]);
    }
    for w in medians.windows(2) {
        assert!(w[1] >= w[0], "{medians:?}");
    }
}

#[test]
fn noiseless_pipeline_matches_analytic_transport() {
    let l = scenarios::planar_loop(ETA_LOOPS, G, scenarios::rho1_negative_leg(), 2, "mu1").unwrap();
    let ds = lab::synthesize(&l.steps, &config(), &NoiseSpec::noiseless()).unwrap();
    let fitted = lab::fit_loop(&ds, &fit_box(), &FitOptions::default()).unwrap();
    let analytic = transport::transport(&l).unwrap();
    assert_eq!(fitted.transport.permutation, analytic.permutation);
    assert!(exarc_core::ep::wrap_angle(fitted.transport.berry_phase - analytic.berry_phase).abs() < 1e-6);
}

#[test]
fn rho_loops_stay_distinct_through_the_pipeline() {
    let mut perms = Vec::new();
    for preset in [Preset::Rho1, Preset::Rho2] {
        let l = preset.build(1).unwrap();
        let ds = lab::synthesize(&l.steps, &config(), &NoiseSpec { relative_amplitude: 0.01, seed: 4 }).unwrap();
        let fitted = lab::fit_loop(&ds, &fit_box(), &FitOptions { seed: 4, ..Default::default() }).unwrap();
        perms.push(fitted.transport.permutation.to_string());
    }
    assert_eq!(perms, ["231", "312"]);
}

#[test]
fn malformed_and_garbage_data_are_rejected() {
    let cfg = config();
    let short = vec![vec![Complex64::new(1.0, 0.0); cfg.n_frequencies]; 3];
    assert!(matches!(lab::fit_step(&short, &cfg, &fit_box(), &FitOptions::default()), Err(Error::InvalidInput(_))));

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let garbage: Vec<Vec<Complex64>> = (0..cfg.n_positions())
        .map(|_| (0..cfg.n_frequencies).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    assert!(matches!(lab::fit_step(&garbage, &cfg, &fit_box(), &FitOptions::default()), Err(Error::FitDiverged { .. })));

    let bad_box = FitBox { upper: [0.0; 7], ..fit_box() };
    let ds = lab::synthesize(&[ParamPoint::new(0.1, 0.1, 0.1, 0.1).unwrap()], &cfg, &NoiseSpec::noiseless()).unwrap();
    assert!(lab::fit_step(&ds.steps[0].responses, &cfg, &bad_box, &FitOptions::default()).is_err());

    let short_loop = lab::synthesize(&scenarios::waypoints(ETA_LOOPS, G, &scenarios::TRIVIAL_LOOP), &cfg, &NoiseSpec::noiseless()).unwrap();
    assert!(lab::fit_loop(&short_loop, &fit_box(), &FitOptions::default()).is_err());
}
