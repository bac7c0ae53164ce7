//! Inverse fit of the seven model scalars from measured spectra.
//!
//! The parameter vector is `[ω0, γ0, κ, η, ζ, ξ, g]`. Each cavity's
//! responses are first projected onto the known mode profile, which reduces
//! a step to the `A` column of the Green's function at every frequency. The
//! fit then runs differential evolution over a box, followed by
//! Levenberg-Marquardt from the best candidates.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use super::evolution::{differential_evolution, DeOptions};
use super::{onsite_profile, physical_hamiltonian, resolvent_column, step_rng, CavityConfig, ModeProfile, SpectralDataset};
use crate::linalg::{self, Mat3, Vec3, C0, C1, I};
use crate::model::{self, Eigensystem, ParamPoint, PhysicalScale};
use crate::transport::{transport_sequence, LoopPath, TransportOptions, TransportResult};
use crate::{Error, Result};

const SQRT2: f64 = core::f64::consts::SQRT_2;
const N_PARAMS: usize = 7;

/// Box constraints for `[ω0, γ0, κ, η, ζ, ξ, g]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitBox {
    pub lower: [f64; N_PARAMS],
    pub upper: [f64; N_PARAMS],
}

impl FitBox {
    /// A box around nominal lab constants: `ω0 ± |κ|/2`, `γ0` and `κ` within
    /// ±50 % and ±25 %, and the dimensionless parameters in `[-1, 1]`.
    pub fn around(scale: &PhysicalScale) -> Self {
        let k = scale.kappa.abs();
        Self {
            lower: [scale.omega0 - 0.5 * k, 0.5 * scale.gamma0, 1.25 * scale.kappa, -1.0, -1.0, -1.0, -1.0],
            upper: [scale.omega0 + 0.5 * k, 1.5 * scale.gamma0, 0.75 * scale.kappa, 1.0, 1.0, 1.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lower.iter().zip(&self.upper).all(|(l, u)| l.is_finite() && u.is_finite() && l <= u);
        if !ok {
            return Err(Error::InvalidInput("fit box bounds must be finite with lower ≤ upper".into()));
        }
        if self.upper[2] >= 0.0 {
            return Err(Error::InvalidInput("fit box must keep kappa negative".into()));
        }
        Ok(())
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (*l, *u)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitOptions {
    pub de: DeOptions,
    pub seed: u64,
    pub lm_iterations: usize,
    /// How many of the best evolutionary candidates are polished locally.
    pub polish_candidates: usize,
    /// Add the linearised rational-fit estimate to the initial population.
    pub algebraic_seed: bool,
    pub divergence_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            de: DeOptions::default(),
            seed: 0,
            lm_iterations: 200,
            polish_candidates: 4,
            algebraic_seed: true,
            divergence_threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FitWarning {
    /// Two fitted eigenvalues are closer than three frequency bins.
    Identifiability {
        min_distance: f64,
        spacing: f64,
    },
    OutsideValidatedRegime,
}

/// Right-vector coefficients `a` and left-vector coefficients `b` of each
/// fitted state, indexed `[state][site]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeCoeffs {
    pub a: [Vec3; 3],
    pub b: [Vec3; 3],
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedParams {
    pub point: ParamPoint,
    pub scale: PhysicalScale,
    /// Physical eigenvalues in rad/s, ascending real part.
    pub eigenvalues: [Complex64; 3],
    /// `Σ|P - P_model|² / Σ|P|²` over all positions and frequencies.
    pub residual: f64,
    pub mode_coeffs: ModeCoeffs,
    pub warnings: Vec<FitWarning>,
    pub evaluations: usize,
}

impl FittedParams {
    pub fn params(&self) -> [f64; N_PARAMS] {
        to_vector(&self.point, &self.scale)
    }

    /// Eigensystem rebuilt from the fitted mode coefficients.
    pub fn eigensystem(&self) -> Result<Eigensystem> {
        let w = self.eigenvalues.map(|w| model::to_dimensionless(w, &self.scale));
        Eigensystem::from_right_vectors(self.point, w, self.mode_coeffs.a)
    }
}

fn to_vector(p: &ParamPoint, s: &PhysicalScale) -> [f64; N_PARAMS] {
    [s.omega0, s.gamma0, s.kappa, p.eta, p.zeta, p.xi, p.g]
}

fn from_vector(x: &[f64]) -> (ParamPoint, PhysicalScale) {
    (ParamPoint { eta: x[3], zeta: x[4], xi: x[5], g: x[6] }, PhysicalScale { omega0: x[0], gamma0: x[1], kappa: x[2] })
}

/// Responses of one step reduced to `G_{s,A}(ω)`, indexed `[site][frequency]`.
struct Reduced {
    freqs: Vec<f64>,
    y: [Vec<Complex64>; 3],
    norm2: f64,
}

fn reduce(responses: &[Vec<Complex64>], config: &CavityConfig, profile: &ModeProfile) -> Reduced {
    let nf = config.n_frequencies;
    let src = profile.top();
    let y = core::array::from_fn(|site| {
        (0..nf)
            .map(|f| {
                let s: Complex64 = (0..config.n_positions_per_cavity)
                    .map(|k| responses[site * config.n_positions_per_cavity + k][f] * profile.samples[k])
                    .sum();
                s / src
            })
            .collect()
    });
    let norm2 = responses.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() / (src * src);
    Reduced { freqs: config.frequencies(), y, norm2 }
}

impl Reduced {
    fn cost(&self, x: &[f64], source: usize) -> f64 {
        let (p, s) = from_vector(x);
        if !(s.kappa < 0.0) {
            return f64::INFINITY;
        }
        let h = physical_hamiltonian(&p, &s);
        let mut acc = 0.0;
        for (f, &w) in self.freqs.iter().enumerate() {
            let Some(col) = resolvent_column(Complex64::new(w, 0.0), &h, source) else {
                return f64::INFINITY;
            };
            for site in 0..3 {
                acc += (self.y[site][f] - col[site]).norm_sqr();
            }
        }
        acc / self.norm2
    }

    /// Residual vector (real and imaginary parts) and its Jacobian.
    fn residual_and_jacobian(&self, x: &[f64], source: usize) -> Option<(Vec<f64>, Vec<[f64; N_PARAMS]>)> {
        let (p, s) = from_vector(x);
        let h = physical_hamiltonian(&p, &s);
        let k = s.kappa.abs();
        let scale = self.norm2.sqrt();
        let h_dimless = model::build_h_ep(&p);
        let diag = |d: [Complex64; 3]| -> Mat3 { core::array::from_fn(|i| core::array::from_fn(|j| if i == j { d[i] } else { C0 })) };
        let u = Complex64::new(SQRT2, 0.0);
        let dh: [Mat3; N_PARAMS] = [
            linalg::identity(),
            diag([I, I, I]),
            core::array::from_fn(|i| core::array::from_fn(|j| -h_dimless[i][j])),
            diag([-u * k, C0, u * k]),
            diag([C0, -I * k, C0]),
            diag([C0, -C1 * k, C0]),
            diag([-u * I * k, C0, u * I * k]),
        ];
        let mut r = Vec::with_capacity(6 * self.freqs.len());
        let mut jac = Vec::with_capacity(6 * self.freqs.len());
        for (f, &w) in self.freqs.iter().enumerate() {
            let omega = Complex64::new(w, 0.0);
            let a: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| if i == j { omega - h[i][j] } else { -h[i][j] }));
            let g = linalg::inverse3(&a)?;
            let col: Vec3 = core::array::from_fn(|i| g[i][source]);
            // d(col)/dθ = G (∂H/∂θ) col
            let dcol: [Vec3; N_PARAMS] = core::array::from_fn(|q| linalg::matvec(&g, &linalg::matvec(&dh[q], &col)));
            for site in 0..3 {
                let res = (self.y[site][f] - col[site]) / scale;
                r.push(res.re);
                r.push(res.im);
                jac.push(core::array::from_fn(|q| -dcol[q][site].re / scale));
                jac.push(core::array::from_fn(|q| -dcol[q][site].im / scale));
            }
        }
        Some((r, jac))
    }

    /// Linearised rational fit: `G_{s,A} = N_s / D` with `D` the monic
    /// characteristic polynomial, solved as linear least squares in the
    /// shifted variable `x = (ω - ω_c) / s`.
    fn rational_estimate(&self, omega_c: f64, s: f64) -> Option<[f64; N_PARAMS]> {
        const NU: usize = 9;
        let mut ata = [[C0; NU]; NU];
        let mut atb = [C0; NU];
        let mut push = |row: [Complex64; NU], rhs: Complex64| {
            for i in 0..NU {
                for j in 0..NU {
                    ata[i][j] += row[i].conj() * row[j];
                }
                atb[i] += row[i].conj() * rhs;
            }
        };
        for (f, &w) in self.freqs.iter().enumerate() {
            let x = Complex64::new((w - omega_c) / s, 0.0);
            let (x2, x3) = (x * x, x * x * x);
            // unknowns: d2 d1 d0 | a1 a0 | b1 b0 | c1 c0
            let ya = self.y[1][f] * s;
            push([ya * x2, ya * x, ya, -x, -C1, C0, C0, C0, C0], x2 - ya * x3);
            let yb = self.y[0][f] * s;
            push([yb * x2, yb * x, yb, C0, C0, -x, -C1, C0, C0], -yb * x3);
            let yc = self.y[2][f] * s;
            push([yc * x2, yc * x, yc, C0, C0, C0, C0, -x, -C1], -yc * x3);
        }
        let u = linalg::solve_complex(ata, atb)?;
        let (b1, b0, c1, c0) = (u[5], u[6], u[7], u[8]);
        if b1.norm() == 0.0 || c1.norm() == 0.0 {
            return None;
        }
        let tau = -(b1 + c1).re / 2.0;
        let h_c = -b0 / b1;
        let h_b = -c0 / c1;
        let h_a = -u[0] - h_b - h_c;
        let to_phys = |h: Complex64| h * s + omega_c;
        let (hb, ha, hc) = (to_phys(h_b), to_phys(h_a), to_phys(h_c));
        let kabs = tau * s;
        if !(kabs > 0.0) {
            return None;
        }
        let c = (hb + hc) / 2.0;
        let e = -(hb - c) / (kabs * SQRT2);
        let v = (c - ha) / kabs;
        let out = [c.re, c.im, -kabs, e.re, v.im, v.re, e.im - 1.0];
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

fn levenberg_marquardt(reduced: &Reduced, x0: &[f64], source: usize, iterations: usize) -> (Vec<f64>, f64, usize) {
    let mut x = x0.to_vec();
    let mut cost = reduced.cost(&x, source);
    let mut evals = 1;
    let mut lambda = 1e-3;
    for _ in 0..iterations {
        let Some((r, jac)) = reduced.residual_and_jacobian(&x, source) else { break };
        let mut a = [[0.0; N_PARAMS]; N_PARAMS];
        let mut grad = [0.0; N_PARAMS];
        for (ri, row) in r.iter().zip(&jac) {
            for i in 0..N_PARAMS {
                grad[i] += row[i] * ri;
                for j in 0..N_PARAMS {
                    a[i][j] += row[i] * row[j];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut m = a;
            for i in 0..N_PARAMS {
                m[i][i] += lambda * a[i][i].max(1e-300);
            }
            let Some(delta) = linalg::solve_real(m, grad.map(|g| -g)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + d).collect();
            let tc = reduced.cost(&trial, source);
            evals += 1;
            if tc < cost {
                let rel = (cost - tc) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                cost = tc;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost, evals)
}

/// Fit one step of responses.
pub fn fit_step(responses: &[Vec<Complex64>], config: &CavityConfig, init_box: &FitBox, opts: &FitOptions) -> Result<FittedParams> {
    fit_step_stream(responses, config, init_box, opts, 0)
}

fn fit_step_stream(
    responses: &[Vec<Complex64>],
    config: &CavityConfig,
    init_box: &FitBox,
    opts: &FitOptions,
    stream: usize,
) -> Result<FittedParams> {
    config.validate()?;
    init_box.validate()?;
    let (np, nf) = (config.n_positions(), config.n_frequencies);
    if responses.len() != np || responses.iter().any(|r| r.len() != nf) {
        return Err(Error::InvalidInput(format!("responses are not {np}×{nf}")));
    }
    if responses.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    let profile = onsite_profile(config)?;
    let reduced = reduce(responses, config, &profile);
    if !(reduced.norm2 > 0.0) {
        return Err(Error::InvalidInput("responses are identically zero".into()));
    }
    let source = config.source_site;

    let mut seeds: Vec<Vec<f64>> = Vec::new();
    if opts.algebraic_seed && source == model::SITE_A {
        let est = reduced.rational_estimate(config.scale.omega0, config.scale.kappa.abs());
        if let Some(e) = est {
            seeds.push(e.to_vec());
        }
    }
    let mut rng = step_rng(opts.seed, stream);
    let cost = |x: &[f64]| reduced.cost(x, source);
    let de = differential_evolution(&cost, &init_box.bounds(), &seeds, &opts.de, &mut rng);
    let mut evaluations = de.evaluations;

    let mut starts: Vec<Vec<f64>> = de.ranked.iter().take(opts.polish_candidates.max(1)).map(|(x, _)| x.clone()).collect();
    starts.extend(seeds);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        let (x, c, e) = levenberg_marquardt(&reduced, s, source, opts.lm_iterations);
        evaluations += e;
        if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
            best = Some((x, c));
        }
    }
    let (x, _) = best.expect("at least one start");
    let (point, scale) = from_vector(&x);
    if scale.validate().is_err() || point.validate().is_err() {
        return Err(Error::FitDiverged { residual: f64::INFINITY, threshold: opts.divergence_threshold });
    }

    let residual = full_residual(responses, config, &profile, &point, &scale);
    if !(residual <= opts.divergence_threshold) {
        return Err(Error::FitDiverged { residual, threshold: opts.divergence_threshold });
    }

    let mut eigenvalues = model::eigenvalues(&point).map(|w| model::to_physical(w, &scale));
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mode_coeffs = residues(responses, config, &profile, &eigenvalues)?;

    let mut warnings = Vec::new();
    let min_distance = model::min_gap(&eigenvalues);
    let spacing = config.frequency_spacing();
    if min_distance < 3.0 * spacing {
        warnings.push(FitWarning::Identifiability { min_distance, spacing });
    }
    if !point.in_validated_regime() {
        warnings.push(FitWarning::OutsideValidatedRegime);
    }
    Ok(FittedParams { point, scale, eigenvalues, residual, mode_coeffs, warnings, evaluations })
}

fn full_residual(
    responses: &[Vec<Complex64>],
    config: &CavityConfig,
    profile: &ModeProfile,
    point: &ParamPoint,
    scale: &PhysicalScale,
) -> f64 {
    // the frequency grid belongs to the data, not to the fitted scale
    let freqs = config.frequencies();
    let h = physical_hamiltonian(point, scale);
    let src = profile.top();
    let mut num = 0.0;
    let mut den = 0.0;
    for (f, &w) in freqs.iter().enumerate() {
        let Some(col) = resolvent_column(Complex64::new(w, 0.0), &h, config.source_site) else {
            return f64::INFINITY;
        };
        for (m, row) in responses.iter().enumerate() {
            let (site, k) = config.position(m);
            let model = col[site] * profile.samples[k] * src;
            num += (row[f] - model).norm_sqr();
            den += row[f].norm_sqr();
        }
    }
    num / den
}

/// Pole residues per position by linear least squares at fixed poles,
/// projected onto the mode profile and split with `b ∝ a` (complex symmetry).
fn residues(responses: &[Vec<Complex64>], config: &CavityConfig, profile: &ModeProfile, poles: &[Complex64; 3]) -> Result<ModeCoeffs> {
    let freqs = config.frequencies();
    let basis: Vec<[Complex64; 3]> = freqs.iter().map(|&w| poles.map(|p| (Complex64::new(w, 0.0) - p).inv())).collect();
    let mut ata = [[C0; 3]; 3];
    for row in &basis {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i].conj() * row[j];
            }
        }
    }
    let src = profile.top();
    let mut site_residue = [[C0; 3]; 3]; // [state][site]
    for (m, resp) in responses.iter().enumerate() {
        let (site, k) = config.position(m);
        let mut atb = [C0; 3];
        for (row, y) in basis.iter().zip(resp) {
            for i in 0..3 {
                atb[i] += row[i].conj() * y;
            }
        }
        let r = linalg::solve_complex(ata, atb).ok_or_else(|| Error::InvalidInput("residue system is singular".into()))?;
        for j in 0..3 {
            site_residue[j][site] += r[j] * profile.samples[k] / src;
        }
    }
    let mut a = [[C0; 3]; 3];
    let mut b = [[C0; 3]; 3];
    for j in 0..3 {
        let n = linalg::norm(&site_residue[j]);
        if n == 0.0 {
            return Err(Error::InvalidInput(format!("state {j} has no weight at the source")));
        }
        a[j] = linalg::scale(&site_residue[j], Complex64::new(1.0 / n, 0.0));
        let aa = linalg::dot(&a[j], &a[j]);
        b[j] = if aa.norm() > 0.0 { linalg::scale(&a[j], aa.inv()) } else { a[j] };
    }
    Ok(ModeCoeffs { a, b })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopFit {
    pub fits: Vec<FittedParams>,
    pub transport: TransportResult,
}

/// Fit every step of a dataset independently; step `l` draws from its own
/// random stream so results do not depend on the number of steps.
pub fn fit_steps(dataset: &SpectralDataset, init_box: &FitBox, opts: &FitOptions) -> Result<Vec<FittedParams>> {
    dataset.validate()?;
    dataset.steps.iter().enumerate().map(|(l, step)| fit_step_stream(&step.responses, &dataset.config, init_box, opts, l)).collect()
}

/// Fit every step of a looped dataset and transport the reconstructed
/// eigenvectors.
pub fn fit_loop(dataset: &SpectralDataset, init_box: &FitBox, opts: &FitOptions) -> Result<LoopFit> {
    dataset.validate()?;
    if dataset.steps.len() < 8 {
        return Err(Error::InvalidInput(format!("a loop needs at least 8 steps, got {}", dataset.steps.len())));
    }
    let fits = fit_steps(dataset, init_box, opts)?;
    let systems: Vec<Eigensystem> = fits.iter().map(|f| f.eigensystem()).collect::<Result<_>>()?;
    let steps: Vec<ParamPoint> = match dataset.steps.iter().map(|s| s.param_truth).collect::<Option<Vec<_>>>() {
        Some(truth) => truth,
        None => fits.iter().map(|f| f.point).collect(),
    };
    let loop_path = LoopPath::measured(steps, String::from("fitted loop"));
    let transport = transport_sequence(&loop_path, &systems, &TransportOptions::default())?;
    Ok(LoopFit { fits, transport })
}

#[cfg(test)]
mod tests {
    use super::super::{synthesize, NoiseSpec};
    use super::*;
    use alloc::vec;

    #[test]
    fn noiseless_round_trip() {
        let truth = ParamPoint::new(0.33, 0.1, -0.2, 0.61).unwrap();
        let config = CavityConfig::default();
        let ds = synthesize(&[truth], &config, &NoiseSpec::noiseless()).unwrap();
        let fit = fit_step(&ds.steps[0].responses, &config, &FitBox::around(&config.scale), &FitOptions::default()).unwrap();
        let err =
            to_vector(&fit.point, &fit.scale).iter().zip(to_vector(&truth, &config.scale)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "max parameter error {err}");
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn rational_estimate_is_exact_without_noise() {
        let truth = ParamPoint::new(-0.2, 0.4, 0.3, 0.5).unwrap();
        let config = CavityConfig::default();
        let ds = synthesize(&[truth], &config, &NoiseSpec::noiseless()).unwrap();
        let profile = onsite_profile(&config).unwrap();
        let red = reduce(&ds.steps[0].responses, &config, &profile);
        let est = red.rational_estimate(config.scale.omega0, config.scale.kappa.abs()).unwrap();
        let want = to_vector(&truth, &config.scale);
        for (a, b) in est.iter().zip(want) {
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{est:?} vs {want:?}");
        }
    }

    #[test]
    fn malformed_responses_are_rejected() {
        let config = CavityConfig::default();
        let bad = vec![vec![C0; 3]; 2];
        assert!(fit_step(&bad, &config, &FitBox::around(&config.scale), &FitOptions::default()).is_err());
    }
}
