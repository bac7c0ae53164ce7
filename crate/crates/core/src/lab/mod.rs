//! Synthetic Green's-function spectra and their inverse fit.
//!
//! A probe at height sample `k` of cavity `s` sees the pressure
//! `P(ω, (s, k)) = φ_k φ_src G_{s,A}(ω)`, where `φ` is the sampled onsite
//! mode and the source sits at the top sample of cavity `A`. Positions are
//! ordered `B` (all heights), then `A`, then `C`.

mod evolution;
mod fit;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, Mat3, Vec3, C0};
use crate::model::{self, ParamPoint, PhysicalScale, SITE_A, SITE_B, SITE_C};
use crate::{Error, Result};

pub use evolution::{differential_evolution, DeOptions, DeOutcome};
pub use fit::{fit_loop, fit_step, fit_steps, FitBox, FitOptions, FitWarning, FittedParams, LoopFit, ModeCoeffs};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CavityConfig {
    pub scale: PhysicalScale,
    pub n_positions_per_cavity: usize,
    pub n_frequencies: usize,
    /// Full width of the frequency window in rad/s, centred on `omega0`.
    pub frequency_window: f64,
    pub source_site: usize,
    pub geometry_metadata: String,
}

impl Default for CavityConfig {
    fn default() -> Self {
        let scale = PhysicalScale::default();
        Self {
            scale,
            n_positions_per_cavity: 7,
            n_frequencies: 31,
            frequency_window: 8.0 * scale.kappa.abs(),
            source_site: SITE_A,
            geometry_metadata: String::from("cavity height 110 mm, side 44 mm, coupling hole 17 mm^2"),
        }
    }
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        self.scale.validate()?;
        if self.n_positions_per_cavity < 2 {
            return Err(Error::InvalidInput("n_positions_per_cavity must be at least 2".into()));
        }
        if self.n_frequencies < 7 {
            return Err(Error::InvalidInput("n_frequencies must be at least 7".into()));
        }
        if !(self.frequency_window > 0.0) || !self.frequency_window.is_finite() {
            return Err(Error::InvalidInput("frequency_window must be positive".into()));
        }
        if self.source_site > 2 {
            return Err(Error::InvalidInput("source_site must be 0, 1 or 2".into()));
        }
        Ok(())
    }

    pub fn n_positions(&self) -> usize {
        3 * self.n_positions_per_cavity
    }

    /// Probe frequencies in rad/s.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n_frequencies;
        let lo = self.scale.omega0 - self.frequency_window / 2.0;
        (0..n).map(|i| lo + self.frequency_window * i as f64 / (n - 1) as f64).collect()
    }

    pub fn frequency_spacing(&self) -> f64 {
        self.frequency_window / (self.n_frequencies - 1) as f64
    }

    /// `(site, height sample)` of position `m`.
    pub fn position(&self, m: usize) -> (usize, usize) {
        (m / self.n_positions_per_cavity, m % self.n_positions_per_cavity)
    }
}

/// Onsite mode sampled at the probe heights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub samples: Vec<f64>,
}

impl ModeProfile {
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<bool> = self.samples.iter().filter(|v| **v != 0.0).map(|v| *v > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Sample at the top of the cavity, where the source sits.
    pub fn top(&self) -> f64 {
        self.samples.last().copied().unwrap_or(0.0)
    }
}

/// `cos(2πz/h)` at `z_k = (k - 1/2) h / n`, unit norm. At least 5 samples are
/// recommended; fewer than that may alias the two nodal planes.
pub fn onsite_profile(config: &CavityConfig) -> Result<ModeProfile> {
    let n = config.n_positions_per_cavity;
    let raw: Vec<f64> = (1..=n)
        .map(|k| {
            let z = (k as f64 - 0.5) / n as f64;
            let v = (core::f64::consts::TAU * z).cos();
            // cos is not exactly zero at its nodes in floating point
            if v.abs() < 1e-12 {
                0.0
            } else {
                v
            }
        })
        .collect();
    let norm = linalg::norm_real(&raw);
    if norm == 0.0 {
        return Err(Error::InvalidInput(format!("mode profile with {n} samples vanishes identically")));
    }
    let profile = ModeProfile { samples: raw.iter().map(|v| v / norm).collect() };
    if profile.sign_changes() != 2 {
        return Err(Error::InvalidInput(format!("mode profile with {n} samples has {} sign changes, expected 2", profile.sign_changes())));
    }
    Ok(profile)
}

/// Physical Hamiltonian `(ω0 + iγ0) I + |κ| H̃`.
pub fn physical_hamiltonian(p: &ParamPoint, scale: &PhysicalScale) -> Mat3 {
    let h = model::build_h_ep(p);
    let k = scale.kappa.abs();
    core::array::from_fn(|i| core::array::from_fn(|j| h[i][j] * k + if i == j { scale.center() } else { C0 }))
}

fn physical_eigenvalues(p: &ParamPoint, scale: &PhysicalScale) -> [Complex64; 3] {
    model::eigenvalues(p).map(|w| model::to_physical(w, scale))
}

/// Green's function by eigen-expansion, `Σ_j |R_j⟩⟨L_j| / (ω - ω_j)`.
pub fn greens_3site(omega: Complex64, p: &ParamPoint, scale: &PhysicalScale) -> Result<Mat3> {
    let es = model::eigensystem(p);
    let poles = es.eigenvalues.map(|w| model::to_physical(w, scale));
    check_poles(omega, &poles, scale)?;
    let mut g = [[C0; 3]; 3];
    for j in 0..3 {
        let d = (omega - poles[j]).inv();
        for (a, row) in g.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v += es.right_vectors[j][a] * es.left_vectors[j][b] * d;
            }
        }
    }
    Ok(g)
}

/// Green's function by direct inversion of `ω - H`.
pub fn resolvent(omega: Complex64, p: &ParamPoint, scale: &PhysicalScale) -> Result<Mat3> {
    check_poles(omega, &physical_eigenvalues(p, scale), scale)?;
    let h = physical_hamiltonian(p, scale);
    let a: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| if i == j { omega - h[i][j] } else { -h[i][j] }));
    linalg::inverse3(&a).ok_or(Error::PoleProximity { omega: omega.re, distance: 0.0 })
}

fn check_poles(omega: Complex64, poles: &[Complex64; 3], scale: &PhysicalScale) -> Result<()> {
    let distance = poles.iter().map(|w| (omega - w).norm()).fold(f64::INFINITY, f64::min);
    if distance < 1e-6 * scale.kappa.abs() {
        return Err(Error::PoleProximity { omega: omega.re, distance });
    }
    Ok(())
}

/// Column `source` of the resolvent, by solving `(ω - H) x = e_source`.
pub(crate) fn resolvent_column(omega: Complex64, h: &Mat3, source: usize) -> Option<Vec3> {
    let a: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| if i == j { omega - h[i][j] } else { -h[i][j] }));
    let mut e = [C0; 3];
    e[source] = Complex64::new(1.0, 0.0);
    linalg::solve_complex(a, e)
}

/// Resonance of a single uncoupled cavity: `(ω0 + iγ0) + |κ| H̃_ss`.
pub fn isolated_cavity_pole(site: usize, p: &ParamPoint, scale: &PhysicalScale) -> Result<Complex64> {
    if ![SITE_B, SITE_A, SITE_C].contains(&site) {
        return Err(Error::InvalidInput(format!("no cavity with index {site}")));
    }
    Ok(scale.center() + model::build_h_ep(p)[site][site] * scale.kappa.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    /// Standard deviation of the multiplicative complex noise.
    pub relative_amplitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self { relative_amplitude: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetStep {
    pub param_truth: Option<ParamPoint>,
    /// `responses[position][frequency]`.
    pub responses: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralDataset {
    pub config: CavityConfig,
    pub noise: NoiseSpec,
    pub steps: Vec<DatasetStep>,
}

impl SpectralDataset {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let (np, nf) = (self.config.n_positions(), self.config.n_frequencies);
        for (l, s) in self.steps.iter().enumerate() {
            if s.responses.len() != np || s.responses.iter().any(|r| r.len() != nf) {
                return Err(Error::InvalidInput(format!("step {l}: responses are not {np}×{nf}")));
            }
            if s.responses.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("step {l}: non-finite response")));
            }
        }
        Ok(())
    }
}

/// Random generator for one step: the seed selects the key, the step index
/// the stream, so steps can be synthesised in any order.
pub fn step_rng(seed: u64, step: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step as u64);
    rng
}

/// Noiseless responses of one parameter point.
pub fn forward_responses(p: &ParamPoint, config: &CavityConfig, profile: &ModeProfile) -> Result<Vec<Vec<Complex64>>> {
    let freqs = config.frequencies();
    let h = physical_hamiltonian(p, &config.scale);
    let poles = physical_eigenvalues(p, &config.scale);
    let mut columns = Vec::with_capacity(freqs.len());
    for &w in &freqs {
        let omega = Complex64::new(w, 0.0);
        check_poles(omega, &poles, &config.scale)?;
        let col = resolvent_column(omega, &h, config.source_site).ok_or(Error::PoleProximity { omega: w, distance: 0.0 })?;
        columns.push(col);
    }
    let src = profile.top();
    Ok((0..config.n_positions())
        .map(|m| {
            let (site, k) = config.position(m);
            let weight = profile.samples[k] * src;
            columns.iter().map(|c| c[site] * weight).collect()
        })
        .collect())
}

/// Synthesise a dataset, one step per parameter point.
pub fn synthesize(points: &[ParamPoint], config: &CavityConfig, noise: &NoiseSpec) -> Result<SpectralDataset> {
    config.validate()?;
    if !(noise.relative_amplitude >= 0.0) || !noise.relative_amplitude.is_finite() {
        return Err(Error::InvalidInput("noise amplitude must be a finite non-negative number".into()));
    }
    let profile = onsite_profile(config)?;
    let mut steps = Vec::with_capacity(points.len());
    for (l, p) in points.iter().enumerate() {
        p.validate()?;
        let mut responses = forward_responses(p, config, &profile)?;
        if noise.relative_amplitude > 0.0 {
            let mut rng = step_rng(noise.seed, l);
            let s = noise.relative_amplitude / core::f64::consts::SQRT_2;
            for z in responses.iter_mut().flatten() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *z *= Complex64::new(1.0 + s * re, s * im);
            }
        }
        steps.push(DatasetStep { param_truth: Some(*p), responses });
    }
    Ok(SpectralDataset { config: config.clone(), noise: *noise, steps })
}
