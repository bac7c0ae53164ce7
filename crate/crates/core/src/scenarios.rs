//! Built-in loops in the `(zeta, xi)` plane.
//!
//! Waypoints are listed as `(zeta, xi)` pairs; `eta` and `g` are supplied when
//! a loop is built.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::ParamPoint;
use crate::transport::{concat_loops, interpolate_loop, LoopPath};
use crate::Result;

/// Gain/loss contrast used by all built-in scenarios.
pub const G: f64 = 0.61;
/// Slice of the two-rectangle loops.
pub const ETA_LOOPS: f64 = 0.33;
/// Shift that separates the three exchanges of the `μ2` loop.
pub const ETA_MU2_SHIFTED: f64 = 0.055;
pub const STEPS_PER_SEGMENT: usize = 10;

/// `ρ1` loop: the positive rectangle first, then the negative one.
pub const RHO1_LOOP: [(f64, f64); 17] = [
    (0.00, 0.00),
    (0.16, 0.00),
    (0.54, 0.00),
    (0.54, 0.35),
    (0.54, 0.51),
    (0.16, 0.51),
    (0.00, 0.50),
    (0.00, 0.30),
    (0.00, 0.00),
    (-0.40, 0.00),
    (-0.60, 0.00),
    (-0.60, -0.16),
    (-0.60, -0.44),
    (-0.36, -0.41),
    (0.00, -0.46),
    (0.00, -0.26),
    (0.00, 0.00),
];

/// `ρ2` loop: the negative rectangle first, then the positive one.
pub const RHO2_LOOP: [(f64, f64); 17] = [
    (0.00, 0.00),
    (-0.40, 0.00),
    (-0.60, 0.00),
    (-0.60, -0.16),
    (-0.60, -0.44),
    (-0.37, -0.42),
    (0.00, -0.43),
    (0.00, -0.27),
    (0.00, 0.00),
    (0.16, 0.00),
    (0.55, 0.00),
    (0.55, 0.29),
    (0.55, 0.51),
    (0.16, 0.50),
    (0.00, 0.50),
    (0.00, 0.33),
    (0.00, 0.00),
];

/// `μ2` loop around both EPs of the `eta = 0` slice.
pub const MU2_LOOP: [(f64, f64); 9] = [
    (-0.22, -0.46),
    (-0.20, 0.00),
    (-0.21, 0.44),
    (-0.57, 0.40),
    (-0.79, 0.40),
    (-0.79, 0.00),
    (-0.81, -0.44),
    (-0.61, -0.45),
    (-0.22, -0.46),
];

/// Rectangle enclosing both arcs of the `eta = 0.33` slice.
pub const BIG_LOOP: [(f64, f64); 5] = [(-0.7, -0.6), (0.7, -0.6), (0.7, 0.6), (-0.7, 0.6), (-0.7, -0.6)];

/// A second loop around the negative EP only, anchored at the origin.
pub const ALPHA_ALT_LOOP: [(f64, f64); 5] = [(0.0, 0.0), (-0.75, 0.0), (-0.75, -0.6), (0.0, -0.6), (0.0, 0.0)];

/// Small loop enclosing no EP.
pub const TRIVIAL_LOOP: [(f64, f64); 5] = [(0.1, -0.1), (0.2, -0.1), (0.2, 0.1), (0.1, 0.1), (0.1, -0.1)];

/// First half of [`RHO1_LOOP`], the positive rectangle as listed.
pub fn rho1_positive_leg() -> &'static [(f64, f64)] {
    &RHO1_LOOP[..9]
}

/// Second half of [`RHO1_LOOP`], around the negative EP.
pub fn rho1_negative_leg() -> &'static [(f64, f64)] {
    &RHO1_LOOP[8..]
}

/// First half of [`RHO2_LOOP`], around the negative EP.
pub fn rho2_negative_leg() -> &'static [(f64, f64)] {
    &RHO2_LOOP[..9]
}

/// Second half of [`RHO2_LOOP`], around the positive EP.
pub fn rho2_positive_leg() -> &'static [(f64, f64)] {
    &RHO2_LOOP[8..]
}

pub fn waypoints(eta: f64, g: f64, zeta_xi: &[(f64, f64)]) -> Vec<ParamPoint> {
    zeta_xi.iter().map(|&(zeta, xi)| ParamPoint { eta, zeta, xi, g }).collect()
}

/// Interpolated loop at fixed `eta` and `g`.
pub fn planar_loop(eta: f64, g: f64, zeta_xi: &[(f64, f64)], steps_per_segment: usize, label: &str) -> Result<LoopPath> {
    interpolate_loop(&waypoints(eta, g, zeta_xi), steps_per_segment, String::from(label))
}

/// Named built-in loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Preset {
    /// Negative rectangle of the `ρ1` loop, around the negative EP.
    Mu1,
    /// Positive rectangle of the `ρ2` loop, around the positive EP.
    Mu3,
    /// Positive rectangle of the `ρ1` loop as listed; it passes just inside
    /// the positive EP and encloses nothing.
    Mu3Literal,
    /// `μ3` first, then `μ1`.
    Rho1,
    /// [`RHO1_LOOP`] as listed.
    Rho1Literal,
    /// [`RHO2_LOOP`] as listed.
    Rho2,
    /// [`MU2_LOOP`] at `eta = 0`.
    Mu2,
    /// [`MU2_LOOP`] at `eta = ETA_MU2_SHIFTED`.
    Mu2Shifted,
    Big,
    Trivial,
    /// A second loop around the negative EP only.
    AlphaAlt,
}

impl Preset {
    pub const ALL: [Preset; 11] = [
        Preset::Mu1,
        Preset::Mu3,
        Preset::Mu3Literal,
        Preset::Rho1,
        Preset::Rho1Literal,
        Preset::Rho2,
        Preset::Mu2,
        Preset::Mu2Shifted,
        Preset::Big,
        Preset::Trivial,
        Preset::AlphaAlt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mu1 => "mu1",
            Preset::Mu3 => "mu3",
            Preset::Mu3Literal => "mu3-literal",
            Preset::Rho1 => "rho1",
            Preset::Rho1Literal => "rho1-literal",
            Preset::Rho2 => "rho2",
            Preset::Mu2 => "mu2",
            Preset::Mu2Shifted => "mu2-shifted",
            Preset::Big => "big",
            Preset::Trivial => "trivial",
            Preset::AlphaAlt => "alpha-alt",
        }
    }

    pub fn build(self, steps_per_segment: usize) -> Result<LoopPath> {
        let at = |zx: &[(f64, f64)]| planar_loop(ETA_LOOPS, G, zx, steps_per_segment, self.name());
        match self {
            Preset::Mu1 => at(rho1_negative_leg()),
            Preset::Mu3 => at(rho2_positive_leg()),
            Preset::Mu3Literal => at(rho1_positive_leg()),
            Preset::Rho1 => {
                let mu1 = Preset::Mu1.build(steps_per_segment)?;
                let mu3 = Preset::Mu3.build(steps_per_segment)?;
                let mut l = concat_loops(&mu1, &mu3)?;
                l.label = String::from(self.name());
                Ok(l)
            }
            Preset::Rho1Literal => at(&RHO1_LOOP),
            Preset::Rho2 => at(&RHO2_LOOP),
            Preset::Mu2 => planar_loop(0.0, G, &MU2_LOOP, steps_per_segment, self.name()),
            Preset::Mu2Shifted => planar_loop(ETA_MU2_SHIFTED, G, &MU2_LOOP, steps_per_segment, self.name()),
            Preset::Big => at(&BIG_LOOP),
            Preset::Trivial => at(&TRIVIAL_LOOP),
            Preset::AlphaAlt => at(&ALPHA_ALT_LOOP),
        }
    }
}

impl core::fmt::Display for Preset {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| crate::Error::InvalidInput(alloc::format!("unknown preset {s:?}")))
    }
}
