//! JSON loop configuration.
//!
//! ```json
//! {
//!   "label": "my loop",
//!   "g": 0.61,
//!   "eta_mode": "fixed",
//!   "waypoints": [[0.33, -0.6, -0.16], [0.33, -0.3, -0.16], ...],
//!   "steps_per_segment": 10
//! }
//! ```
//!
//! Waypoints are `[eta, zeta, xi]` and the list must close on itself. With
//! `eta_mode = "fixed"` every waypoint must share one `eta`.

use std::path::Path;

use exarc_core::scenarios::{Preset, STEPS_PER_SEGMENT};
use exarc_core::transport::{self, LoopPath};
use exarc_core::ParamPoint;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EtaMode {
    #[default]
    Fixed,
    PerPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub label: String,
    pub g: f64,
    #[serde(default)]
    pub eta_mode: EtaMode,
    pub waypoints: Vec<[f64; 3]>,
    #[serde(default)]
    pub steps_per_segment: Option<usize>,
}

impl LoopConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("loop config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.waypoints.len() < 3 {
            return Err(CliError::Config("a loop needs at least 3 waypoints".into()));
        }
        if self.eta_mode == EtaMode::Fixed {
            let eta = self.waypoints[0][0];
            if let Some(w) = self.waypoints.iter().find(|w| w[0] != eta) {
                return Err(CliError::Config(format!("eta_mode is fixed but waypoint {w:?} has eta != {eta}")));
            }
        }
        if self.steps_per_segment == Some(0) {
            return Err(CliError::Config("steps_per_segment must be positive".into()));
        }
        Ok(())
    }

    /// Build the loop; `override_steps` wins over the file's value.
    pub fn build(&self, override_steps: Option<usize>) -> CliResult<LoopPath> {
        let steps = override_steps.or(self.steps_per_segment).unwrap_or(STEPS_PER_SEGMENT);
        let points: Vec<ParamPoint> =
            self.waypoints.iter().map(|w| ParamPoint::new(w[0], w[1], w[2], self.g)).collect::<exarc_core::Result<_>>()?;
        Ok(transport::interpolate_loop(&points, steps, self.label.clone())?)
    }
}

/// Where a loop comes from on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopSource {
    Preset(Preset),
    Config(LoopConfig),
}

impl LoopSource {
    pub fn resolve(preset: Option<&str>, config: Option<&Path>) -> CliResult<Self> {
        match (preset, config) {
            (Some(_), Some(_)) => Err(CliError::Config("give either --preset or --config, not both".into())),
            (Some(name), None) => Ok(LoopSource::Preset(name.parse()?)),
            (None, Some(path)) => Ok(LoopSource::Config(LoopConfig::from_path(path)?)),
            (None, None) => Err(CliError::Config("a loop needs --preset or --config".into())),
        }
    }

    pub fn build(&self, steps_per_segment: Option<usize>) -> CliResult<LoopPath> {
        match self {
            LoopSource::Preset(p) => {
                let steps = steps_per_segment.unwrap_or(STEPS_PER_SEGMENT);
                if steps == 0 {
                    return Err(CliError::Config("steps_per_segment must be positive".into()));
                }
                Ok(p.build(steps)?)
            }
            LoopSource::Config(c) => c.build(steps_per_segment),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            LoopSource::Preset(p) => serde_json::json!({ "preset": p.name() }),
            LoopSource::Config(c) => serde_json::to_value(c).expect("config serializes"),
        }
    }
}

/// Parse `NxM` (or a single `N` for a square grid).
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad grid size {t:?}: {e}"));
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => parse(s).map(|n| (n, n)),
    }
}
