//! Command implementations. Each writes its outputs plus `manifest.json`
//! into the output directory and returns the primary output path.

use std::path::{Path, PathBuf};

use exarc_core::ep::{self, SliceGrid, TraceOptions};
use exarc_core::lab::{self, CavityConfig, FitBox, FitOptions, NoiseSpec};
use exarc_core::transport;
use log::{info, warn};
use serde::Serialize;

use crate::config::LoopSource;
use crate::error::{CliError, CliResult};
use crate::io::{output_path, read_dataset, write_dataset, write_json};
use crate::manifest::Manifest;
use crate::report::{EaReport, FitReport, GroupTableReport, LoopReport, PipelineReport};
use crate::surface;

pub const MANIFEST: &str = "manifest.json";

fn finish(out: &Path, command: &str, config: serde_json::Value, seed: Option<u64>, outputs: &[&str]) -> CliResult<()> {
    write_json(&output_path(out, MANIFEST)?, &Manifest::new(command, config, seed, outputs))
}

fn write_report<T: Serialize>(out: &Path, name: &str, report: &T) -> CliResult<PathBuf> {
    let path = output_path(out, name)?;
    write_json(&path, report)?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceArgs {
    pub eta: f64,
    pub g: f64,
    pub grid: SliceGrid,
}

pub fn surface(args: &SurfaceArgs, out: &Path) -> CliResult<PathBuf> {
    let points = surface::compute(args.eta, args.g, &args.grid)?;
    let minima = surface::disc_minima(&points, &args.grid);
    info!("{} nodes, {} local minima of |Δ|", points.len(), minima.len());
    for m in &minima {
        info!("  |Δ| = {:.3e} at zeta = {:.4}, xi = {:.4}", m.abs_disc, m.zeta, m.xi);
    }
    let path = output_path(out, "surface.csv")?;
    surface::write_csv_file(&path, &points)?;
    finish(out, "surface", serde_json::to_value(args).expect("args serialize"), None, &["surface.csv"])?;
    Ok(path)
}

pub fn run_loop(source: &LoopSource, steps_per_segment: Option<usize>, out: &Path) -> CliResult<PathBuf> {
    let l = source.build(steps_per_segment)?;
    let r = transport::transport(&l)?;
    if !r.reliable {
        warn!("transport is unreliable: min overlap {:.3}", r.min_overlap);
    }
    let report = LoopReport::new(&r);
    info!("{}: permutation {} ({}), theta = {:.6}", report.label, report.permutation, report.d3, report.theta);
    let path = write_report(out, "loop_report.json", &report)?;
    let config = serde_json::json!({ "source": source.to_json(), "steps_per_segment": steps_per_segment });
    finish(out, "loop", config, None, &["loop_report.json"])?;
    Ok(path)
}

pub fn ea(g: f64, out: &Path) -> CliResult<PathBuf> {
    if !g.is_finite() {
        return Err(CliError::Config("g must be finite".into()));
    }
    let opts = TraceOptions::default();
    let arcs = ep::trace_all_arcs(g, &opts)?;
    let pairing = ep::classify_pairing(&arcs);
    let report = EaReport::new(g, &arcs, pairing);
    info!("g = {g}: {} arcs, pairing {:?}", report.n_arcs, pairing);
    let path = write_report(out, "ea_report.json", &report)?;
    finish(out, "ea", serde_json::json!({ "g": g, "trace": format!("{opts:?}") }), None, &["ea_report.json"])?;
    Ok(path)
}

pub fn group(out: &Path) -> CliResult<(PathBuf, GroupTableReport)> {
    let report = GroupTableReport::build()?;
    let path = write_report(out, "group_report.json", &report)?;
    finish(out, "group", serde_json::Value::Null, None, &["group_report.json"])?;
    Ok((path, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabArgs {
    pub source: LoopSource,
    pub steps_per_segment: Option<usize>,
    pub noise: f64,
    pub seed: u64,
}

impl LabArgs {
    fn noise_spec(&self) -> CliResult<NoiseSpec> {
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(CliError::Config(format!("noise must be a non-negative number, got {}", self.noise)));
        }
        Ok(NoiseSpec { relative_amplitude: self.noise, seed: self.seed })
    }

    fn config_json(&self) -> serde_json::Value {
        serde_json::json!({
            "source": self.source.to_json(),
            "steps_per_segment": self.steps_per_segment,
            "noise": self.noise,
        })
    }
}

pub fn lab_synth(args: &LabArgs, out: &Path) -> CliResult<PathBuf> {
    let l = args.source.build(args.steps_per_segment)?;
    let ds = lab::synthesize(&l.steps, &CavityConfig::default(), &args.noise_spec()?)?;
    info!("synthesised {} steps", ds.steps.len());
    let path = output_path(out, "dataset.json")?;
    write_dataset(&path, &ds)?;
    finish(out, "lab synth", args.config_json(), Some(args.seed), &["dataset.json"])?;
    Ok(path)
}

pub fn lab_fit(dataset: &Path, seed: u64, out: &Path) -> CliResult<PathBuf> {
    let ds = read_dataset(dataset)?;
    let fit_box = FitBox::around(&ds.config.scale);
    let opts = FitOptions { seed, ..Default::default() };
    let truths: Vec<_> = ds.steps.iter().map(|s| s.param_truth).collect();
    let report = if ds.steps.len() >= 8 {
        let lf = lab::fit_loop(&ds, &fit_box, &opts)?;
        FitReport::new(ds.noise, ds.config.scale, &truths, &lf.fits, Some(&lf.transport))
    } else {
        let fits = lab::fit_steps(&ds, &fit_box, &opts)?;
        FitReport::new(ds.noise, ds.config.scale, &truths, &fits, None)
    };
    info!("fitted {} steps, max residual {:.3e}", report.n_steps, report.max_residual);
    let path = write_report(out, "fit_report.json", &report)?;
    let config = serde_json::json!({ "dataset": dataset.display().to_string() });
    finish(out, "lab fit", config, Some(seed), &["fit_report.json"])?;
    Ok(path)
}

pub fn lab_pipeline(args: &LabArgs, out: &Path) -> CliResult<PathBuf> {
    let l = args.source.build(args.steps_per_segment)?;
    let config = CavityConfig::default();
    let ds = lab::synthesize(&l.steps, &config, &args.noise_spec()?)?;
    let opts = FitOptions { seed: args.seed, ..Default::default() };
    let fitted = lab::fit_loop(&ds, &FitBox::around(&config.scale), &opts)?;
    let analytic = transport::transport(&l)?;
    let report = PipelineReport::new(ds.noise, config.scale, &l.steps, &fitted, &analytic);
    let c = &report.comparison;
    info!(
        "{}: fitted {} vs analytic {}, theta {:.4} vs {:.4}, median parameter error {:.2e}",
        report.label, c.fitted_permutation, c.analytic_permutation, c.fitted_theta, c.analytic_theta, c.median_param_error
    );
    let path = write_report(out, "pipeline_report.json", &report)?;
    finish(out, "lab pipeline", args.config_json(), Some(args.seed), &["pipeline_report.json"])?;
    Ok(path)
}
