//! Serializable reports. Field order is fixed by the struct definitions, so
//! identical inputs give byte-identical JSON.

use std::collections::BTreeMap;

use exarc_core::ep::{ArcPairing, EaPolyline, Termination};
use exarc_core::group::{self, D3Label, PermutationElement};
use exarc_core::lab::{FitWarning, FittedParams, LoopFit, NoiseSpec};
use exarc_core::linalg::Mat3;
use exarc_core::transport::{self, TransportResult, Vorticity};
use exarc_core::{Complex64, ParamPoint, PhysicalScale};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventReport {
    pub index: usize,
    pub at: ParamPoint,
    pub exchange: PermutationElement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub label: String,
    pub g: f64,
    pub anchor: ParamPoint,
    pub n_steps: usize,
    pub permutation: PermutationElement,
    pub d3: D3Label,
    pub cycles_to_identity: u32,
    pub nabp: Mat3,
    pub nabp_abs: [[f64; 3]; 3],
    pub nabp_phase: [[f64; 3]; 3],
    pub pattern_deviation: f64,
    pub theta: f64,
    /// `arg` of the diagonal of the band-frame holonomy.
    pub frame_phases: [f64; 3],
    pub min_overlap: f64,
    pub reliable: bool,
    pub refinements: usize,
    pub vorticities: Vec<Vorticity>,
    pub exchange_events: Vec<EventReport>,
    pub events_composed: PermutationElement,
    pub path: Vec<ParamPoint>,
    pub tracked_eigenvalues: Vec<[Complex64; 3]>,
    pub step_overlaps: Vec<[f64; 3]>,
}

impl LoopReport {
    pub fn new(r: &TransportResult) -> Self {
        let events = transport::exchange_events(r);
        Self {
            label: r.loop_path.label.clone(),
            g: r.loop_path.g,
            anchor: r.loop_path.anchor(),
            n_steps: r.loop_path.len(),
            permutation: r.permutation,
            d3: r.permutation.identify(),
            cycles_to_identity: r.permutation.order(),
            nabp: r.nabp,
            nabp_abs: r.nabp_abs(),
            nabp_phase: r.nabp_phase(),
            pattern_deviation: r.pattern_deviation(&r.permutation),
            theta: r.berry_phase,
            frame_phases: core::array::from_fn(|k| r.frame_holonomy[k][k].arg()),
            min_overlap: r.min_overlap,
            reliable: r.reliable,
            refinements: r.refinements,
            vorticities: transport::all_vorticities(r).to_vec(),
            events_composed: transport::compose_events(&events),
            exchange_events: events.iter().map(|e| EventReport { index: e.index, at: e.at, exchange: e.exchange }).collect(),
            path: r.path.clone(),
            tracked_eigenvalues: r.tracked.iter().map(|e| e.eigenvalues).collect(),
            step_overlaps: r.step_overlaps.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcPointReport {
    pub eta: f64,
    pub zeta: f64,
    pub xi: f64,
    pub re_omega: f64,
    pub im_omega: f64,
    pub order: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcReport {
    pub closed: bool,
    pub start_termination: Termination,
    pub end_termination: Termination,
    pub points: Vec<ArcPointReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EaReport {
    pub g: f64,
    pub pairing: ArcPairing,
    pub n_arcs: usize,
    pub arcs: Vec<ArcReport>,
}

impl EaReport {
    pub fn new(g: f64, arcs: &[EaPolyline], pairing: ArcPairing) -> Self {
        let arcs: Vec<ArcReport> = arcs
            .iter()
            .map(|a| ArcReport {
                closed: a.closed,
                start_termination: a.start_termination,
                end_termination: a.end_termination,
                points: a
                    .points
                    .iter()
                    .map(|p| ArcPointReport {
                        eta: p.point.eta,
                        zeta: p.point.zeta,
                        xi: p.point.xi,
                        re_omega: p.repeated_eigenvalue.re,
                        im_omega: p.repeated_eigenvalue.im,
                        order: p.order,
                    })
                    .collect(),
            })
            .collect();
        Self { g, pairing, n_arcs: arcs.len(), arcs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupCheck {
    pub elements: Vec<D3Label>,
    pub passes: bool,
    pub order: Option<usize>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTableReport {
    pub elements: Vec<D3Label>,
    pub permutations: Vec<PermutationElement>,
    pub matrices: BTreeMap<String, [[f64; 3]; 3]>,
    /// `cayley[a][b]` labels `a ∘ b`.
    pub cayley: Vec<Vec<D3Label>>,
    pub orders: Vec<u32>,
    pub is_d3: bool,
    pub is_abelian: bool,
    pub witness: Option<(D3Label, D3Label)>,
    pub subgroups: Vec<SubgroupCheck>,
    pub table: String,
}

impl GroupTableReport {
    pub fn build() -> exarc_core::Result<Self> {
        let elements = D3Label::ALL;
        let perms = elements.map(|l| l.element());
        let report = group::verify_group(&perms)?;
        let cayley = report.cayley.iter().map(|row| row.iter().map(|&k| report.elements[k].identify()).collect()).collect();
        let (mu1, mu3) = (D3Label::Mu1, D3Label::Mu3);
        let witness = if mu1.element().compose(&mu3.element()) != mu3.element().compose(&mu1.element()) {
            Some((mu1, mu3))
        } else {
            report.witness.map(|(a, b)| (a.identify(), b.identify()))
        };
        let candidates: [&[D3Label]; 4] = [
            &[D3Label::E, D3Label::Rho1, D3Label::Rho2],
            &[D3Label::E, D3Label::Mu1],
            &[D3Label::E, D3Label::Mu1, D3Label::Mu3],
            &D3Label::ALL,
        ];
        let subgroups = candidates
            .iter()
            .map(|set| {
                let els: Vec<PermutationElement> = set.iter().map(|l| l.element()).collect();
                match group::verify_group(&els) {
                    Ok(r) => SubgroupCheck { elements: set.to_vec(), passes: true, order: Some(r.order()), detail: None },
                    Err(e) => SubgroupCheck { elements: set.to_vec(), passes: false, order: None, detail: Some(e.to_string()) },
                }
            })
            .collect();
        Ok(Self {
            elements: elements.to_vec(),
            permutations: perms.to_vec(),
            matrices: elements.iter().map(|l| (l.name().to_string(), l.element().to_matrix())).collect(),
            cayley,
            orders: report.orders.clone(),
            is_d3: report.is_d3(),
            is_abelian: report.is_abelian,
            witness,
            subgroups,
            table: cayley_text(&elements),
        })
    }
}

/// Plain-text Cayley table; row `a`, column `b` holds `a ∘ b`.
pub fn cayley_text(elements: &[D3Label]) -> String {
    let mut out = format!("{:>6} |", "∘");
    for b in elements {
        out += &format!("{:>6}", b.name());
    }
    out += &format!("\n{}\n", "-".repeat(8 + 6 * elements.len()));
    for a in elements {
        out += &format!("{:>6} |", a.name());
        for b in elements {
            out += &format!("{:>6}", a.element().compose(&b.element()).identify().name());
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFitReport {
    pub step: usize,
    pub truth: Option<ParamPoint>,
    pub fit: ParamPoint,
    /// Largest absolute error over `(eta, zeta, xi, g)`, when the truth is known.
    pub max_param_error: Option<f64>,
    pub scale: PhysicalScale,
    pub eigenvalues: [Complex64; 3],
    pub residual: f64,
    pub warnings: Vec<FitWarning>,
}

impl StepFitReport {
    pub fn new(step: usize, truth: Option<ParamPoint>, f: &FittedParams) -> Self {
        Self {
            step,
            truth,
            fit: f.point,
            max_param_error: truth.map(|t| param_error(&f.point, &t)),
            scale: f.scale,
            eigenvalues: f.eigenvalues,
            residual: f.residual,
            warnings: f.warnings.clone(),
        }
    }
}

pub fn param_error(a: &ParamPoint, b: &ParamPoint) -> f64 {
    [a.eta - b.eta, a.zeta - b.zeta, a.xi - b.xi, a.g - b.g].iter().fold(0.0, |m, d| m.max(d.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSummary {
    pub truth: PhysicalScale,
    /// Median of the fitted constants over all steps.
    pub fitted_median: PhysicalScale,
    pub max_relative_error: f64,
}

impl ScaleSummary {
    pub fn new(truth: PhysicalScale, fits: &[FittedParams]) -> Option<Self> {
        if fits.is_empty() {
            return None;
        }
        let median = |f: fn(&PhysicalScale) -> f64| {
            let mut v: Vec<f64> = fits.iter().map(|x| f(&x.scale)).collect();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let fitted = PhysicalScale { omega0: median(|s| s.omega0), gamma0: median(|s| s.gamma0), kappa: median(|s| s.kappa) };
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let max_relative_error = rel(fitted.omega0, truth.omega0).max(rel(fitted.gamma0, truth.gamma0)).max(rel(fitted.kappa, truth.kappa));
        Some(Self { truth, fitted_median: fitted, max_relative_error })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub noise: NoiseSpec,
    pub n_steps: usize,
    pub steps: Vec<StepFitReport>,
    pub max_residual: f64,
    pub scale: Option<ScaleSummary>,
    /// Transport of the fitted eigenvectors, when the dataset is a loop.
    pub transport: Option<LoopReport>,
}

impl FitReport {
    pub fn new(
        noise: NoiseSpec,
        truth: PhysicalScale,
        truths: &[Option<ParamPoint>],
        fits: &[FittedParams],
        transport: Option<&TransportResult>,
    ) -> Self {
        let steps: Vec<StepFitReport> = fits.iter().zip(truths).enumerate().map(|(l, (f, t))| StepFitReport::new(l, *t, f)).collect();
        Self {
            noise,
            n_steps: steps.len(),
            max_residual: fits.iter().map(|f| f.residual).fold(0.0, f64::max),
            scale: ScaleSummary::new(truth, fits),
            transport: transport.map(LoopReport::new),
            steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub fitted_permutation: PermutationElement,
    pub analytic_permutation: PermutationElement,
    pub permutation_matches: bool,
    pub fitted_theta: f64,
    pub analytic_theta: f64,
    pub theta_error: f64,
    pub nabp_abs_max_difference: f64,
    pub max_param_error: f64,
    pub median_param_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub label: String,
    pub comparison: Comparison,
    pub fit: FitReport,
    pub analytic: LoopReport,
}

impl PipelineReport {
    pub fn new(noise: NoiseSpec, truth: PhysicalScale, truths: &[ParamPoint], fitted: &LoopFit, analytic: &TransportResult) -> Self {
        let mut errors: Vec<f64> = fitted.fits.iter().zip(truths).map(|(f, t)| param_error(&f.point, t)).collect();
        errors.sort_by(f64::total_cmp);
        let (fa, aa) = (fitted.transport.nabp_abs(), analytic.nabp_abs());
        let comparison = Comparison {
            fitted_permutation: fitted.transport.permutation,
            analytic_permutation: analytic.permutation,
            permutation_matches: fitted.transport.permutation == analytic.permutation,
            fitted_theta: fitted.transport.berry_phase,
            analytic_theta: analytic.berry_phase,
            theta_error: exarc_core::ep::wrap_angle(fitted.transport.berry_phase - analytic.berry_phase).abs(),
            nabp_abs_max_difference: (0..9).map(|k| (fa[k / 3][k % 3] - aa[k / 3][k % 3]).abs()).fold(0.0, f64::max),
            max_param_error: errors.last().copied().unwrap_or(0.0),
            median_param_error: errors.get(errors.len() / 2).copied().unwrap_or(0.0),
        };
        let truths: Vec<Option<ParamPoint>> = truths.iter().copied().map(Some).collect();
        Self {
            label: analytic.loop_path.label.clone(),
            comparison,
            fit: FitReport::new(noise, truth, &truths, &fitted.fits, Some(&fitted.transport)),
            analytic: LoopReport::new(analytic),
        }
    }
}
