//! Stroboscopic loop transport.
//!
//! Eigenstates are carried around a closed loop by biorthogonal parallel
//! transport: at every step the new eigenvectors are matched to the previous
//! ones by the assignment maximising `Σ |⟨L_i|R_σ(i)⟩|²`, then re-phased so
//! that each matched overlap is real and positive.
//!
//! Two holonomies are reported. [`TransportResult::nabp`] is the path-ordered
//! product of step-transfer matrices whose last step lands on the anchor
//! eigenvectors as first computed; it is a permutation matrix with determinant
//! equal to the permutation's sign. [`TransportResult::frame_holonomy`]
//! compares the transported frame with the anchor frame instead, and carries
//! the accumulated geometric phases.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use num_complex::Complex64;

use crate::ep::{wrap_angle, PERMUTATIONS};
use crate::group::PermutationElement;
use crate::linalg::{self, Mat3, C0};
use crate::model::{self, Eigensystem, ParamPoint};
use crate::{Error, Result};

/// `|Δ|` below which a loop step is considered to sit on an EP.
pub const EP_PROXIMITY: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoopPath {
    pub g: f64,
    pub waypoints: Vec<ParamPoint>,
    pub steps: Vec<ParamPoint>,
    pub label: String,
}

impl LoopPath {
    /// Build a loop from explicit steps (no interpolation).
    pub fn from_steps(steps: Vec<ParamPoint>, label: String) -> Result<Self> {
        let first = *steps.first().ok_or_else(|| Error::InvalidInput("empty loop".into()))?;
        if steps.last() != Some(&first) {
            return Err(Error::InvalidInput("loop is not closed: first and last steps differ".into()));
        }
        if steps.len() < 8 {
            return Err(Error::InvalidInput(format!("loop has {} steps, at least 8 are needed", steps.len())));
        }
        if steps.iter().any(|p| p.g != first.g) {
            return Err(Error::InvalidInput("all loop steps must share g".into()));
        }
        for p in &steps {
            p.validate()?;
        }
        check_ep_distance(&steps)?;
        Ok(Self { g: first.g, waypoints: steps.clone(), steps, label })
    }

    /// Wrap measured or fitted step points without validation; used as
    /// metadata for data-driven transport.
    pub fn measured(steps: Vec<ParamPoint>, label: String) -> Self {
        let g = if steps.is_empty() { 0.0 } else { steps.iter().map(|p| p.g).sum::<f64>() / steps.len() as f64 };
        Self { g, waypoints: Vec::new(), steps, label }
    }

    pub fn anchor(&self) -> ParamPoint {
        self.steps[0]
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut waypoints = self.waypoints.clone();
        waypoints.reverse();
        let mut steps = self.steps.clone();
        steps.reverse();
        Self { g: self.g, waypoints, steps, label: format!("{} (reversed)", self.label) }
    }

    /// This loop traversed `n` times.
    pub fn repeated(&self, n: usize) -> Self {
        let mut out = self.clone();
        for _ in 1..n {
            out.waypoints.extend_from_slice(&self.waypoints[1..]);
            out.steps.extend_from_slice(&self.steps[1..]);
        }
        out.label = format!("{} x{n}", self.label);
        out
    }
}

fn check_ep_distance(steps: &[ParamPoint]) -> Result<()> {
    for (step, p) in steps.iter().enumerate() {
        let residual = model::discriminant(p).norm();
        if residual < EP_PROXIMITY {
            return Err(Error::PathTouchesEp { step, residual });
        }
    }
    Ok(())
}

/// Densify closed waypoints with `steps_per_segment` linear steps per segment.
/// The result has `(n - 1) * steps_per_segment + 1` steps.
pub fn interpolate_loop(waypoints: &[ParamPoint], steps_per_segment: usize, label: String) -> Result<LoopPath> {
    let mut distinct: Vec<ParamPoint> = Vec::new();
    for w in waypoints {
        w.validate()?;
        if !distinct.contains(w) {
            distinct.push(*w);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::InvalidInput(format!("a loop needs at least 3 distinct waypoints, got {}", distinct.len())));
    }
    if waypoints.first() != waypoints.last() {
        return Err(Error::InvalidInput("loop is not closed: first and last waypoints differ".into()));
    }
    if steps_per_segment == 0 {
        return Err(Error::InvalidInput("steps_per_segment must be positive".into()));
    }
    let g = waypoints[0].g;
    if waypoints.iter().any(|p| p.g != g) {
        return Err(Error::InvalidInput("all waypoints must share g".into()));
    }
    let mut steps = Vec::with_capacity((waypoints.len() - 1) * steps_per_segment + 1);
    for pair in waypoints.windows(2) {
        for s in 0..steps_per_segment {
            steps.push(pair[0].lerp(&pair[1], s as f64 / steps_per_segment as f64));
        }
    }
    steps.push(waypoints[0]);
    if steps.len() < 8 {
        return Err(Error::InvalidInput(format!("loop has {} steps, at least 8 are needed", steps.len())));
    }
    check_ep_distance(&steps)?;
    Ok(LoopPath { g, waypoints: waypoints.to_vec(), steps, label })
}

/// Traverse `b` first, then `a`, so that the result realises `a ∘ b`.
pub fn concat_loops(a: &LoopPath, b: &LoopPath) -> Result<LoopPath> {
    if a.anchor() != b.anchor() || a.g != b.g {
        return Err(Error::AnchorMismatch(format!("{:?} vs {:?}", a.anchor(), b.anchor())));
    }
    let mut waypoints = b.waypoints.clone();
    waypoints.extend_from_slice(&a.waypoints[1..]);
    let mut steps = b.steps.clone();
    steps.extend_from_slice(&a.steps[1..]);
    Ok(LoopPath { g: a.g, waypoints, steps, label: format!("{} ∘ {}", a.label, b.label) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    /// Matched overlaps below this flag the result unreliable.
    pub overlap_floor: f64,
    /// Minimum gap in `Σ|O|²` between the best and second-best assignment.
    pub ambiguity_margin: f64,
    pub max_bisections: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { overlap_floor: 0.5, ambiguity_margin: 1e-3, max_bisections: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub loop_path: LoopPath,
    /// Points actually visited, including bisection points.
    pub path: Vec<ParamPoint>,
    /// Transported eigensystems aligned with `path`; band `k` is the
    /// continuation of anchor band `k`.
    pub tracked: Vec<Eigensystem>,
    /// Matched `|⟨L_k(l)|R_k(l+1)⟩|` per step, aligned with `path[1..]`.
    pub step_overlaps: Vec<[f64; 3]>,
    /// Compensated phases per step, aligned with `path[1..]`.
    pub theta_log: Vec<[f64; 3]>,
    pub permutation: PermutationElement,
    pub nabp: Mat3,
    pub frame_holonomy: Mat3,
    pub berry_phase: f64,
    pub min_overlap: f64,
    pub reliable: bool,
    /// Number of bisection points inserted.
    pub refinements: usize,
}

impl TransportResult {
    pub fn nabp_abs(&self) -> [[f64; 3]; 3] {
        self.nabp.map(|r| r.map(|z| z.norm()))
    }

    pub fn nabp_phase(&self) -> [[f64; 3]; 3] {
        self.nabp.map(|r| r.map(|z| z.arg()))
    }

    /// Largest `| |U_ij| - P_ij |` against a permutation pattern.
    pub fn pattern_deviation(&self, p: &PermutationElement) -> f64 {
        abs_pattern_deviation(&self.nabp, p)
    }

    pub fn final_eigenvalues(&self) -> [Complex64; 3] {
        self.tracked.last().map(|e| e.eigenvalues).unwrap_or([C0; 3])
    }
}

pub fn abs_pattern_deviation(u: &Mat3, p: &PermutationElement) -> f64 {
    let m = p.to_matrix();
    (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| (u[i][j].norm() - m[i][j]).abs()).fold(0.0, f64::max)
}

/// NABP of a completed transport; refuses unreliable results.
pub fn nabp(result: &TransportResult) -> Result<Mat3> {
    if !result.reliable {
        return Err(Error::Unreliable { min_overlap: result.min_overlap });
    }
    Ok(result.nabp)
}

/// `Θ = -arg det U`, in `[-π, π)`.
pub fn berry_phase(u: &Mat3) -> Result<f64> {
    let det = linalg::det3(u);
    if !((det.norm() - 1.0).abs() <= 1e-6) {
        return Err(Error::NonUnimodularDeterminant { modulus: det.norm() });
    }
    Ok(wrap_angle(-det.arg()))
}

pub fn transport(loop_path: &LoopPath) -> Result<TransportResult> {
    transport_with(loop_path, &TransportOptions::default(), &model::eigensystem)
}

/// Transport with a caller-supplied eigensystem provider.
pub fn transport_with(
    loop_path: &LoopPath,
    opts: &TransportOptions,
    provider: &dyn Fn(&ParamPoint) -> Eigensystem,
) -> Result<TransportResult> {
    let anchor = provider(&loop_path.anchor()).sorted_by_real();
    let mut walker = Walker::new(anchor, loop_path.anchor(), opts);
    for (l, pair) in loop_path.steps.windows(2).enumerate() {
        walker.advance(pair[0], pair[1], l, 0, provider)?;
    }
    walker.finish(loop_path.clone())
}

/// Transport over precomputed eigensystems, one per loop step, without
/// refinement (the typical case for fitted data).
pub fn transport_sequence(loop_path: &LoopPath, systems: &[Eigensystem], opts: &TransportOptions) -> Result<TransportResult> {
    if systems.len() != loop_path.len() {
        return Err(Error::InvalidInput(format!("{} eigensystems for {} loop steps", systems.len(), loop_path.len())));
    }
    let anchor = systems[0].sorted_by_real();
    let no_refine = TransportOptions { max_bisections: 0, ..*opts };
    let mut walker = Walker::new(anchor, loop_path.anchor(), &no_refine);
    for l in 1..systems.len() {
        walker.step_to(&systems[l], l - 1)?;
    }
    // the loop closes on the anchor data as first seen
    walker.close_on(&systems[0])?;
    walker.finish(loop_path.clone())
}

struct Walker {
    opts: TransportOptions,
    anchor: Eigensystem,
    path: Vec<ParamPoint>,
    tracked: Vec<Eigensystem>,
    overlaps: Vec<[f64; 3]>,
    thetas: Vec<[f64; 3]>,
    refinements: usize,
    closing: Option<Eigensystem>,
}

struct Match {
    assignment: [usize; 3],
    margin: f64,
    overlaps: [Complex64; 3],
}

fn best_assignment(from: &Eigensystem, to: &Eigensystem) -> Match {
    let o = from.overlap(to);
    let mut scored: Vec<([usize; 3], f64)> =
        PERMUTATIONS.iter().map(|p| (*p, (0..3).map(|i| o[i][p[i]].norm_sqr()).sum::<f64>())).collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let assignment = scored[0].0;
    Match { assignment, margin: scored[0].1 - scored[1].1, overlaps: core::array::from_fn(|i| o[i][assignment[i]]) }
}

impl Walker {
    fn new(anchor: Eigensystem, at: ParamPoint, opts: &TransportOptions) -> Self {
        Self {
            opts: *opts,
            path: vec![at],
            tracked: vec![anchor.clone()],
            anchor,
            overlaps: Vec::new(),
            thetas: Vec::new(),
            refinements: 0,
            closing: None,
        }
    }

    fn current(&self) -> &Eigensystem {
        self.tracked.last().expect("walker always holds the anchor")
    }

    fn advance(
        &mut self,
        from: ParamPoint,
        to: ParamPoint,
        step: usize,
        depth: usize,
        provider: &dyn Fn(&ParamPoint) -> Eigensystem,
    ) -> Result<()> {
        let raw = provider(&to);
        let m = best_assignment(self.current(), &raw);
        let weak = m.overlaps.iter().any(|o| o.norm() < self.opts.overlap_floor);
        if (m.margin < self.opts.ambiguity_margin || weak) && depth < self.opts.max_bisections {
            let mid = from.lerp(&to, 0.5);
            let residual = model::discriminant(&mid).norm();
            if residual < EP_PROXIMITY {
                return Err(Error::PathTouchesEp { step, residual });
            }
            self.refinements += 1;
            self.advance(from, mid, step, depth + 1, provider)?;
            return self.advance(mid, to, step, depth + 1, provider);
        }
        if m.margin < self.opts.ambiguity_margin {
            return Err(Error::AmbiguousMatch { step, next: step + 1, depth, margin: m.margin });
        }
        self.accept(to, &raw, &m);
        Ok(())
    }

    fn step_to(&mut self, raw: &Eigensystem, step: usize) -> Result<()> {
        let m = best_assignment(self.current(), raw);
        if m.margin < self.opts.ambiguity_margin {
            return Err(Error::AmbiguousMatch { step, next: step + 1, depth: 0, margin: m.margin });
        }
        self.accept(raw.point, raw, &m);
        Ok(())
    }

    /// Replace the last tracked frame's comparison target by `anchor_raw`,
    /// used when the final step's data is the anchor measurement itself.
    fn close_on(&mut self, anchor_raw: &Eigensystem) -> Result<()> {
        self.closing = Some(anchor_raw.sorted_by_real());
        Ok(())
    }

    fn accept(&mut self, at: ParamPoint, raw: &Eigensystem, m: &Match) {
        let a = m.assignment;
        let mut next = raw.permuted(a);
        let mut thetas = [0.0; 3];
        for k in 0..3 {
            let theta = m.overlaps[k].arg();
            thetas[k] = theta;
            let rot = Complex64::from_polar(1.0, -theta);
            next.right_vectors[k] = linalg::scale(&next.right_vectors[k], rot);
            next.left_vectors[k] = linalg::scale(&next.left_vectors[k], rot.conj());
        }
        self.overlaps.push(m.overlaps.map(|o| o.norm()));
        self.thetas.push(thetas);
        self.path.push(at);
        self.tracked.push(next);
    }

    fn finish(self, loop_path: LoopPath) -> Result<TransportResult> {
        let anchor = self.closing.clone().unwrap_or_else(|| self.anchor.clone());
        let last = self.current();
        // band k of the final frame is anchor band f(k)
        let m = best_assignment(&anchor, last);
        let mut dest = [0usize; 3];
        for (j, &k) in m.assignment.iter().enumerate() {
            dest[k] = j;
        }
        let permutation = PermutationElement::from_dest(dest).expect("assignment is a bijection");

        // path-ordered product; the final factor lands on the anchor vectors
        let n = self.tracked.len();
        let mut u = linalg::identity();
        for l in 0..n - 1 {
            let from = &self.tracked[l];
            let to = &self.tracked[l + 1];
            let factor: Mat3 = if l + 1 == n - 1 {
                core::array::from_fn(|j| core::array::from_fn(|k| linalg::dot(&from.left_vectors[j], &anchor.right_vectors[dest[k]])))
            } else {
                from.overlap(to)
            };
            u = linalg::matmul(&u, &factor);
        }
        let frame_holonomy: Mat3 =
            core::array::from_fn(|j| core::array::from_fn(|k| linalg::dot(&self.anchor.left_vectors[j], &last.right_vectors[k])));
        let berry = berry_phase(&u)?;
        let min_overlap = self.overlaps.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let min_overlap = if min_overlap.is_finite() { min_overlap } else { 1.0 };
        Ok(TransportResult {
            loop_path,
            path: self.path,
            tracked: self.tracked,
            step_overlaps: self.overlaps,
            theta_log: self.thetas,
            permutation,
            nabp: u,
            frame_holonomy,
            berry_phase: berry,
            min_overlap,
            reliable: min_overlap > self.opts.overlap_floor,
            refinements: self.refinements,
        })
    }
}

/// Smallest `n ≥ 1` with `σ^n = e` for the loop's permutation.
pub fn cycles_to_identity(loop_path: &LoopPath) -> Result<u32> {
    Ok(transport(loop_path)?.permutation.order())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vorticity {
    /// 1-based tracked band labels.
    pub pair: (usize, usize),
    pub nu: f64,
    /// Winding of `arg Δ` along the loop.
    pub discriminant_winding: f64,
}

/// `ν_ij = (1/2π) Σ Δ arg(ω_i - ω_j)` over tracked bands, plus the winding of
/// the discriminant as a cross-check.
pub fn eigenvalue_vorticity(result: &TransportResult, pair: (usize, usize)) -> Result<Vorticity> {
    let (i, j) = pair;
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) || i == j {
        return Err(Error::InvalidInput(format!("invalid band pair {pair:?}")));
    }
    let tau = core::f64::consts::TAU;
    let diff_arg = |e: &Eigensystem| (e.eigenvalues[i - 1] - e.eigenvalues[j - 1]).arg();
    let nu: f64 = result.tracked.windows(2).map(|w| wrap_angle(diff_arg(&w[1]) - diff_arg(&w[0]))).sum::<f64>() / tau;
    let disc_arg = |p: &ParamPoint| model::discriminant(p).arg();
    let w: f64 = result.path.windows(2).map(|w| wrap_angle(disc_arg(&w[1]) - disc_arg(&w[0]))).sum::<f64>() / tau;
    Ok(Vorticity { pair, nu, discriminant_winding: w })
}

/// All three pairwise vorticities, in the order (1,2), (1,3), (2,3).
pub fn all_vorticities(result: &TransportResult) -> [Vorticity; 3] {
    [(1, 2), (1, 3), (2, 3)].map(|p| eigenvalue_vorticity(result, p).expect("static pairs are valid"))
}

/// A change of the `Re ω` ranking of the tracked bands between two
/// consecutive visited points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeEvent {
    /// Index into `TransportResult::path` of the point after the change.
    pub index: usize,
    pub at: ParamPoint,
    /// Rank rearrangement as a permutation of positions.
    pub exchange: PermutationElement,
}

fn re_ranks(e: &Eigensystem) -> [usize; 3] {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let (x, y) = (e.eigenvalues[a], e.eigenvalues[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    let mut rank = [0usize; 3];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r;
    }
    rank
}

/// Exchange events along a transport; their composition in order equals the
/// loop's permutation.
pub fn exchange_events(result: &TransportResult) -> Vec<ExchangeEvent> {
    let mut out = Vec::new();
    let mut prev = re_ranks(&result.tracked[0]);
    for (idx, e) in result.tracked.iter().enumerate().skip(1) {
        let rank = re_ranks(e);
        if rank != prev {
            let before = PermutationElement::from_dest(prev).expect("ranks are a bijection");
            let after = PermutationElement::from_dest(rank).expect("ranks are a bijection");
            out.push(ExchangeEvent { index: idx, at: result.path[idx], exchange: after.compose(&before.inverse()) });
            prev = rank;
        }
    }
    out
}

pub fn compose_events(events: &[ExchangeEvent]) -> PermutationElement {
    events.iter().fold(PermutationElement::IDENTITY, |acc, e| e.exchange.compose(&acc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mu2Report {
    pub eta: f64,
    pub permutation: PermutationElement,
    pub events: Vec<ExchangeEvent>,
    pub composed: PermutationElement,
    pub berry_phase: f64,
    pub min_overlap: f64,
}

/// Run the built-in `μ2` loop at the given `eta`.
pub fn mu2_decomposition_run(eta: f64, steps_per_segment: usize) -> Result<Mu2Report> {
    use crate::scenarios;
    let loop_path = scenarios::planar_loop(eta, scenarios::G, &scenarios::MU2_LOOP, steps_per_segment, "mu2")?;
    let result = transport(&loop_path)?;
    let events = exchange_events(&result);
    Ok(Mu2Report {
        eta,
        permutation: result.permutation,
        composed: compose_events(&events),
        events,
        berry_phase: result.berry_phase,
        min_overlap: result.min_overlap,
    })
}
