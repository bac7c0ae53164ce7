//! Exceptional points and exceptional arcs.
//!
//! EPs are the common zeros of `Re Δ` and `Im Δ`. In a fixed-`eta` slice
//! they are isolated points; in `(eta, zeta, xi)` at fixed `g` they form
//! curves, which [`trace_ea`] follows by predictor-corrector continuation.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::linalg;
use crate::model::{self, ParamPoint};
use crate::{Error, Result};

/// Tolerance on `|p'(ω*)|` and `|p''(ω*)|` for an order-3 EP.
pub const ORDER3_TOL: f64 = 1e-6;
/// `|Δ|` below which a point counts as an EP.
pub const EP_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpPoint {
    pub point: ParamPoint,
    pub repeated_eigenvalue: Complex64,
    pub order: u8,
    pub residual: f64,
}

/// Rectangular node grid over `(zeta, xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceGrid {
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_zeta: usize,
    pub n_xi: usize,
}

impl SliceGrid {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { zeta_min: -half_width, zeta_max: half_width, xi_min: -half_width, xi_max: half_width, n_zeta: n, n_xi: n }
    }

    pub fn zeta(&self, i: usize) -> f64 {
        axis(self.zeta_min, self.zeta_max, self.n_zeta, i)
    }

    pub fn xi(&self, j: usize) -> f64 {
        axis(self.xi_min, self.xi_max, self.n_xi, j)
    }

    pub fn is_empty(&self) -> bool {
        self.n_zeta == 0 || self.n_xi == 0
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.zeta_min, self.zeta_max, self.xi_min, self.xi_max].iter().all(|v| v.is_finite())
            && self.zeta_max >= self.zeta_min
            && self.xi_max >= self.xi_min;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("invalid grid {self:?}")))
        }
    }
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// A grid cell flagged by the sign-change test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateCell {
    pub i: usize,
    pub j: usize,
    /// `(zeta, xi)` of the best corner of the cell.
    pub best: [f64; 2],
    pub abs_discriminant: f64,
}

/// Adjacent candidate cells merged together, with the best seed among them.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCluster {
    pub cells: Vec<CandidateCell>,
    pub seed: ParamPoint,
}

/// Find grid cells where both `Re Δ` and `Im Δ` change sign and the phase of
/// `Δ` winds around the cell boundary; adjacent cells are clustered.
pub fn seed_eps_in_slice(eta: f64, g: f64, grid: &SliceGrid) -> Result<Vec<CandidateCluster>> {
    grid.validate()?;
    if grid.n_zeta < 32 || grid.n_xi < 32 {
        return Err(Error::InvalidInput("seeding needs at least a 32×32 grid".into()));
    }
    let (nz, nx) = (grid.n_zeta, grid.n_xi);
    let disc = |zeta: f64, xi: f64| model::discriminant(&ParamPoint { eta, zeta, xi, g });
    let values: Vec<Complex64> = (0..nz).flat_map(|i| (0..nx).map(move |j| (i, j))).map(|(i, j)| disc(grid.zeta(i), grid.xi(j))).collect();
    let at = |i: usize, j: usize| values[i * nx + j];

    let mut cells = Vec::new();
    for i in 0..nz - 1 {
        for j in 0..nx - 1 {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let changes = |f: fn(&Complex64) -> f64| {
                let pos = corners.iter().any(|c| f(c) >= 0.0);
                let neg = corners.iter().any(|c| f(c) <= 0.0);
                pos && neg
            };
            if !(changes(|c| c.re) && changes(|c| c.im)) {
                continue;
            }
            let (z0, z1, x0, x1) = (grid.zeta(i), grid.zeta(i + 1), grid.xi(j), grid.xi(j + 1));
            if corners.iter().all(|c| c.norm() > 0.0) && cell_winding(&disc, z0, z1, x0, x1) == 0 {
                continue;
            }
            let pts = [[z0, x0], [z1, x0], [z1, x1], [z0, x1]];
            let (k, best) = corners
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(k, c)| (k, c.norm()))
                .unwrap_or((0, f64::INFINITY));
            cells.push(CandidateCell { i, j, best: pts[k], abs_discriminant: best });
        }
    }

    let mut clusters: Vec<Vec<CandidateCell>> = Vec::new();
    let mut used = vec![false; cells.len()];
    for start in 0..cells.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(cells[k]);
            for (m, other) in cells.iter().enumerate() {
                if !used[m] && cells[k].i.abs_diff(other.i) <= 1 && cells[k].j.abs_diff(other.j) <= 1 {
                    used[m] = true;
                    stack.push(m);
                }
            }
        }
        clusters.push(members);
    }
    Ok(clusters
        .into_iter()
        .map(|cells| {
            let best = cells.iter().min_by(|a, b| a.abs_discriminant.total_cmp(&b.abs_discriminant)).map(|c| c.best).unwrap_or([0.0, 0.0]);
            CandidateCluster { seed: ParamPoint { eta, zeta: best[0], xi: best[1], g }, cells }
        })
        .collect())
}

/// Winding number of `arg Δ` around the rectangle, sampled finely enough
/// that no single increment exceeds a quarter turn.
fn cell_winding(disc: &impl Fn(f64, f64) -> Complex64, z0: f64, z1: f64, x0: f64, x1: f64) -> i32 {
    const PER_EDGE: usize = 16;
    let corners = [[z0, x0], [z1, x0], [z1, x1], [z0, x1], [z0, x0]];
    let mut total = 0.0;
    let mut prev = disc(z0, x0).arg();
    for e in 0..4 {
        let (a, b) = (corners[e], corners[e + 1]);
        for s in 1..=PER_EDGE {
            let t = s as f64 / PER_EDGE as f64;
            let v = disc(a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t);
            let arg = v.arg();
            total += wrap_angle(arg - prev);
            prev = arg;
        }
    }
    (total / core::f64::consts::TAU).round() as i32
}

/// Map an angle to `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let tau = core::f64::consts::TAU;
    let shifted = a + core::f64::consts::PI;
    let r = shifted - tau * (shifted / tau).floor() - core::f64::consts::PI;
    if r.is_finite() {
        r
    } else {
        0.0
    }
}

/// The two coordinates that Newton refinement is allowed to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeCoords {
    ZetaXi,
    EtaZeta,
    EtaXi,
}

impl FreeCoords {
    /// Indices into `(eta, zeta, xi)`.
    fn indices(self) -> [usize; 2] {
        match self {
            Self::ZetaXi => [1, 2],
            Self::EtaZeta => [0, 1],
            Self::EtaXi => [0, 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub tolerance: f64,
    /// Seeds with a larger `|Δ|` are rejected without iterating.
    pub basin_bound: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 50, max_halvings: 20, tolerance: 1e-12, basin_bound: 1e3 }
    }
}

pub fn refine_ep(seed: &ParamPoint, free: FreeCoords) -> Result<EpPoint> {
    refine_ep_with(seed, free, &NewtonOptions::default())
}

/// Damped Newton on `(Re Δ, Im Δ)` over two free coordinates.
pub fn refine_ep_with(seed: &ParamPoint, free: FreeCoords, opts: &NewtonOptions) -> Result<EpPoint> {
    seed.validate()?;
    let [a, b] = free.indices();
    let mut p = *seed;
    let mut d = model::discriminant(&p);
    if !(d.norm() <= opts.basin_bound) {
        return Err(Error::NoConvergence { iterations: 0, residual: d.norm() });
    }
    for it in 0..opts.max_iterations {
        if d.norm() < opts.tolerance {
            return finish(p, d);
        }
        let grad = model::discriminant_gradient(&p);
        let ga = grad[a];
        let gb = grad[b];
        let step = linalg::solve_real([[ga.re, gb.re], [ga.im, gb.im]], [-d.re, -d.im]);
        let Some(step) = step else {
            return Err(Error::NoConvergence { iterations: it, residual: d.norm() });
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut c = p.coords();
            c[a] += lambda * step[0];
            c[b] += lambda * step[1];
            let trial = ParamPoint::from_coords(c, p.g);
            let dt = model::discriminant(&trial);
            if dt.norm() < d.norm() {
                p = trial;
                d = dt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // stalled at rounding level
            if d.norm() < EP_RESIDUAL {
                return finish(p, d);
            }
            return Err(Error::NoConvergence { iterations: it, residual: d.norm() });
        }
    }
    if d.norm() < opts.tolerance {
        return finish(p, d);
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual: d.norm() })
}

fn finish(p: ParamPoint, d: Complex64) -> Result<EpPoint> {
    let (w, order) = classify(&p);
    Ok(EpPoint { point: p, repeated_eigenvalue: w, order, residual: d.norm() })
}

/// Repeated root among the roots of `p'`, chosen to minimise `|p|`, and the
/// resulting order.
fn classify(p: &ParamPoint) -> (Complex64, u8) {
    let c = model::char_poly(p);
    let [r0, r1] = c.derivative_roots();
    let w = if c.eval(r0).norm() <= c.eval(r1).norm() { r0 } else { r1 };
    let order = if c.eval_d1(w).norm() < ORDER3_TOL && c.eval_d2(w).norm() < ORDER3_TOL { 3 } else { 2 };
    (w, order)
}

/// Order of the EP at `point`.
pub fn ep_order(point: &ParamPoint) -> Result<u8> {
    let d = model::discriminant(point);
    if !(d.norm() < EP_RESIDUAL) {
        return Err(Error::NotAnEp { residual: d.norm() });
    }
    Ok(classify(point).1)
}

/// Seed a slice and refine every cluster; duplicates are merged.
pub fn find_eps_in_slice(eta: f64, g: f64, grid: &SliceGrid) -> Result<Vec<EpPoint>> {
    let clusters = seed_eps_in_slice(eta, g, grid)?;
    let mut out: Vec<EpPoint> = Vec::new();
    for c in clusters {
        let Ok(ep) = refine_ep(&c.seed, FreeCoords::ZetaXi) else { continue };
        let dup = out.iter().any(|e| (e.point.zeta - ep.point.zeta).hypot(e.point.xi - ep.point.xi) < 1e-6);
        if !dup {
            out.push(ep);
        }
    }
    out.sort_by(|a, b| a.point.zeta.total_cmp(&b.point.zeta).then(a.point.xi.total_cmp(&b.point.xi)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    MaxPoints,
    DomainBoundary,
    Closed,
    /// The 2×3 Jacobian lost rank, as it does at an EX.
    JacobianRankDeficient {
        at: [f64; 3],
        sigma_min: f64,
    },
    /// The corrector failed even at the smallest allowed step.
    CorrectorFailed {
        at: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub step: f64,
    pub max_points: usize,
    pub bound: f64,
    pub corrector_tol: f64,
    pub corrector_iterations: usize,
    /// Absolute threshold on the smaller singular value of the Jacobian.
    pub rank_tol: f64,
    pub min_step: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { step: 0.02, max_points: 2000, bound: 1.5, corrector_tol: 1e-12, corrector_iterations: 30, rank_tol: 1e-3, min_step: 1e-5 }
    }
}

/// A traced exceptional arc. `points` run from the end reached by the
/// backward trace through the start point to the end of the forward trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EaPolyline {
    pub g: f64,
    pub points: Vec<EpPoint>,
    pub closed: bool,
    pub start_termination: Termination,
    pub end_termination: Termination,
}

impl EaPolyline {
    pub fn ends_rank_deficient(&self) -> bool {
        matches!(self.start_termination, Termination::JacobianRankDeficient { .. })
            || matches!(self.end_termination, Termination::JacobianRankDeficient { .. })
    }

    /// Points where the arc crosses the plane `eta = const`, polished on
    /// that plane by Newton in `(zeta, xi)`.
    pub fn slice_crossings(&self, eta: f64) -> Vec<EpPoint> {
        let mut out: Vec<EpPoint> = Vec::new();
        for w in self.points.windows(2) {
            let (a, b) = (w[0].point, w[1].point);
            let (da, db) = (a.eta - eta, b.eta - eta);
            if da == 0.0 || (da < 0.0) != (db < 0.0) && db != 0.0 {
                let t = if da == db { 0.0 } else { da / (da - db) };
                let mut seed = a.lerp(&b, t);
                seed.eta = eta;
                if let Ok(ep) = refine_ep(&seed, FreeCoords::ZetaXi) {
                    let dup = out.iter().any(|e| (e.point.zeta - ep.point.zeta).hypot(e.point.xi - ep.point.xi) < 1e-8);
                    if !dup {
                        out.push(ep);
                    }
                }
            }
        }
        if let Some(last) = self.points.last() {
            if last.point.eta == eta && !out.iter().any(|e| e.point == last.point) {
                out.push(*last);
            }
        }
        out
    }
}

fn residual_vec(c: [f64; 3], g: f64) -> [f64; 2] {
    let d = model::discriminant(&ParamPoint::from_coords(c, g));
    [d.re, d.im]
}

fn jacobian(c: [f64; 3], g: f64) -> [[f64; 3]; 2] {
    let grad = model::discriminant_gradient(&ParamPoint::from_coords(c, g));
    [[grad[0].re, grad[1].re, grad[2].re], [grad[0].im, grad[1].im, grad[2].im]]
}

/// Unit tangent (null vector of the Jacobian) and the smaller singular value.
fn tangent(c: [f64; 3], g: f64) -> ([f64; 3], f64) {
    let j = jacobian(c, g);
    let t = linalg::cross_real(&j[0], &j[1]);
    let n = linalg::norm_real(&t);
    let (_, smin) = linalg::singular_values_2x3(&j);
    if n == 0.0 {
        return ([0.0; 3], smin);
    }
    (t.map(|x| x / n), smin)
}

/// Newton in the plane orthogonal to `t` through `p`.
fn correct(mut p: [f64; 3], t: [f64; 3], g: f64, opts: &TraceOptions) -> Option<[f64; 3]> {
    for _ in 0..opts.corrector_iterations {
        let f = residual_vec(p, g);
        let j = jacobian(p, g);
        let d = linalg::solve_real([j[0], j[1], t], [-f[0], -f[1], 0.0])?;
        for k in 0..3 {
            p[k] += d[k];
        }
        if linalg::norm_real(&d) < opts.corrector_tol {
            break;
        }
    }
    let f = residual_vec(p, g);
    (f[0].hypot(f[1]) < EP_RESIDUAL).then_some(p)
}

/// Follow an exceptional arc in both directions from `start`.
pub fn trace_ea(g: f64, start: &EpPoint, opts: &TraceOptions) -> Result<EaPolyline> {
    if !(opts.step > 0.0) || opts.max_points < 2 {
        return Err(Error::InvalidInput("trace step must be positive and max_points ≥ 2".into()));
    }
    if !(start.residual < EP_RESIDUAL) {
        return Err(Error::NotAnEp { residual: start.residual });
    }
    let origin = start.point.coords();
    let (t0, smin) = tangent(origin, g);
    if smin < opts.rank_tol {
        let term = Termination::JacobianRankDeficient { at: origin, sigma_min: smin };
        return Ok(EaPolyline { g, points: vec![*start], closed: false, start_termination: term, end_termination: term });
    }
    let budget = opts.max_points;
    let (fwd, fwd_term) = trace_one(origin, t0, g, opts, budget);
    if fwd_term == Termination::Closed {
        let mut points = vec![*start];
        points.extend(fwd);
        return Ok(EaPolyline { g, points, closed: true, start_termination: Termination::Closed, end_termination: Termination::Closed });
    }
    let remaining = budget.saturating_sub(fwd.len() + 1).max(1);
    let (bwd, bwd_term) = trace_one(origin, t0.map(|x| -x), g, opts, remaining);
    let mut points: Vec<EpPoint> = bwd.into_iter().rev().collect();
    points.push(*start);
    points.extend(fwd);
    Ok(EaPolyline { g, points, closed: false, start_termination: bwd_term, end_termination: fwd_term })
}

fn trace_one(origin: [f64; 3], t0: [f64; 3], g: f64, opts: &TraceOptions, budget: usize) -> (Vec<EpPoint>, Termination) {
    let mut out = Vec::new();
    let mut p = origin;
    let mut t = t0;
    let mut h = opts.step;
    let (t_origin, mut sigma) = tangent(origin, g);
    let orient = if (0..3).map(|k| t_origin[k] * t0[k]).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    loop {
        if out.len() + 1 >= budget {
            return (out, Termination::MaxPoints);
        }
        let pred = core::array::from_fn(|k| p[k] + h * t[k]);
        let next = correct(pred, t, g, opts).filter(|q| {
            let dist = linalg::norm_real(&core::array::from_fn::<f64, 3, _>(|k| q[k] - p[k]));
            dist < 2.0 * h && dist > 0.25 * h
        });
        let Some(q) = next else {
            h *= 0.5;
            if h < opts.min_step {
                return (out, Termination::CorrectorFailed { at: p });
            }
            continue;
        };
        let (tn, smin) = tangent(q, g);
        if smin < opts.rank_tol {
            return (out, Termination::JacobianRankDeficient { at: q, sigma_min: smin });
        }
        let tn = tn.map(|x| orient * x);
        let dot: f64 = (0..3).map(|k| tn[k] * t[k]).sum();
        // a sharp turn, or a fast approach to a rank-deficient point
        if dot < 0.5 || smin < 0.5 * sigma {
            h *= 0.5;
            if h < opts.min_step {
                return (out, Termination::CorrectorFailed { at: p });
            }
            continue;
        }
        p = q;
        t = tn;
        sigma = smin;
        let pp = ParamPoint::from_coords(p, g);
        let (w, order) = classify(&pp);
        out.push(EpPoint { point: pp, repeated_eigenvalue: w, order, residual: model::discriminant(&pp).norm() });
        if p.iter().any(|x| x.abs() > opts.bound) {
            return (out, Termination::DomainBoundary);
        }
        let back = linalg::norm_real(&core::array::from_fn::<f64, 3, _>(|k| p[k] - origin[k]));
        if out.len() >= 10 && back < 2.0 * opts.step {
            return (out, Termination::Closed);
        }
        h = (h * 2.0).min(opts.step);
    }
}

/// Seed coarse slices at `eta ∈ {-0.5, 0, 0.5}`, trace each seed and keep
/// arcs that are not already covered.
pub fn trace_all_arcs(g: f64, opts: &TraceOptions) -> Result<Vec<EaPolyline>> {
    let grid = SliceGrid::square(1.5, 61);
    let mut arcs: Vec<EaPolyline> = Vec::new();
    for eta in [-0.5, 0.0, 0.5] {
        for ep in find_eps_in_slice(eta, g, &grid)? {
            let covered = arcs.iter().any(|a| {
                a.points.iter().any(|q| {
                    let d = linalg::norm_real(&core::array::from_fn::<f64, 3, _>(|k| q.point.coords()[k] - ep.point.coords()[k]));
                    d < 2.0 * opts.step
                })
            });
            if covered || ep.order == 3 {
                continue;
            }
            arcs.push(trace_ea(g, &ep, opts)?);
        }
    }
    Ok(arcs)
}

/// How the two arcs pass through the plane `eta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ArcPairing {
    /// Crossings at `xi = 0`, on the `zeta` axis.
    ZetaAxis,
    /// Crossings at `zeta = 0`, on the `xi` axis.
    XiAxis,
    /// Arcs meet at the origin.
    Meeting,
    Other,
}

/// Classify the `eta = 0` crossings of a set of arcs.
pub fn classify_pairing(arcs: &[EaPolyline]) -> ArcPairing {
    if arcs.iter().any(|a| a.ends_rank_deficient()) {
        return ArcPairing::Meeting;
    }
    let crossings: Vec<EpPoint> = arcs.iter().flat_map(|a| a.slice_crossings(0.0)).collect();
    if crossings.is_empty() {
        return ArcPairing::Other;
    }
    let tol = 1e-6;
    if crossings.iter().all(|c| c.point.xi.abs() < tol && c.point.zeta.abs() > tol) {
        ArcPairing::ZetaAxis
    } else if crossings.iter().all(|c| c.point.zeta.abs() < tol && c.point.xi.abs() > tol) {
        ArcPairing::XiAxis
    } else {
        ArcPairing::Other
    }
}

/// Crossing of a branch cut, in `(zeta, xi)`.
pub type CutPoint = [f64; 2];

/// Locus where the real parts of two Re-ranked sheets exchange in a slice.
///
/// `band_pair` uses 1-based ranks in ascending `Re ω`. Every grid edge whose
/// continuity matching maps rank `i` onto rank `j` or back contributes one
/// crossing point; points sharing a cell are chained into polylines.
pub fn branch_cut_trace(eta: f64, g: f64, band_pair: (usize, usize), grid: &SliceGrid) -> Result<Vec<Vec<CutPoint>>> {
    grid.validate()?;
    let (bi, bj) = band_pair;
    if !(1..=3).contains(&bi) || !(1..=3).contains(&bj) || bi == bj {
        return Err(Error::InvalidInput("band_pair must be two distinct ranks in 1..=3".into()));
    }
    let (ri, rj) = (bi - 1, bj - 1);
    if grid.n_zeta < 2 || grid.n_xi < 2 {
        return Ok(Vec::new());
    }
    let (nz, nx) = (grid.n_zeta, grid.n_xi);
    let sorted: Vec<[Complex64; 3]> = (0..nz)
        .flat_map(|i| (0..nx).map(move |j| (i, j)))
        .map(|(i, j)| sort_by_re(model::eigenvalues(&ParamPoint { eta, zeta: grid.zeta(i), xi: grid.xi(j), g })))
        .collect();
    let at = |i: usize, j: usize| sorted[i * nx + j];
    let node = |i: usize, j: usize| [grid.zeta(i), grid.xi(j)];

    // edge ids: horizontal (i,j)-(i+1,j) and vertical (i,j)-(i,j+1)
    let h_id = |i: usize, j: usize| i * nx + j;
    let v_id = |i: usize, j: usize| nz * nx + i * nx + j;
    let mut hits: Vec<Option<CutPoint>> = vec![None; 2 * nz * nx];
    let mut check = |id: usize, a: [f64; 2], b: [f64; 2], wa: [Complex64; 3], wb: [Complex64; 3]| {
        let m = continuity_match(&wa, &wb);
        if m[ri] == rj || m[rj] == ri {
            let d0 = wa[ri].re - wa[rj].re;
            let d1 = wb[m[ri]].re - wb[m[rj]].re;
            let t = if d0 == d1 { 0.5 } else { (d0 / (d0 - d1)).clamp(0.0, 1.0) };
            hits[id] = Some([a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]);
        }
    };
    for i in 0..nz {
        for j in 0..nx {
            if i + 1 < nz {
                check(h_id(i, j), node(i, j), node(i + 1, j), at(i, j), at(i + 1, j));
            }
            if j + 1 < nx {
                check(v_id(i, j), node(i, j), node(i, j + 1), at(i, j), at(i, j + 1));
            }
        }
    }

    // link edges that share a cell
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); hits.len()];
    for i in 0..nz - 1 {
        for j in 0..nx - 1 {
            let edges = [h_id(i, j), v_id(i + 1, j), h_id(i, j + 1), v_id(i, j)];
            let present: Vec<usize> = edges.iter().copied().filter(|&e| hits[e].is_some()).collect();
            for pair in present.chunks(2) {
                if let [a, b] = *pair {
                    links[a].push(b);
                    links[b].push(a);
                }
            }
        }
    }
    let mut visited = vec![false; hits.len()];
    let mut polylines = Vec::new();
    let order: Vec<usize> = (0..hits.len())
        .filter(|&e| hits[e].is_some())
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|&e| links[e].len() != 2)
        .chain((0..hits.len()).filter(|&e| hits[e].is_some() && links[e].len() == 2))
        .collect();
    for start in order {
        if visited[start] {
            continue;
        }
        let mut line = Vec::new();
        let mut cur = start;
        loop {
            visited[cur] = true;
            if let Some(p) = hits[cur] {
                line.push(p);
            }
            match links[cur].iter().copied().find(|&n| !visited[n]) {
                Some(n) => cur = n,
                None => break,
            }
        }
        polylines.push(line);
    }
    Ok(polylines)
}

fn sort_by_re(mut w: [Complex64; 3]) -> [Complex64; 3] {
    w.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    w
}

/// Assignment `m` minimising `Σ |a_k - b_{m[k]}|`.
pub fn continuity_match(a: &[Complex64; 3], b: &[Complex64; 3]) -> [usize; 3] {
    PERMUTATIONS
        .iter()
        .copied()
        .min_by(|p, q| {
            let cost = |m: &[usize; 3]| (0..3).map(|k| (a[k] - b[m[k]]).norm()).sum::<f64>();
            cost(p).total_cmp(&cost(q))
        })
        .unwrap_or([0, 1, 2])
}

pub(crate) const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
