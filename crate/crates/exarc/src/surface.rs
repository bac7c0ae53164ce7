//! Eigenvalue surfaces over a `(zeta, xi)` slice.

use std::io::Write;
use std::path::Path;

use exarc_core::ep::{continuity_match, SliceGrid};
use exarc_core::{model, Complex64, ParamPoint};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 9] = ["zeta", "xi", "re_w1", "re_w2", "re_w3", "im_w1", "im_w2", "im_w3", "abs_disc"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub zeta: f64,
    pub xi: f64,
    pub omega: [Complex64; 3],
    pub abs_disc: f64,
}

/// Eigenvalues on every grid node, row-major in `xi` then `zeta`.
///
/// Bands start Re-sorted at the first node, are continued down the first
/// column, then along each row from its first node. Rows run in parallel.
pub fn compute(eta: f64, g: f64, grid: &SliceGrid) -> CliResult<Vec<SurfacePoint>> {
    if [eta, g, grid.zeta_min, grid.zeta_max, grid.xi_min, grid.xi_max].iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config("surface window must be finite".into()));
    }
    if grid.is_empty() || grid.zeta_max < grid.zeta_min || grid.xi_max < grid.xi_min {
        return Ok(Vec::new());
    }
    let at = |i: usize, j: usize| ParamPoint { eta, zeta: grid.zeta(i), xi: grid.xi(j), g };
    let follow = |prev: &[Complex64; 3], p: &ParamPoint| {
        let w = model::eigenvalues(p);
        let m = continuity_match(prev, &w);
        m.map(|k| w[k])
    };

    let mut column = Vec::with_capacity(grid.n_xi);
    let mut w0 = model::eigenvalues(&at(0, 0));
    w0.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    column.push(w0);
    for j in 1..grid.n_xi {
        let next = follow(&column[j - 1], &at(0, j));
        column.push(next);
    }

    let rows: Vec<Vec<SurfacePoint>> = (0..grid.n_xi)
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::with_capacity(grid.n_zeta);
            let mut w = column[j];
            for i in 0..grid.n_zeta {
                let p = at(i, j);
                if i > 0 {
                    w = follow(&w, &p);
                }
                row.push(SurfacePoint { zeta: p.zeta, xi: p.xi, omega: w, abs_disc: model::discriminant(&p).norm() });
            }
            row
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(w: W, points: &[SurfacePoint]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for p in points {
        let mut rec = vec![p.zeta, p.xi];
        rec.extend(p.omega.iter().map(|z| z.re));
        rec.extend(p.omega.iter().map(|z| z.im));
        rec.push(p.abs_disc);
        out.write_record(rec.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, points: &[SurfacePoint]) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(std::io::BufWriter::new(file), points).map_err(|e| CliError::io(path, e.into()))
}

/// Interior nodes where `|Δ|` is no larger than any of its eight neighbours.
///
/// For fixed `eta` and `g` the discriminant is analytic in `xi + i zeta`, so
/// such minima sit on its zeros.
pub fn disc_minima(points: &[SurfacePoint], grid: &SliceGrid) -> Vec<SurfacePoint> {
    let (nz, nx) = (grid.n_zeta, grid.n_xi);
    if points.len() != nz * nx || nz < 3 || nx < 3 {
        return Vec::new();
    }
    let d = |i: usize, j: usize| points[j * nz + i].abs_disc;
    let mut out = Vec::new();
    for j in 1..nx - 1 {
        for i in 1..nz - 1 {
            let c = d(i, j);
            let lowest = (0..3).all(|dj| (0..3).all(|di| (di == 1 && dj == 1) || c <= d(i + di - 1, j + dj - 1)));
            if lowest {
                out.push(points[j * nz + i]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_window_gives_header_only() {
        let grid = SliceGrid { n_zeta: 0, ..SliceGrid::square(1.0, 5) };
        let pts = compute(0.33, 0.61, &grid).unwrap();
        assert!(pts.is_empty());
        let mut buf = Vec::new();
        write_csv(&mut buf, &pts).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", HEADER.join(",")));
    }

    #[test]
    fn rows_are_continuous() {
        let grid = SliceGrid::square(1.0, 41);
        let pts = compute(0.33, 0.61, &grid).unwrap();
        assert_eq!(pts.len(), 41 * 41);
        for w in pts.chunks(41) {
            for pair in w.windows(2) {
                for k in 0..3 {
                    assert!((pair[1].omega[k] - pair[0].omega[k]).norm() < 0.5);
                }
            }
        }
    }
}
