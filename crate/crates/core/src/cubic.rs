//! Roots of a monic complex cubic.
//!
//! The primary path is a Cardano-type closed form followed by Newton polish.
//! When the polished roots still leave a relative residual above
//! [`FALLBACK_RESIDUAL`], the roots are recomputed as eigenvalues of the
//! companion matrix with a shifted complex QR iteration.

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;
use num_traits::Zero;

use crate::linalg::{C0, C1};

/// Relative residual above which the closed form is abandoned.
pub const FALLBACK_RESIDUAL: f64 = 1e-8;

/// Which algorithm produced a set of roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    ClosedForm,
    Companion,
}

/// Evaluate `w^3 + a2 w^2 + a1 w + a0`.
pub fn eval_monic(a2: Complex64, a1: Complex64, a0: Complex64, w: Complex64) -> Complex64 {
    ((w + a2) * w + a1) * w + a0
}

/// Scale used to make residuals relative: the sum of the term magnitudes.
fn term_scale(a2: Complex64, a1: Complex64, a0: Complex64, w: Complex64) -> f64 {
    let r = w.norm();
    r * r * r + a2.norm() * r * r + a1.norm() * r + a0.norm()
}

/// Largest relative residual `|p(w)| / sum|terms|` over the given roots.
pub fn relative_residual(a2: Complex64, a1: Complex64, a0: Complex64, roots: &[Complex64; 3]) -> f64 {
    roots
        .iter()
        .map(|&w| {
            let s = term_scale(a2, a1, a0, w);
            if s == 0.0 {
                0.0
            } else {
                eval_monic(a2, a1, a0, w).norm() / s
            }
        })
        .fold(0.0, f64::max)
}

/// Roots of `w^3 + a2 w^2 + a1 w + a0`, unordered.
pub fn solve_monic(a2: Complex64, a1: Complex64, a0: Complex64) -> [Complex64; 3] {
    solve_monic_with_method(a2, a1, a0).0
}

pub fn solve_monic_with_method(a2: Complex64, a1: Complex64, a0: Complex64) -> ([Complex64; 3], RootMethod) {
    let mut roots = closed_form(a2, a1, a0);
    for r in roots.iter_mut() {
        *r = polish(a2, a1, a0, *r);
    }
    if relative_residual(a2, a1, a0, &roots) <= FALLBACK_RESIDUAL {
        return (roots, RootMethod::ClosedForm);
    }
    let mut roots = companion_eigenvalues(a2, a1, a0);
    for r in roots.iter_mut() {
        *r = polish(a2, a1, a0, *r);
    }
    (roots, RootMethod::Companion)
}

fn closed_form(a2: Complex64, a1: Complex64, a0: Complex64) -> [Complex64; 3] {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = a2 * a2 * a2 * (2.0 / 27.0) - a2 * a1 / 3.0 + a0;
    let half_q = q / 2.0;
    let disc = half_q * half_q + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let sq = disc.sqrt();
    // pick the branch that avoids cancellation in -q/2 ± sqrt(disc)
    let plus = -half_q + sq;
    let minus = -half_q - sq;
    let cube = if plus.norm() >= minus.norm() { plus } else { minus };
    if cube.is_zero() {
        return [-shift; 3];
    }
    let u = cube.cbrt();
    let v = -p / (u * 3.0);
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let omega2 = omega.conj();
    [u + v - shift, u * omega + v * omega2 - shift, u * omega2 + v * omega - shift]
}

/// A few guarded Newton steps; a step is kept only if it reduces `|p|`.
fn polish(a2: Complex64, a1: Complex64, a0: Complex64, mut w: Complex64) -> Complex64 {
    let mut f = eval_monic(a2, a1, a0, w);
    for _ in 0..4 {
        if f.is_zero() {
            break;
        }
        let df = (w * 3.0 + a2 * 2.0) * w + a1;
        if df.is_zero() {
            break;
        }
        let next = w - f / df;
        let fn_ = eval_monic(a2, a1, a0, next);
        if fn_.norm() < f.norm() {
            w = next;
            f = fn_;
        } else {
            break;
        }
    }
    w
}

/// Eigenvalues of the companion matrix of `w^3 + a2 w^2 + a1 w + a0` by
/// shifted complex QR on the (already Hessenberg) companion form.
pub fn companion_eigenvalues(a2: Complex64, a1: Complex64, a0: Complex64) -> [Complex64; 3] {
    let mut h = [[-a2, -a1, -a0], [C1, C0, C0], [C0, C1, C0]];
    let mut out = [C0; 3];
    let mut n = 3usize;
    let mut iterations = 0;
    while n > 2 && iterations < 200 {
        iterations += 1;
        let k = n - 1;
        let small = f64::EPSILON * (h[k][k].norm() + h[k - 1][k - 1].norm()).max(f64::MIN_POSITIVE);
        if h[k][k - 1].norm() <= small {
            out[k] = h[k][k];
            n -= 1;
            continue;
        }
        let small0 = f64::EPSILON * (h[1][1].norm() + h[0][0].norm()).max(f64::MIN_POSITIVE);
        if h[1][0].norm() <= small0 {
            // top 1×1 block splits off; the trailing 2×2 is solved below
            out[0] = h[0][0];
            let [l1, l2] = eig2(h[1][1], h[1][2], h[2][1], h[2][2]);
            out[1] = l1;
            out[2] = l2;
            return out;
        }
        let mu = if iterations % 11 == 0 {
            // exceptional shift to break cycles
            h[k][k] + Complex64::new(h[k][k - 1].norm(), 0.0)
        } else {
            wilkinson(h[k - 1][k - 1], h[k - 1][k], h[k][k - 1], h[k][k])
        };
        qr_step(&mut h, n, mu);
    }
    let [l1, l2] = eig2(h[0][0], h[0][1], h[1][0], h[1][1]);
    out[0] = l1;
    out[1] = l2;
    if n == 3 {
        out[2] = h[2][2];
    }
    out
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let half_tr = (a + d) / 2.0;
    let det = a * d - b * c;
    let s = (half_tr * half_tr - det).sqrt();
    let l1 = if (half_tr + s).norm() >= (half_tr - s).norm() { half_tr + s } else { half_tr - s };
    // second root from the product avoids cancellation
    let l2 = if l1.is_zero() { half_tr * 2.0 - l1 } else { det / l1 };
    [l1, l2]
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let [l1, l2] = eig2(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step on the leading `n×n` block via Givens rotations.
fn qr_step(h: &mut [[Complex64; 3]; 3], n: usize, mu: Complex64) {
    for i in 0..n {
        h[i][i] -= mu;
    }
    let mut rots = [(0.0f64, C0); 2];
    for k in 0..n - 1 {
        let x = h[k][k];
        let y = h[k + 1][k];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (1.0, C0) } else { (x.norm() / r, phase(x) * y.conj() / r) };
        // G = [[c, s], [-conj(s), c]] applied from the left to rows k, k+1
        for j in 0..3 {
            let a = h[k][j];
            let b = h[k + 1][j];
            h[k][j] = a * c + s * b;
            h[k + 1][j] = -s.conj() * a + b * c;
        }
        rots[k] = (c, s);
    }
    for (k, &(c, s)) in rots.iter().enumerate().take(n - 1) {
        // right-multiply by G^H on columns k, k+1
        for row in h.iter_mut() {
            let a = row[k];
            let b = row[k + 1];
            row[k] = a * c + b * s.conj();
            row[k + 1] = -a * s + b * c;
        }
    }
    for i in 0..n {
        h[i][i] += mu;
    }
}

fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        C1
    } else {
        z / r
    }
}
