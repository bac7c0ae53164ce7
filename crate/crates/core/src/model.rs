//! The three-site Hamiltonian and its spectral data.
//!
//! With `kappa = -1` and site order `(B, A, C)` the matrix reads
//!
//! ```text
//! [ -√2(η + i(1+g))      -1              0           ]
//! [      -1          -(ξ + iζ)          -1           ]
//! [       0              -1       √2(η + i(1+g))     ]
//! ```
//!
//! It is complex symmetric, so left eigenvectors are unconjugated transposes
//! of right eigenvectors.

use alloc::format;
use num_complex::Complex64;

use crate::cubic;
use crate::linalg::{self, Mat3, Vec3, C0, C1, I};
use crate::{Error, Result};

/// Minimum eigenvalue gap below which an eigensystem is flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-6;

const SQRT2: f64 = core::f64::consts::SQRT_2;

/// Indices of the three sites in every vector and matrix of this crate.
pub const SITE_B: usize = 0;
pub const SITE_A: usize = 1;
pub const SITE_C: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamPoint {
    pub eta: f64,
    pub zeta: f64,
    pub xi: f64,
    pub g: f64,
}

impl ParamPoint {
    /// Validated constructor; rejects non-finite coordinates.
    pub fn new(eta: f64, zeta: f64, xi: f64, g: f64) -> Result<Self> {
        let p = Self { eta, zeta, xi, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.eta, self.zeta, self.xi, self.g].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("non-finite parameter point {self:?}")))
        }
    }

    /// True when every coordinate lies in `[-1, 1]`.
    pub fn in_validated_regime(&self) -> bool {
        [self.eta, self.zeta, self.xi, self.g].iter().all(|v| v.abs() <= 1.0)
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.eta, self.zeta, self.xi]
    }

    pub fn from_coords(c: [f64; 3], g: f64) -> Self {
        Self { eta: c[0], zeta: c[1], xi: c[2], g }
    }

    /// Linear interpolation in `(eta, zeta, xi, g)`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let f = |a: f64, b: f64| a + (b - a) * t;
        Self { eta: f(self.eta, other.eta), zeta: f(self.zeta, other.zeta), xi: f(self.xi, other.xi), g: f(self.g, other.g) }
    }
}

/// Monic cubic `a3 w^3 + a2 w^2 + a1 w + a0` with `a3 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolyCoeffs {
    pub a3: Complex64,
    pub a2: Complex64,
    pub a1: Complex64,
    pub a0: Complex64,
}

impl PolyCoeffs {
    pub fn monic(a2: Complex64, a1: Complex64, a0: Complex64) -> Self {
        Self { a3: C1, a2, a1, a0 }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        ((self.a3 * w + self.a2) * w + self.a1) * w + self.a0
    }

    pub fn eval_d1(&self, w: Complex64) -> Complex64 {
        (self.a3 * w * 3.0 + self.a2 * 2.0) * w + self.a1
    }

    pub fn eval_d2(&self, w: Complex64) -> Complex64 {
        self.a3 * w * 6.0 + self.a2 * 2.0
    }

    pub fn roots(&self) -> [Complex64; 3] {
        cubic::solve_monic(self.a2, self.a1, self.a0)
    }

    /// Roots of `p'`, the candidates for a repeated root.
    pub fn derivative_roots(&self) -> [Complex64; 2] {
        let (a, b, c) = (self.a3 * 3.0, self.a2 * 2.0, self.a1);
        let s = (b * b - a * c * 4.0).sqrt();
        [(-b + s) / (a * 2.0), (-b - s) / (a * 2.0)]
    }

    /// `(-1)^{N(N-1)/2} det Syl(p, p')` with `N = 3`.
    pub fn sylvester_discriminant(&self) -> Complex64 {
        let (a3, a2, a1, a0) = (self.a3, self.a2, self.a1, self.a0);
        let (b2, b1, b0) = (a3 * 3.0, a2 * 2.0, a1);
        let syl = [[a3, a2, a1, a0, C0], [C0, a3, a2, a1, a0], [b2, b1, b0, C0, C0], [C0, b2, b1, b0, C0], [C0, C0, b2, b1, b0]];
        -linalg::det_n(syl) / a3
    }

    /// Standard closed form `18bcd - 4b^3 d + b^2 c^2 - 4c^3 - 27d^2`.
    pub fn closed_form_discriminant(&self) -> Complex64 {
        let (b, c, d) = (self.a2, self.a1, self.a0);
        b * c * d * 18.0 - b * b * b * d * 4.0 + b * b * c * c - c * c * c * 4.0 - d * d * 27.0
    }

    /// Partial derivatives of the closed-form discriminant with respect to
    /// `(a2, a1, a0)`.
    fn discriminant_partials(&self) -> [Complex64; 3] {
        let (b, c, d) = (self.a2, self.a1, self.a0);
        [
            c * d * 18.0 - b * b * d * 12.0 + b * c * c * 2.0,
            b * d * 18.0 + b * b * c * 2.0 - c * c * 12.0,
            b * c * 18.0 - b * b * b * 4.0 - d * 54.0,
        ]
    }
}

/// Physical constants that map the dimensionless spectrum to rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalScale {
    pub omega0: f64,
    pub gamma0: f64,
    pub kappa: f64,
}

impl Default for PhysicalScale {
    fn default() -> Self {
        Self { omega0: 19729.0, gamma0: 83.5, kappa: -49.5 }
    }
}

impl PhysicalScale {
    pub fn new(omega0: f64, gamma0: f64, kappa: f64) -> Result<Self> {
        let s = Self { omega0, gamma0, kappa };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.omega0.is_finite() && self.gamma0.is_finite() && self.kappa.is_finite();
        if finite && self.kappa < 0.0 && self.omega0 > 0.0 && self.gamma0 >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid physical scale {self:?}")))
        }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.omega0, self.gamma0)
    }
}

/// Eigenvalues with biorthonormal right and left eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub point: ParamPoint,
    pub eigenvalues: [Complex64; 3],
    /// Column vectors, unit Euclidean norm.
    pub right_vectors: [Vec3; 3],
    /// Row covectors with `left_j · right_j = 1`.
    pub left_vectors: [Vec3; 3],
    pub min_gap: f64,
    pub is_degenerate: bool,
}

impl Eigensystem {
    /// Build an eigensystem from given right vectors, taking left vectors as
    /// the rows of the inverse of the right-vector matrix.
    pub fn from_right_vectors(point: ParamPoint, eigenvalues: [Complex64; 3], rights: [Vec3; 3]) -> Result<Self> {
        let right_vectors = rights.map(|r| {
            let n = linalg::norm(&r);
            if n > 0.0 {
                linalg::scale(&r, Complex64::new(1.0 / n, 0.0))
            } else {
                r
            }
        });
        let cols: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| right_vectors[j][i]));
        let inv = linalg::inverse3(&cols).ok_or_else(|| Error::InvalidInput("right eigenvectors are linearly dependent".into()))?;
        let min_gap = min_gap(&eigenvalues);
        Ok(Self { point, eigenvalues, right_vectors, left_vectors: inv, min_gap, is_degenerate: min_gap < DEGENERACY_GAP })
    }

    /// Return a copy with bands rearranged so that band `k` of the result is
    /// band `order[k]` of `self`.
    pub fn permuted(&self, order: [usize; 3]) -> Self {
        Self {
            point: self.point,
            eigenvalues: order.map(|k| self.eigenvalues[k]),
            right_vectors: order.map(|k| self.right_vectors[k]),
            left_vectors: order.map(|k| self.left_vectors[k]),
            min_gap: self.min_gap,
            is_degenerate: self.is_degenerate,
        }
    }

    /// Bands sorted by ascending real part (ties broken by imaginary part).
    pub fn sorted_by_real(&self) -> Self {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let (x, y) = (self.eigenvalues[a], self.eigenvalues[b]);
            x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
        });
        self.permuted(order)
    }

    /// Overlap matrix `O_ij = left_i(self) · right_j(other)`.
    pub fn overlap(&self, other: &Self) -> Mat3 {
        core::array::from_fn(|i| core::array::from_fn(|j| linalg::dot(&self.left_vectors[i], &other.right_vectors[j])))
    }

    /// Largest `|left_i · right_j - δ_ij|`.
    pub fn biorthonormality_error(&self) -> f64 {
        let o = self.overlap(self);
        linalg::max_abs(&linalg::sub(&o, &linalg::identity()))
    }

    /// Largest eigen-equation residual for right and left vectors, relative to
    /// the Frobenius norm of `H`.
    pub fn residual(&self) -> f64 {
        let h = build_h_ep(&self.point);
        let scale = linalg::frobenius(&h).max(1.0);
        let mut worst = 0.0f64;
        for k in 0..3 {
            let w = self.eigenvalues[k];
            let r = &self.right_vectors[k];
            let hr = linalg::matvec(&h, r);
            let res_r = linalg::norm(&core::array::from_fn(|i| hr[i] - r[i] * w)) / linalg::norm(r).max(f64::MIN_POSITIVE);
            let l = &self.left_vectors[k];
            let lh = linalg::vecmat(l, &h);
            let res_l = linalg::norm(&core::array::from_fn(|i| lh[i] - l[i] * w)) / linalg::norm(l).max(f64::MIN_POSITIVE);
            worst = worst.max(res_r).max(res_l);
        }
        worst / scale
    }
}

pub fn min_gap(w: &[Complex64; 3]) -> f64 {
    (w[0] - w[1]).norm().min((w[0] - w[2]).norm()).min((w[1] - w[2]).norm())
}

/// Shorthand for the recurring diagonal factor `η + i(1+g)`.
fn diag_factor(p: &ParamPoint) -> Complex64 {
    Complex64::new(p.eta, 1.0 + p.g)
}

/// The dimensionless Hamiltonian at `p`.
pub fn build_h_ep(p: &ParamPoint) -> Mat3 {
    let d = diag_factor(p) * SQRT2;
    let m = -C1;
    [[-d, m, C0], [m, -Complex64::new(p.xi, p.zeta), m], [C0, m, d]]
}

pub fn char_poly(p: &ParamPoint) -> PolyCoeffs {
    let u = diag_factor(p);
    let v = Complex64::new(p.xi, p.zeta);
    PolyCoeffs::monic(v, -(u * u) * 2.0 - 2.0, -(v * u * u) * 2.0)
}

/// Eigenvalues, unordered.
pub fn eigenvalues(p: &ParamPoint) -> [Complex64; 3] {
    char_poly(p).roots()
}

pub fn eigensystem(p: &ParamPoint) -> Eigensystem {
    let h = build_h_ep(p);
    let w = eigenvalues(p);
    let gap = min_gap(&w);
    let is_degenerate = gap < DEGENERACY_GAP;
    let mut right_vectors = [[C0; 3]; 3];
    let mut left_vectors = [[C0; 3]; 3];
    for k in 0..3 {
        let shifted: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| if i == j { h[i][j] - w[k] } else { h[i][j] }));
        let r = null_vector(&shifted);
        let l = null_vector(&linalg::transpose(&shifted));
        let rn = linalg::norm(&r);
        let r = linalg::scale(&r, Complex64::new(1.0 / rn, 0.0));
        let lr = linalg::dot(&l, &r);
        let l = if is_degenerate || lr.norm() < f64::EPSILON {
            let ln = linalg::norm(&l);
            linalg::scale(&l, Complex64::new(1.0 / ln, 0.0))
        } else {
            linalg::scale(&l, lr.inv())
        };
        right_vectors[k] = r;
        left_vectors[k] = l;
    }
    Eigensystem { point: *p, eigenvalues: w, right_vectors, left_vectors, min_gap: gap, is_degenerate }
}

/// Null vector of a rank-deficient `3×3` matrix from the best-conditioned
/// cross product of two of its rows.
fn null_vector(a: &Mat3) -> Vec3 {
    let candidates = [linalg::cross(&a[0], &a[1]), linalg::cross(&a[1], &a[2]), linalg::cross(&a[0], &a[2])];
    let best = candidates.iter().copied().max_by(|x, y| linalg::norm(x).total_cmp(&linalg::norm(y))).unwrap_or([C0; 3]);
    if linalg::norm(&best) > 0.0 {
        best
    } else {
        // rank one or zero: any vector orthogonal (bilinearly) to the largest row
        let row = a.iter().copied().max_by(|x, y| linalg::norm(x).total_cmp(&linalg::norm(y))).unwrap_or([C0; 3]);
        let e = [[C1, C0, C0], [C0, C1, C0], [C0, C0, C1]];
        let v = e.iter().map(|e| linalg::cross(&row, e)).max_by(|x, y| linalg::norm(x).total_cmp(&linalg::norm(y))).unwrap_or([C0; 3]);
        if linalg::norm(&v) > 0.0 {
            v
        } else {
            [C1, C0, C0]
        }
    }
}

/// Exact discriminant via the Sylvester matrix of `p` and `p'`.
pub fn discriminant(p: &ParamPoint) -> Complex64 {
    char_poly(p).sylvester_discriminant()
}

/// Gradient of the discriminant with respect to `(eta, zeta, xi, g)`.
pub fn discriminant_gradient(p: &ParamPoint) -> [Complex64; 4] {
    let c = char_poly(p);
    let [d2, d1, d0] = c.discriminant_partials();
    let u = diag_factor(p);
    let v = Complex64::new(p.xi, p.zeta);
    // coefficient derivatives, columns (a2, a1, a0)
    let by_eta = [C0, -u * 4.0, -v * u * 4.0];
    let by_zeta = [I, C0, -(u * u) * I * 2.0];
    let by_xi = [C1, C0, -(u * u) * 2.0];
    let by_g = [C0, -u * I * 4.0, -v * u * I * 4.0];
    [by_eta, by_zeta, by_xi, by_g].map(|da| d2 * da[0] + d1 * da[1] + d0 * da[2])
}

/// Third-order small-parameter expansion of the discriminant, term by term.
pub fn discriminant_small_param(p: &ParamPoint) -> Complex64 {
    let (e, z, x, g) = (p.eta, p.zeta, p.xi, p.g);
    let re = -72.0 * x * x * z - 144.0 * x * e * z - 27.0 * x * x + 27.0 * z * z + 192.0 * e * e * g + 72.0 * z * z * g - 64.0 * g * g * g;
    let im = 72.0 * x * x * e - 64.0 * e * e * e - 144.0 * x * z * g - 72.0 * z * z * e - 54.0 * x * z + 192.0 * e * g * g;
    Complex64::new(re, im)
}

/// Map a dimensionless eigenvalue to rad/s: `(ω0 + iγ0) + |κ| ω̃`.
pub fn to_physical(omega: Complex64, scale: &PhysicalScale) -> Complex64 {
    scale.center() + omega * scale.kappa.abs()
}

/// Inverse of [`to_physical`].
pub fn to_dimensionless(omega: Complex64, scale: &PhysicalScale) -> Complex64 {
    (omega - scale.center()) / scale.kappa.abs()
}

/// `∏_{i<j} (ω_i - ω_j)^2`.
pub fn discriminant_from_roots(w: &[Complex64; 3]) -> Complex64 {
    let d = (w[0] - w[1]) * (w[0] - w[2]) * (w[1] - w[2]);
    d * d
}
