//! Fixed-size dense linear algebra for the 3×3 problems in this crate.

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;
use num_traits::Zero;

pub type Vec3 = [Complex64; 3];
pub type Mat3 = [[Complex64; 3]; 3];

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat3 {
    let mut m = [[C0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C1;
    }
    m
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[C0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn matvec(a: &Mat3, v: &Vec3) -> Vec3 {
    core::array::from_fn(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

/// Row covector times matrix, `u^T A`.
pub fn vecmat(u: &Vec3, a: &Mat3) -> Vec3 {
    core::array::from_fn(|j| (0..3).map(|k| u[k] * a[k][j]).sum())
}

pub fn transpose(a: &Mat3) -> Mat3 {
    core::array::from_fn(|i| core::array::from_fn(|j| a[j][i]))
}

/// Unconjugated bilinear product `sum u_i v_i`.
pub fn dot(u: &Vec3, v: &Vec3) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Hermitian inner product `sum conj(u_i) v_i`.
pub fn hdot(u: &Vec3, v: &Vec3) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale(v: &Vec3, s: Complex64) -> Vec3 {
    core::array::from_fn(|i| v[i] * s)
}

/// Bilinear cross product: the result is annihilated by both `u` and `v`
/// under [`dot`].
pub fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

pub fn det3(a: &Mat3) -> Complex64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse through the adjugate. Returns `None` for a singular matrix.
pub fn inverse3(a: &Mat3) -> Option<Mat3> {
    let det = det3(a);
    if det.is_zero() || !det.re.is_finite() || !det.im.is_finite() {
        return None;
    }
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    Some(core::array::from_fn(|i| core::array::from_fn(|j| adj[i][j] / det)))
}

/// Max-entry norm.
pub fn max_abs(a: &Mat3) -> f64 {
    a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(a: &Mat3) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &Mat3, b: &Mat3) -> Mat3 {
    core::array::from_fn(|i| core::array::from_fn(|j| a[i][j] - b[i][j]))
}

/// Determinant of a small dense complex matrix by Gaussian elimination with
/// partial pivoting.
pub fn det_n<const N: usize>(mut a: [[Complex64; N]; N]) -> Complex64 {
    let mut det = C1;
    for col in 0..N {
        let pivot = (col..N).max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm())).unwrap_or(col);
        if a[pivot][col].is_zero() {
            return C0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..N {
            let factor = a[r][col] / p;
            if factor.is_zero() {
                continue;
            }
            for c in col..N {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
        }
    }
    det
}

/// Solve a real `N×N` system with partial pivoting. `None` when singular.
pub fn solve_real<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Solve a complex `N×N` system with partial pivoting.
pub fn solve_complex<const N: usize>(mut a: [[Complex64; N]; N], mut b: [Complex64; N]) -> Option<[Complex64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))?;
        if a[pivot][col].is_zero() {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = [C0; N];
    for r in (0..N).rev() {
        let s: Complex64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn cross_real(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

pub fn norm_real(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Singular values `(s_max, s_min)` of a real `2×3` matrix.
pub fn singular_values_2x3(rows: &[[f64; 3]; 2]) -> (f64, f64) {
    // eigenvalues of the 2×2 Gram matrix: trace and determinant suffice
    let tr = rows.iter().flatten().map(|x| x * x).sum::<f64>();
    let det = norm_real(&cross_real(&rows[0], &rows[1])).powi(2);
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = if l1 > 0.0 { det / l1 } else { 0.0 };
    (l1.max(0.0).sqrt(), l2.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let a: Mat3 = [
            [Complex64::new(1.0, 2.0), Complex64::new(0.5, 0.0), C0],
            [Complex64::new(0.5, 0.0), Complex64::new(-1.0, 0.3), C1],
            [C0, C1, Complex64::new(0.2, -1.0)],
        ];
        let inv = inverse3(&a).unwrap();
        let prod = matmul(&a, &inv);
        assert!(max_abs(&sub(&prod, &identity())) < 1e-14);
    }

    #[test]
    fn det_n_matches_det3() {
        let a: Mat3 = [
            [Complex64::new(0.0, 2.0), Complex64::new(3.0, 0.0), C1],
            [C1, Complex64::new(0.0, -1.0), C1],
            [Complex64::new(2.0, 1.0), C0, Complex64::new(0.5, 0.5)],
        ];
        assert!((det_n(a) - det3(&a)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a: Mat3 = [[C1, C1, C0], [C1, C1, C0], [C0, C0, C1]];
        assert!(inverse3(&a).is_none());
        assert_eq!(det_n(a), C0);
    }

    #[test]
    fn real_solve() {
        let x = solve_real([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve_real([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }

    #[test]
    fn singular_values_of_rank_one() {
        let (s1, s2) = singular_values_2x3(&[[1.0, 2.0, 2.0], [2.0, 4.0, 4.0]]);
        assert!((s1 - 45f64.sqrt()).abs() < 1e-12);
        assert!(s2 < 1e-7);
    }
}
