//! Small dense complex linear algebra used for validation oracles.
//!
//! Index convention everywhere: qubit 0 is the most significant bit of a
//! basis-state index.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type Mat2 = [[Complex64; 2]; 2];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn mat2_to_dense(m: &Mat2) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, k| m[r][k])
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][k] + a[r][1] * b[1][k];
        }
    }
    out
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, k| a[(r / br, k / bc)] * b[(r % br, k % bc)])
}

/// A single-qubit operator on `qubit` of an `n`-qubit register.
pub fn embed_single(n: usize, qubit: usize, m: &Mat2) -> CMatrix {
    let dim = 1usize << n;
    let shift = n - 1 - qubit;
    CMatrix::from_fn(dim, dim, |r, k| {
        if (r & !(1 << shift)) != (k & !(1 << shift)) {
            return c(0.0, 0.0);
        }
        m[(r >> shift) & 1][(k >> shift) & 1]
    })
}

pub fn cx_matrix(n: usize, control: usize, target: usize) -> CMatrix {
    let dim = 1usize << n;
    let cs = n - 1 - control;
    let ts = n - 1 - target;
    let mut m = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let r = if (k >> cs) & 1 == 1 { k ^ (1 << ts) } else { k };
        m[(r, k)] = c(1.0, 0.0);
    }
    m
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// `min_φ ‖a − e^{iφ} b‖₂`, with φ chosen from the overlap `tr(b†a)`.
pub fn phase_invariant_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: Complex64 = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    spectral_norm(&(a - b * phase))
}

/// Distance of `u†u` from the identity (max entry).
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// `exp(-i h t)` for Hermitian `h`, via the eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    v * phases * v.adjoint()
}
