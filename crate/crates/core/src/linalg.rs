//! Small dense helpers over nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending
/// order. The input is symmetrized first.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Real symmetric eigen-decomposition, eigenvalues descending.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let h = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// `max |M - M*|` relative to `max |M|`.
pub fn hermitian_residual(m: &DMatrix<C64>) -> f64 {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `(positive, negative, zero)` counts with `|λ| ≤ tol·max|λ|` counted as zero.
pub fn inertia(eigs: &[f64], rel_tol: f64) -> (usize, usize, usize) {
    let scale = eigs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cut = rel_tol * scale;
    let pos = eigs.iter().filter(|&&x| x > cut).count();
    let neg = eigs.iter().filter(|&&x| x < -cut).count();
    (pos, neg, eigs.len() - pos - neg)
}

/// Writes a positive semidefinite Hermitian matrix as `Σ_k v_k v_k*`,
/// keeping eigenvalues above `cut`. Returns the vectors (descending by
/// eigenvalue) and the least eigenvalue.
pub fn psd_factor(m: &DMatrix<C64>, cut: f64) -> (Vec<DVector<C64>>, f64) {
    let (vals, vecs) = eigh(m);
    let min = vals.last().copied().unwrap_or(0.0);
    let factors = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > cut)
        .map(|(k, &v)| vecs.column(k).into_owned() * C64::new(v.sqrt(), 0.0))
        .collect();
    (factors, min)
}

/// Complex identity matrix.
pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// `max |U*U - I|`.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let g = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Largest eigenvalue modulus of a Hermitian matrix.
pub fn herm_norm(m: &DMatrix<C64>) -> f64 {
    let (vals, _) = eigh(m);
    vals.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
