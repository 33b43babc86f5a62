//! Small dense complex linear-algebra helpers on top of `nalgebra`.

#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `e^{i phi}`.
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn diag(entries: &[C64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(entries))
}

pub fn from_rows(n: usize, m: usize, rows: &[C64]) -> Matrix {
    Matrix::from_row_slice(n, m, rows)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_unitary(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&(m.adjoint() * m), &identity(m.nrows())) <= tol
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&m.adjoint(), m) <= tol
}

pub fn is_diagonal(m: &Matrix) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == ZERO))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let h = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let vectors = Matrix::from_fn(n, n, |row, col| eig.eigenvectors[(row, order[col])]);
    (values, vectors)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &Matrix) -> Matrix {
    let (values, vectors) = hermitian_eigen(m);
    let roots: Vec<C64> = values.iter().map(|&v| r(v.max(0.0).sqrt())).collect();
    &vectors * diag(&roots) * vectors.adjoint()
}

/// `|v><v|` for a column vector given as a slice.
pub fn outer(v: &[C64]) -> Matrix {
    let n = v.len();
    Matrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense matrix-vector product.
pub fn mat_vec(m: &Matrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// Spectral (operator) norm of a Hermitian matrix.
pub fn hermitian_op_norm(m: &Matrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Binomial coefficient as `f64`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Fixed-point `e^{i theta P}` for an involutory Hermitian `P` (Pauli-like).
pub fn involution_exp(p: &Matrix, theta: f64) -> Matrix {
    identity(p.nrows()) * r(theta.cos()) + p * c(0.0, theta.sin())
}
