#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::vec::Vec;

use super::{split_layout, StateVector, Subsystem, SubsystemId, ALGEBRAIC_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64};

/// A density operator over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    subsystems: Vec<Subsystem>,
    matrix: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(subsystems: Vec<Subsystem>, matrix: Matrix) -> Result<Self> {
        let size: usize = subsystems.iter().map(|s| s.dim).product();
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(Error::DimensionMismatch { expected: size, found: matrix.nrows() });
        }
        if !linalg::is_hermitian(&matrix, ALGEBRAIC_TOL) {
            return Err(Error::InvalidParameter("density matrix is not Hermitian".into()));
        }
        if (matrix.trace().re - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter("density matrix trace is not one".into()));
        }
        let (values, _) = linalg::hermitian_eigen(&matrix);
        if values.iter().any(|&v| v < -1e-10) {
            return Err(Error::InvalidParameter("density matrix is not positive".into()));
        }
        Ok(Self { subsystems, matrix })
    }

    pub(crate) fn from_parts_unchecked(subsystems: Vec<Subsystem>, matrix: Matrix) -> Self {
        Self { subsystems, matrix }
    }

    /// Convex mixture `sum_i w_i rho_i` over a shared register.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidParameter("empty mixture".into()))?;
        let mut m = Matrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if rho.dim() != first.1.dim() {
                return Err(Error::DimensionMismatch { expected: first.1.dim(), found: rho.dim() });
            }
            m += &rho.matrix * linalg::r(*w);
        }
        Ok(Self { subsystems: first.1.subsystems.clone(), matrix: m })
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues().iter().filter(|&&v| v > 1e-14).map(|&v| -v * v.log2()).sum::<f64>().max(0.0)
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity(&self, pure: &StateVector) -> Result<f64> {
        if pure.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: pure.len() });
        }
        let v = linalg::mat_vec(&self.matrix, pure.amplitudes());
        Ok(linalg::inner(pure.amplitudes(), &v).re)
    }

    /// Reduced state over `keep`, in register order.
    pub fn partial_trace(&self, keep: &[SubsystemId]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut kept: Vec<usize> = keep.iter().map(|k| k.0).collect();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&k| k >= self.subsystems.len()) {
            return Err(Error::SubsystemNotFound(alloc::format!("#{bad}")));
        }
        let dims: Vec<usize> = self.subsystems.iter().map(|s| s.dim).collect();
        let (koff, eoff) = split_layout(&dims, &kept);
        let n = koff.len();
        let mut out = Matrix::zeros(n, n);
        for &e in &eoff {
            for (i, &oi) in koff.iter().enumerate() {
                for (j, &oj) in koff.iter().enumerate() {
                    out[(i, j)] += self.matrix[(e + oi, e + oj)];
                }
            }
        }
        let subsystems = kept.iter().map(|&k| self.subsystems[k].clone()).collect();
        Ok(Self { subsystems, matrix: out })
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(linalg::max_abs_diff(&self.matrix, &other.matrix))
    }

    /// Operator norm of `self - other`.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(linalg::hermitian_op_norm(&(&self.matrix - &other.matrix)))
    }

    /// `rho_self ⊗ rho_other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        Self { subsystems, matrix: linalg::kron(&self.matrix, &other.matrix) }
    }

    /// Probability-weighted mixture of pure branch states, skipping impossible ones.
    pub fn from_ensemble<'a>(branches: impl IntoIterator<Item = (f64, &'a StateVector)>) -> Result<Self> {
        let mut subsystems = None;
        let mut m: Option<Matrix> = None;
        for (p, s) in branches {
            let o = linalg::outer(s.amplitudes()) * linalg::r(p);
            match &mut m {
                Some(acc) => {
                    if acc.nrows() != o.nrows() {
                        return Err(Error::DimensionMismatch { expected: acc.nrows(), found: o.nrows() });
                    }
                    *acc += o;
                }
                None => {
                    subsystems = Some(s.subsystems().to_vec());
                    m = Some(o);
                }
            }
        }
        let m = m.ok_or(Error::ZeroProbability)?;
        let t = m.trace().re;
        if t <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        Ok(Self { subsystems: subsystems.unwrap_or_default(), matrix: m * C64::new(1.0 / t, 0.0) })
    }
}
