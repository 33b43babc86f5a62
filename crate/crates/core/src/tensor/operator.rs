use alloc::string::String;
use alloc::vec::Vec;

use super::{SubsystemId, ALGEBRAIC_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// An operator matrix not yet placed on a register.
///
/// The matrix acts on the tensor product of `dims`, first entry most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub dims: Vec<usize>,
    pub matrix: Matrix,
}

impl Gate {
    pub fn new(name: impl Into<String>, dims: Vec<usize>, matrix: Matrix) -> Result<Self> {
        let size: usize = dims.iter().product();
        if !matrix.is_square() || matrix.nrows() != size {
            return Err(Error::DimensionMismatch { expected: size, found: matrix.nrows() });
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self { name: name.into(), dims, matrix })
    }

    pub fn on(&self, targets: &[SubsystemId]) -> Result<LocalOperator> {
        if targets.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: targets.len() });
        }
        LocalOperator::named(self.name.clone(), targets.to_vec(), self.matrix.clone())
    }

    pub fn is_unitary(&self) -> bool {
        linalg::is_unitary(&self.matrix, ALGEBRAIC_TOL)
    }

    pub fn adjoint(&self) -> Self {
        let mut name = self.name.clone();
        name.push('†');
        Self { name, dims: self.dims.clone(), matrix: self.matrix.adjoint() }
    }

    /// `self · other` (apply `other` first); both on the same dims.
    pub fn compose(&self, other: &Gate) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), found: other.matrix.nrows() });
        }
        let mut name = self.name.clone();
        name.push('·');
        name.push_str(&other.name);
        Ok(Self { name, dims: self.dims.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// Conjugation `u · self · u†` by a gate on the same dims.
    pub fn conjugated_by(&self, u: &Gate) -> Result<Self> {
        u.compose(self)?.compose(&u.adjoint())
    }
}

/// An operator placed on an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    name: String,
    targets: Vec<SubsystemId>,
    matrix: Matrix,
    unitary: bool,
    diagonal: bool,
}

impl LocalOperator {
    pub fn new(targets: Vec<SubsystemId>, matrix: Matrix) -> Result<Self> {
        Self::named(String::from("op"), targets, matrix)
    }

    pub fn named(name: impl Into<String>, targets: Vec<SubsystemId>, matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::DuplicateSubsystem(alloc::format!("{t}")));
            }
        }
        let unitary = linalg::is_unitary(&matrix, ALGEBRAIC_TOL);
        let diagonal = linalg::is_diagonal(&matrix);
        Ok(Self { name: name.into(), targets, matrix, unitary, diagonal })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn targets(&self) -> &[SubsystemId] {
        &self.targets
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix) <= tol
            && linalg::is_hermitian(&self.matrix, tol)
    }

    /// Matrix of this operator lifted onto `joint` (a superset of its targets),
    /// given the register dimensions.
    pub fn embed(&self, joint: &[SubsystemId], register_dims: &[usize]) -> Result<Matrix> {
        let jdims: Vec<usize> = joint
            .iter()
            .map(|j| register_dims.get(j.0).copied().ok_or(Error::SubsystemNotFound(alloc::format!("{j}"))))
            .collect::<Result<_>>()?;
        let pos: Vec<usize> = self
            .targets
            .iter()
            .map(|t| joint.iter().position(|j| j == t).ok_or(Error::SubsystemNotFound(alloc::format!("{t}"))))
            .collect::<Result<_>>()?;
        let (toff, roff) = super::split_layout(&jdims, &pos);
        let n: usize = jdims.iter().product();
        let mut out = Matrix::zeros(n, n);
        for &b in &roff {
            for (row, &ro) in toff.iter().enumerate() {
                for (col, &co) in toff.iter().enumerate() {
                    out[(b + ro, b + co)] = self.matrix[(row, col)];
                }
            }
        }
        Ok(out)
    }

    /// The operator `second · first` on the union of both target sets
    /// (first's targets, then second's new ones).
    pub fn then(first: &LocalOperator, second: &LocalOperator, register_dims: &[usize]) -> Result<Self> {
        let mut joint = first.targets.clone();
        joint.extend(second.targets.iter().filter(|t| !first.targets.contains(t)));
        let m = second.embed(&joint, register_dims)? * first.embed(&joint, register_dims)?;
        let mut name = second.name.clone();
        name.push('·');
        name.push_str(&first.name);
        Self::named(name, joint, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    #[test]
    fn then_matches_sequential_application() {
        use crate::tensor::StateVector;
        let s = StateVector::from_amplitudes(&[3, 2, 2], (0..12).map(|k| c(1.0 + k as f64, (k * k) as f64 * 0.1)).collect())
            .unwrap();
        let a = LocalOperator::new(
            alloc::vec![SubsystemId(1)],
            linalg::from_rows(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)]),
        )
        .unwrap();
        let phases: alloc::vec::Vec<_> = (0..6).map(|k| linalg::cis(0.3 * k as f64)).collect();
        let b = LocalOperator::new(alloc::vec![SubsystemId(0), SubsystemId(2)], linalg::diag(&phases)).unwrap();
        let seq = s.apply(&a).unwrap().apply(&b).unwrap();
        let joint = LocalOperator::then(&a, &b, &s.dims()).unwrap();
        assert!(seq.max_abs_diff(&s.apply(&joint).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn detects_structure() {
        let p = LocalOperator::new(alloc::vec![SubsystemId(0)], linalg::diag(&[r(1.0), r(0.0)])).unwrap();
        assert!(p.is_projector(1e-12) && !p.is_unitary() && p.is_diagonal());
        assert!(LocalOperator::new(alloc::vec![SubsystemId(0), SubsystemId(0)], linalg::identity(4)).is_err());
    }

    #[test]
    fn gate_adjoint_and_conjugation() {
        let g = Gate::new("S", alloc::vec![2], linalg::diag(&[r(1.0), c(0.0, 1.0)])).unwrap();
        let id = g.compose(&g.adjoint()).unwrap();
        assert!(linalg::max_abs_diff(&id.matrix, &linalg::identity(2)) < 1e-15);
        assert!(g.is_unitary());
        assert!(g.on(&[SubsystemId(0), SubsystemId(1)]).is_err());
    }
}
