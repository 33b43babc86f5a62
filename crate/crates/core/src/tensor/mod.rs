//! Mixed-radix dense statevector and density-matrix engine.
//!
//! Amplitudes are stored in mixed-radix order with subsystem 0 as the most
//! significant digit. Every public operation returns a new value; states are
//! never mutated through a shared reference.

mod density;
mod measurement;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use measurement::{sample_index, Branch, Measurement, MeasurementBasis, Povm, IMPOSSIBLE_PROBABILITY};
pub use operator::{Gate, LocalOperator};
pub use state::{StateVector, MAX_AMPLITUDES};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Tolerance used for algebraic identities (unitarity, normalization, Gram matrices).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance used for checks after chains of operations.
pub const CHAINED_TOL: f64 = 1e-10;

/// Position of a subsystem within a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsystemId(pub usize);

impl fmt::Display for SubsystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A named register slot of fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), dim }
    }

    pub fn qubit(label: impl Into<String>) -> Self {
        Self::new(label, 2)
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = alloc::vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * dims[i + 1];
    }
    out
}

/// All offsets `sum_j digit_j * stride_j` over the listed subsystems, with the
/// first listed subsystem as the most significant digit.
pub(crate) fn offsets(dims: &[usize], strides: &[usize], subs: &[usize]) -> Vec<usize> {
    let mut out = alloc::vec![0usize];
    for &s in subs {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for d in 0..dims[s] {
                next.push(base + d * strides[s]);
            }
        }
        out = next;
    }
    out
}

/// Offsets of the subsystems in `targets` and of all remaining subsystems.
pub(crate) fn split_layout(dims: &[usize], targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let st = strides(dims);
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !targets.contains(i)).collect();
    (offsets(dims, &st, targets), offsets(dims, &st, &rest))
}
