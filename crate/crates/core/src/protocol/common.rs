//! Helpers shared by the protocol runners.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tensor::{DensityMatrix, Gate, Subsystem, StateVector, SubsystemId, CHAINED_TOL};

use super::session::Verdict;

/// Bound used by every "equal up to global phase" verdict.
pub const OVERLAP_BOUND: f64 = 1.0 - CHAINED_TOL;

pub(crate) fn qubit(label: &str, amps: [C64; 2]) -> Result<StateVector> {
    StateVector::new(alloc::vec![Subsystem::qubit(label)], amps.to_vec())
}

pub(crate) fn plus(label: &str) -> StateVector {
    let h = crate::linalg::r(core::f64::consts::FRAC_1_SQRT_2);
    qubit(label, [h, h]).expect("|+> is normalized")
}

/// `q^{⊗n}` over the given labels.
pub(crate) fn product(labels: &[String], q: [C64; 2]) -> Result<StateVector> {
    StateVector::product(labels.iter().map(|l| (Subsystem::qubit(l.as_str()), q.to_vec())).collect())
}

pub(crate) fn strs(labels: &[String]) -> Vec<&str> {
    labels.iter().map(String::as_str).collect()
}

/// The state with `labels` moved to the front, in that order.
pub(crate) fn front(state: &StateVector, labels: &[&str]) -> Result<StateVector> {
    let mut order = labels.iter().map(|l| state.id(l)).collect::<Result<Vec<_>>>()?;
    for i in 0..state.num_subsystems() {
        if !order.contains(&SubsystemId(i)) {
            order.push(SubsystemId(i));
        }
    }
    state.permute(&order)
}

/// `|<target|state>|` after putting `state` in `target`'s label order.
pub(crate) fn overlap(state: &StateVector, target: &StateVector) -> Result<f64> {
    let labels: Vec<&str> = target.subsystems().iter().map(|s| s.label.as_str()).collect();
    if labels.len() != state.num_subsystems() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: state.num_subsystems() });
    }
    Ok(state.permute_labels(&labels)?.inner(target)?.norm())
}

/// Reduced state on `labels`, in that order.
pub(crate) fn reduced(state: &StateVector, labels: &[&str]) -> Result<DensityMatrix> {
    let s = front(state, labels)?;
    let keep: Vec<SubsystemId> = (0..labels.len()).map(SubsystemId).collect();
    s.partial_trace(&keep)
}

/// `<t|rho|t>` for the reduced state on `target`'s labels.
pub(crate) fn reduced_fidelity(state: &StateVector, target: &StateVector) -> Result<f64> {
    let labels: Vec<&str> = target.subsystems().iter().map(|s| s.label.as_str()).collect();
    reduced(state, &labels)?.fidelity(target)
}

pub(crate) fn overlap_verdict(name: impl Into<String>, state: &StateVector, target: &StateVector) -> Result<Verdict> {
    Ok(Verdict::at_least(name, overlap(state, target)?, OVERLAP_BOUND))
}

/// One verdict per receiver comparing its reduced state with `q`.
pub(crate) fn per_receiver_verdicts(state: &StateVector, labels: &[String], q: [C64; 2]) -> Result<Vec<Verdict>> {
    labels
        .iter()
        .map(|l| {
            let f = reduced_fidelity(state, &qubit(l, q)?)?;
            Ok(Verdict::at_least(format!("{l} fidelity"), f, OVERLAP_BOUND))
        })
        .collect()
}

/// Applies `gate` to the subsystems `labels` of a standalone state.
pub(crate) fn apply_on(state: &StateVector, gate: &Gate, labels: &[&str]) -> Result<StateVector> {
    let ids = labels.iter().map(|l| state.id(l)).collect::<Result<Vec<_>>>()?;
    state.apply(&gate.on(&ids)?)
}

pub(crate) fn party_names(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        alloc::vec![prefix.to_string()]
    } else {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }
}
