#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{split_layout, DensityMatrix, LocalOperator, Subsystem, SubsystemId, ALGEBRAIC_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};

/// Largest register (product of dimensions) the engine accepts.
pub const MAX_AMPLITUDES: usize = 1 << 22;

/// A normalized pure state over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    subsystems: Vec<Subsystem>,
    amps: Vec<C64>,
}

fn check_register(subsystems: &[Subsystem]) -> Result<usize> {
    let mut size: usize = 1;
    for (i, s) in subsystems.iter().enumerate() {
        if s.dim < 2 {
            return Err(Error::InvalidDimension(s.dim));
        }
        if subsystems[..i].iter().any(|o| o.label == s.label) {
            return Err(Error::DuplicateSubsystem(s.label.clone()));
        }
        size = size
            .checked_mul(s.dim)
            .filter(|&n| n <= MAX_AMPLITUDES)
            .ok_or(Error::RegisterTooLarge { size: usize::MAX, limit: MAX_AMPLITUDES })?;
    }
    Ok(size)
}

fn normalized(mut amps: Vec<C64>) -> Result<Vec<C64>> {
    let n = linalg::norm(&amps);
    if n < 1e-300 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let inv = 1.0 / n;
    amps.iter_mut().for_each(|a| *a *= inv);
    Ok(amps)
}

/// Default labels `q0, q1, ...` for anonymous registers.
fn anonymous(dims: &[usize]) -> Vec<Subsystem> {
    dims.iter().enumerate().map(|(i, &d)| Subsystem::new(format!("q{i}"), d)).collect()
}

impl StateVector {
    /// Builds a state from a full amplitude array, normalizing it.
    pub fn new(subsystems: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        let size = check_register(&subsystems)?;
        if amps.len() != size {
            return Err(Error::DimensionMismatch { expected: size, found: amps.len() });
        }
        Ok(Self { subsystems, amps: normalized(amps)? })
    }

    /// Builds a state with anonymous labels.
    pub fn from_amplitudes(dims: &[usize], amps: Vec<C64>) -> Result<Self> {
        Self::new(anonymous(dims), amps)
    }

    /// Product of per-subsystem local vectors (each normalized independently).
    pub fn product(factors: Vec<(Subsystem, Vec<C64>)>) -> Result<Self> {
        let subsystems: Vec<Subsystem> = factors.iter().map(|(s, _)| s.clone()).collect();
        check_register(&subsystems)?;
        let mut amps = alloc::vec![linalg::ONE];
        for (sub, v) in factors {
            if v.len() != sub.dim {
                return Err(Error::DimensionMismatch { expected: sub.dim, found: v.len() });
            }
            let v = normalized(v)?;
            amps = amps.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        }
        Ok(Self { subsystems, amps })
    }

    /// Computational basis state with the given digits.
    pub fn basis(subsystems: Vec<Subsystem>, digits: &[usize]) -> Result<Self> {
        if digits.len() != subsystems.len() {
            return Err(Error::DimensionMismatch { expected: subsystems.len(), found: digits.len() });
        }
        let factors = subsystems
            .into_iter()
            .zip(digits)
            .map(|(s, &d)| {
                let mut v = alloc::vec![ZERO; s.dim];
                if d >= s.dim {
                    return Err(Error::OutOfRange { what: "basis digit", value: d as i64, bound: s.dim as i64 });
                }
                v[d] = linalg::ONE;
                Ok((s, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::product(factors)
    }

    /// The trivial register with no subsystems and amplitude 1.
    pub fn empty() -> Self {
        Self { subsystems: Vec::new(), amps: alloc::vec![linalg::ONE] }
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut Vec<C64> {
        &mut self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    /// True for the trivial register left after every subsystem was consumed.
    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn num_subsystems(&self) -> usize {
        self.subsystems.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    /// Looks a subsystem up by label.
    pub fn id(&self, label: &str) -> Result<SubsystemId> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .map(SubsystemId)
            .ok_or_else(|| Error::SubsystemNotFound(String::from(label)))
    }

    pub fn subsystem(&self, id: SubsystemId) -> Result<&Subsystem> {
        self.subsystems.get(id.0).ok_or_else(|| Error::SubsystemNotFound(format!("{id}")))
    }

    /// Amplitude of a computational basis state given by its digits.
    pub fn amplitude(&self, digits: &[usize]) -> C64 {
        let idx = digits.iter().zip(&self.subsystems).fold(0, |acc, (&d, s)| acc * s.dim + d);
        self.amps[idx]
    }

    /// `self ⊗ other`, with `other`'s subsystems appended.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        check_register(&subsystems)?;
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Ok(Self { subsystems, amps })
    }

    pub(crate) fn target_dims(&self, targets: &[SubsystemId]) -> Result<Vec<usize>> {
        let mut dims = Vec::with_capacity(targets.len());
        for (i, t) in targets.iter().enumerate() {
            let sub = self.subsystem(*t)?;
            if targets[..i].contains(t) {
                return Err(Error::DuplicateSubsystem(sub.label.clone()));
            }
            dims.push(sub.dim);
        }
        Ok(dims)
    }

    /// Applies a local operator. Non-unitary operators are applied verbatim
    /// and the result renormalized.
    pub fn apply(&self, op: &LocalOperator) -> Result<Self> {
        let mut out = self.clone();
        out.apply_in_place(op)?;
        Ok(out)
    }

    pub(crate) fn apply_in_place(&mut self, op: &LocalOperator) -> Result<()> {
        let tdims = self.target_dims(op.targets())?;
        let local: usize = tdims.iter().product();
        if op.matrix().nrows() != local {
            return Err(Error::DimensionMismatch { expected: local, found: op.matrix().nrows() });
        }
        let targets: Vec<usize> = op.targets().iter().map(|t| t.0).collect();
        let (toff, bases) = split_layout(&self.dims(), &targets);
        let m = op.matrix();
        if op.is_diagonal() {
            let d: Vec<C64> = (0..local).map(|i| m[(i, i)]).collect();
            for &b in &bases {
                for (l, &o) in toff.iter().enumerate() {
                    self.amps[b + o] *= d[l];
                }
            }
        } else {
            let mut buf = alloc::vec![ZERO; local];
            for &b in &bases {
                for (l, &o) in toff.iter().enumerate() {
                    buf[l] = self.amps[b + o];
                }
                for (row, &o) in toff.iter().enumerate() {
                    let mut acc = ZERO;
                    for (col, x) in buf.iter().enumerate() {
                        acc += m[(row, col)] * x;
                    }
                    self.amps[b + o] = acc;
                }
            }
        }
        if !op.is_unitary() {
            self.amps = normalized(core::mem::take(&mut self.amps))?;
        }
        Ok(())
    }

    /// Reorders subsystems so that `order[i]` becomes position `i`.
    pub fn permute(&self, order: &[SubsystemId]) -> Result<Self> {
        if order.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch { expected: self.subsystems.len(), found: order.len() });
        }
        self.target_dims(order)?;
        let idx: Vec<usize> = order.iter().map(|o| o.0).collect();
        let (src, _) = split_layout(&self.dims(), &idx);
        let amps = src.iter().map(|&o| self.amps[o]).collect();
        let subsystems = idx.iter().map(|&i| self.subsystems[i].clone()).collect();
        Ok(Self { subsystems, amps })
    }

    /// Reorders subsystems to match the given label sequence.
    pub fn permute_labels(&self, labels: &[&str]) -> Result<Self> {
        let order = labels.iter().map(|l| self.id(l)).collect::<Result<Vec<_>>>()?;
        self.permute(&order)
    }

    pub fn with_labels(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch { expected: self.subsystems.len(), found: labels.len() });
        }
        let subsystems: Vec<Subsystem> =
            self.subsystems.iter().zip(labels).map(|(s, l)| Subsystem::new(*l, s.dim)).collect();
        check_register(&subsystems)?;
        Ok(Self { subsystems, amps: self.amps.clone() })
    }

    fn check_same_dims(&self, other: &StateVector) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_dims(other)?;
        Ok(linalg::inner(&self.amps, &other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// True iff `|<a|b>| >= 1 - tol`; false on any dimension mismatch.
    pub fn equal_up_to_global_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.inner(other).map(|z| z.norm() >= 1.0 - tol).unwrap_or(false)
    }

    /// Largest entrywise deviation from `other` (no phase alignment).
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `<self|op|self>`, where `op` need not be unitary.
    pub fn expectation(&self, op: &LocalOperator) -> Result<C64> {
        let tdims = self.target_dims(op.targets())?;
        let local: usize = tdims.iter().product();
        if op.matrix().nrows() != local {
            return Err(Error::DimensionMismatch { expected: local, found: op.matrix().nrows() });
        }
        let targets: Vec<usize> = op.targets().iter().map(|t| t.0).collect();
        let (toff, bases) = split_layout(&self.dims(), &targets);
        let m = op.matrix();
        let mut acc = ZERO;
        for &b in &bases {
            for (row, &ro) in toff.iter().enumerate() {
                let bra = self.amps[b + ro].conj();
                if bra == ZERO {
                    continue;
                }
                for (col, &co) in toff.iter().enumerate() {
                    acc += bra * m[(row, col)] * self.amps[b + co];
                }
            }
        }
        Ok(acc)
    }

    /// Reduced density matrix over `keep`, in register order.
    pub fn partial_trace(&self, keep: &[SubsystemId]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        self.target_dims(keep)?;
        let mut kept: Vec<usize> = keep.iter().map(|k| k.0).collect();
        kept.sort_unstable();
        let (koff, eoff) = split_layout(&self.dims(), &kept);
        let n = koff.len();
        let mut mat = linalg::Matrix::zeros(n, n);
        for &e in &eoff {
            for (i, &oi) in koff.iter().enumerate() {
                let a = self.amps[e + oi];
                if a == ZERO {
                    continue;
                }
                for (j, &oj) in koff.iter().enumerate() {
                    mat[(i, j)] += a * self.amps[e + oj].conj();
                }
            }
        }
        let subsystems = kept.iter().map(|&k| self.subsystems[k].clone()).collect();
        Ok(DensityMatrix::from_parts_unchecked(subsystems, mat))
    }

    /// Density matrix `|self><self|`.
    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts_unchecked(self.subsystems.clone(), linalg::outer(&self.amps))
    }

    /// Von Neumann entropy (bits) of the reduced state on `part`.
    pub fn entanglement_entropy(&self, part: &[SubsystemId]) -> Result<f64> {
        Ok(self.partial_trace(part)?.entropy())
    }

    /// Projects `target` onto `vector` and removes it from the register.
    /// Returns the probability and, when nonzero, the normalized remainder.
    pub fn project_out(&self, target: SubsystemId, vector: &[C64]) -> Result<(f64, Option<Self>)> {
        let dim = self.subsystem(target)?.dim;
        if vector.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: vector.len() });
        }
        let (toff, bases) = split_layout(&self.dims(), &[target.0]);
        let amps: Vec<C64> =
            bases.iter().map(|&b| toff.iter().zip(vector).map(|(&o, v)| v.conj() * self.amps[b + o]).sum()).collect();
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let mut subsystems = self.subsystems.clone();
        subsystems.remove(target.0);
        if p <= super::IMPOSSIBLE_PROBABILITY {
            return Ok((p, None));
        }
        let inv = 1.0 / p.sqrt();
        Ok((p, Some(Self { subsystems, amps: amps.into_iter().map(|a| a * inv).collect() })))
    }

    /// Checks the unit-norm invariant.
    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= ALGEBRAIC_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};
    use alloc::vec;

    fn plus() -> Vec<C64> {
        vec![r(1.0), r(1.0)]
    }

    #[test]
    fn basis_state_amplitudes() {
        let s = StateVector::product(vec![(Subsystem::qubit("a"), vec![r(1.0), r(0.0)])]).unwrap();
        assert_eq!(s.amplitudes(), &[r(1.0), r(0.0)]);
    }

    #[test]
    fn product_of_plus_states_is_uniform() {
        let s = StateVector::product(vec![(Subsystem::qubit("a"), plus()), (Subsystem::qubit("b"), plus())]).unwrap();
        for a in s.amplitudes() {
            assert!((a - r(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn mixed_radix_order_puts_first_subsystem_most_significant() {
        let subs = vec![Subsystem::new("a", 3), Subsystem::qubit("b")];
        let s = StateVector::basis(subs, &[2, 1]).unwrap();
        assert_eq!(s.amplitudes()[5], r(1.0));
        assert_eq!(s.amplitude(&[2, 1]), r(1.0));
    }

    #[test]
    fn rejects_bad_registers() {
        assert!(matches!(StateVector::from_amplitudes(&[2], vec![r(0.0), r(0.0)]), Err(Error::ZeroVector)));
        assert!(matches!(
            StateVector::from_amplitudes(&[2, 2], vec![r(1.0); 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        assert!(matches!(StateVector::from_amplitudes(&[1], vec![r(1.0)]), Err(Error::InvalidDimension(1))));
        let big = vec![Subsystem::qubit("x"); 1];
        assert!(StateVector::new(big, vec![r(1.0), r(0.0)]).is_ok());
        let many: Vec<Subsystem> = (0..23).map(|i| Subsystem::qubit(format!("q{i}"))).collect();
        assert!(matches!(check_register(&many), Err(Error::RegisterTooLarge { .. })));
        let dup = vec![Subsystem::qubit("x"), Subsystem::qubit("x")];
        assert!(matches!(check_register(&dup), Err(Error::DuplicateSubsystem(_))));
    }

    #[test]
    fn permute_moves_digits() {
        let subs = vec![Subsystem::new("a", 3), Subsystem::qubit("b")];
        let s = StateVector::basis(subs, &[2, 1]).unwrap();
        let p = s.permute_labels(&["b", "a"]).unwrap();
        assert_eq!(p.dims(), vec![2, 3]);
        assert_eq!(p.amplitude(&[1, 2]), r(1.0));
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(&[2, 2], vec![r(h), r(0.0), r(0.0), r(h)]).unwrap();
        let rho = bell.partial_trace(&[SubsystemId(0)]).unwrap();
        let expect = linalg::identity(2) * r(0.5);
        assert!(linalg::max_abs_diff(rho.matrix(), &expect) < 1e-15);
        assert!((bell.entanglement_entropy(&[SubsystemId(1)]).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(bell.partial_trace(&[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn partial_trace_of_product_keeps_factor() {
        let s = StateVector::product(vec![(Subsystem::qubit("a"), vec![r(1.0), r(0.0)]), (Subsystem::qubit("b"), plus())])
            .unwrap();
        let rho = s.partial_trace(&[SubsystemId(0)]).unwrap();
        assert!(linalg::max_abs_diff(rho.matrix(), &linalg::diag(&[r(1.0), r(0.0)])) < 1e-15);
    }

    #[test]
    fn global_phase_comparison() {
        let a = StateVector::from_amplitudes(&[2], vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let phase = linalg::cis(1.234);
        let b = StateVector::from_amplitudes(&[2], a.amplitudes().iter().map(|x| x * phase).collect()).unwrap();
        assert!(a.equal_up_to_global_phase(&b, 1e-12));
        let zero = StateVector::from_amplitudes(&[2], vec![r(1.0), r(0.0)]).unwrap();
        let one = StateVector::from_amplitudes(&[2], vec![r(0.0), r(1.0)]).unwrap();
        assert!(!zero.equal_up_to_global_phase(&one, 1e-12));
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert!((zero.fidelity(&zero).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn project_out_removes_subsystem() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(&[2, 2], vec![r(h), r(0.0), r(0.0), r(h)]).unwrap();
        let (p, rest) = bell.project_out(SubsystemId(0), &[r(0.0), r(1.0)]).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let rest = rest.unwrap();
        assert_eq!(rest.dims(), vec![2]);
        assert!((rest.amplitudes()[1] - r(1.0)).norm() < 1e-15);
        let (p, rest) = rest.project_out(SubsystemId(0), &[r(1.0), r(0.0)]).unwrap();
        assert!(p < 1e-30 && rest.is_none());
    }

    #[test]
    fn apply_cz_flips_eleven() {
        let s = StateVector::basis(vec![Subsystem::qubit("a"), Subsystem::qubit("b")], &[1, 1]).unwrap();
        let cz = LocalOperator::new(vec![SubsystemId(0), SubsystemId(1)], linalg::diag(&[r(1.0), r(1.0), r(1.0), r(-1.0)]))
            .unwrap();
        assert_eq!(s.apply(&cz).unwrap().amplitude(&[1, 1]), r(-1.0));
    }

    #[test]
    fn apply_on_non_adjacent_targets_matches_embedding() {
        let s = StateVector::from_amplitudes(&[2, 3, 2], (0..12).map(|k| c(k as f64, 1.0 - k as f64)).collect()).unwrap();
        let m = linalg::from_rows(4, 4, &(0..16).map(|k| c((k % 5) as f64, (k % 3) as f64)).collect::<Vec<_>>());
        let op = LocalOperator::new(vec![SubsystemId(2), SubsystemId(0)], m.clone()).unwrap();
        let got = s.apply(&op).unwrap();
        // Oracle: explicit digit loops, row/col = 2 * d2 + d0.
        let mut want = vec![r(0.0); 12];
        for d0 in 0..2 {
            for d1 in 0..3 {
                for d2 in 0..2 {
                    let row = 2 * d2 + d0;
                    for e0 in 0..2 {
                        for e2 in 0..2 {
                            let col = 2 * e2 + e0;
                            want[d0 * 6 + d1 * 2 + d2] += m[(row, col)] * s.amplitudes()[e0 * 6 + d1 * 2 + e2];
                        }
                    }
                }
            }
        }
        let want = StateVector::from_amplitudes(&s.dims(), want).unwrap();
        assert!(got.max_abs_diff(&want).unwrap() < 1e-12);
    }
}
