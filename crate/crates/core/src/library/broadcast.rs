use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Graph;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::tensor::{Gate, StateVector, Subsystem, ALGEBRAIC_TOL};

/// A diagonal unitary on a block of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhaseGate {
    arity: usize,
    diagonal: Vec<C64>,
}

impl DiagonalPhaseGate {
    pub fn identity(arity: usize) -> Self {
        Self { arity, diagonal: alloc::vec![ONE; 1 << arity] }
    }

    /// Product of `e^{i phi}` factors, each applied when every qubit of its
    /// subset is `|1>`. Subsets index qubits from 0.
    pub fn from_terms(arity: usize, terms: &[(Vec<usize>, f64)]) -> Result<Self> {
        if arity == 0 || arity > 24 {
            return Err(Error::InvalidParameter(format!("phase gate arity {arity} out of range")));
        }
        for (subset, _) in terms {
            if subset.is_empty() {
                return Err(Error::InvalidParameter("phase term with empty subset".into()));
            }
            if let Some(&q) = subset.iter().find(|&&q| q >= arity) {
                return Err(Error::OutOfRange { what: "phase term qubit", value: q as i64, bound: arity as i64 });
            }
        }
        let diagonal = (0..1usize << arity)
            .map(|x| {
                let phase: f64 = terms
                    .iter()
                    .filter(|(subset, _)| subset.iter().all(|&q| (x >> (arity - 1 - q)) & 1 == 1))
                    .map(|(_, phi)| phi)
                    .sum();
                linalg::cis(phase)
            })
            .collect();
        Ok(Self { arity, diagonal })
    }

    pub fn explicit(diagonal: Vec<C64>) -> Result<Self> {
        let n = diagonal.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("diagonal of length {n} is not a qubit register size")));
        }
        if diagonal.iter().any(|d| (d.norm() - 1.0).abs() > ALGEBRAIC_TOL) {
            return Err(Error::NotUnitary);
        }
        Ok(Self { arity: n.trailing_zeros() as usize, diagonal })
    }

    /// Product of CZ over the edges of `g`, qubits in vertex order.
    pub fn cz_graph(g: &Graph) -> Result<Self> {
        let terms: Vec<(Vec<usize>, f64)> = g
            .edges()
            .map(|(u, v)| Ok((alloc::vec![g.index_of(u)?, g.index_of(v)?], core::f64::consts::PI)))
            .collect::<Result<_>>()?;
        Self::from_terms(g.num_vertices(), &terms)
    }

    /// Multi-controlled Z on all `arity` qubits.
    pub fn multi_cz(arity: usize) -> Result<Self> {
        Self::from_terms(arity, &[((0..arity).collect(), core::f64::consts::PI)])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn diagonal(&self) -> &[C64] {
        &self.diagonal
    }

    pub fn gate(&self) -> Gate {
        Gate::new("U_phase", alloc::vec![2; self.arity], linalg::diag(&self.diagonal)).expect("diagonal gate")
    }
}

/// Parameters of a broadcast template with `senders` qudits of dimension
/// `receivers + 1` and `receivers` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastSpec {
    pub senders: usize,
    pub receivers: usize,
    pub alpha: C64,
    pub beta: C64,
    pub entangler: Option<DiagonalPhaseGate>,
}

impl BroadcastSpec {
    pub fn new(senders: usize, receivers: usize, alpha: C64, beta: C64) -> Result<Self> {
        let spec = Self { senders, receivers, alpha, beta, entangler: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_entangler(mut self, entangler: DiagonalPhaseGate) -> Result<Self> {
        self.entangler = Some(entangler);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers == 0 {
            return Err(Error::InvalidParameter("at least one receiver is required".into()));
        }
        let n = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (n - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidParameter(format!("|alpha|^2 + |beta|^2 = {n}, expected 1")));
        }
        if let Some(e) = &self.entangler {
            if e.arity() != self.receivers {
                return Err(Error::DimensionMismatch { expected: self.receivers, found: e.arity() });
            }
        }
        Ok(())
    }

    pub fn sender_dim(&self) -> usize {
        self.receivers + 1
    }

    pub fn sender_labels(&self) -> Vec<String> {
        (1..=self.senders).map(sender_label).collect()
    }

    pub fn receiver_labels(&self) -> Vec<String> {
        (1..=self.receivers).map(receiver_label).collect()
    }

    /// `alpha e^{i theta}|0> + beta e^{-i theta}|1>`.
    pub fn target_qubit(&self, theta: f64) -> [C64; 2] {
        [self.alpha * linalg::cis(theta), self.beta * linalg::cis(-theta)]
    }
}

pub fn sender_label(j: usize) -> String {
    format!("a{j}")
}

pub fn receiver_label(l: usize) -> String {
    format!("b{l}")
}

/// `sum_k alpha^k beta^{N-k} sqrt(C(N,k)) |k>^{M} U |k; N-k>` with the
/// Dicke state holding `k` zeros. Senders come first, labelled `a1..aM`,
/// then receivers `b1..bN`.
pub fn make_broadcast_state(spec: &BroadcastSpec) -> Result<StateVector> {
    spec.validate()?;
    let (m, n) = (spec.senders, spec.receivers);
    let d = n + 1;
    let mut subs: Vec<Subsystem> = spec.sender_labels().into_iter().map(|l| Subsystem::new(l, d)).collect();
    subs.extend(spec.receiver_labels().into_iter().map(Subsystem::qubit));
    let size = d
        .checked_pow(m as u32)
        .and_then(|s| s.checked_mul(1 << n))
        .filter(|&s| s <= crate::tensor::MAX_AMPLITUDES)
        .ok_or(Error::RegisterTooLarge { size: usize::MAX, limit: crate::tensor::MAX_AMPLITUDES })?;
    let mut amps = alloc::vec![ZERO; size];
    // All senders hold the same digit, so the sender index is k * sum_j d^j.
    let repunit: usize = (0..m).map(|j| d.pow(j as u32)).sum();
    for x in 0..1usize << n {
        let zeros = n - x.count_ones() as usize;
        let weight = spec.alpha.powu(zeros as u32) * spec.beta.powu((n - zeros) as u32);
        let phase = spec.entangler.as_ref().map_or(ONE, |e| e.diagonal()[x]);
        amps[((zeros * repunit) << n) + x] = weight * phase;
    }
    StateVector::new(subs, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};
    use core::f64::consts::FRAC_1_SQRT_2 as H;

    const TOL: f64 = 1e-12;

    #[test]
    fn one_sender_two_receivers_literal_template() {
        // Literal amplitudes over labels (0: |00>, 1: |11>, 2: |01>+|10>),
        // relabeled to the canonical sender digit (number of receiver zeros).
        let (a, b) = (r(H), r(H));
        let spec = BroadcastSpec::new(1, 2, a, b).unwrap();
        let s = make_broadcast_state(&spec).unwrap();
        assert_eq!(s.dims(), alloc::vec![3, 2, 2]);
        let norm = (a.norm_sqr().powi(2) + b.norm_sqr().powi(2) + 2.0 * (a * b).norm_sqr()).sqrt();
        let literal = [(0usize, [0usize, 0], a * a), (1, [1, 1], b * b), (2, [0, 1], a * b), (2, [1, 0], a * b)];
        for (label, bits, amp) in literal {
            let k = (2 + 3 - (2 * label) % 3) % 3;
            assert!((s.amplitude(&[k, bits[0], bits[1]]) - amp / norm).norm() < TOL);
        }
        // Concrete values at alpha = beta = 1/sqrt 2.
        assert!((s.amplitude(&[2, 0, 0]) - r(0.5)).norm() < TOL);
        assert!((s.amplitude(&[0, 1, 1]) - r(0.5)).norm() < TOL);
        assert!((s.amplitude(&[1, 0, 1]) - r(0.5)).norm() < TOL);
    }

    #[test]
    fn two_sender_literal_template() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let s = make_broadcast_state(&BroadcastSpec::new(2, 2, a, b).unwrap()).unwrap();
        // Literal label l has l receiver ones; canonical digit is 2 - l.
        let literal = [(0usize, [0usize, 0], a * a), (1, [0, 1], a * b), (1, [1, 0], a * b), (2, [1, 1], b * b)];
        let norm = literal.iter().map(|x| x.2.norm_sqr()).sum::<f64>().sqrt();
        for (l, bits, amp) in literal {
            let k = 2 - l;
            assert!((s.amplitude(&[k, k, bits[0], bits[1]]) - amp / norm).norm() < TOL);
        }
        let nonzero = s.amplitudes().iter().filter(|x| x.norm() > 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn cz_entangler_flips_all_ones_term() {
        let g = Graph::path(2);
        let e = DiagonalPhaseGate::cz_graph(&g).unwrap();
        let spec = BroadcastSpec::new(1, 2, r(H), r(H)).unwrap().with_entangler(e).unwrap();
        let s = make_broadcast_state(&spec).unwrap();
        assert!((s.amplitude(&[0, 1, 1]) - r(-0.5)).norm() < TOL);
        assert!((s.amplitude(&[2, 0, 0]) - r(0.5)).norm() < TOL);
    }

    #[test]
    fn no_senders_gives_product_state() {
        let (a, b) = (c(0.2, 0.3), c(-0.5, 0.0));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        let s = make_broadcast_state(&BroadcastSpec::new(0, 3, a, b).unwrap()).unwrap();
        for x in 0..8usize {
            let want = (0..3).fold(linalg::ONE, |acc, q| acc * if x >> (2 - q) & 1 == 0 { a } else { b });
            assert!((s.amplitudes()[x] - want).norm() < TOL);
        }
    }

    #[test]
    fn phase_gate_constructors() {
        let ccz = DiagonalPhaseGate::multi_cz(3).unwrap();
        assert!((ccz.diagonal()[7] + linalg::ONE).norm() < TOL);
        assert!(ccz.diagonal()[..7].iter().all(|d| *d == linalg::ONE));
        assert!(DiagonalPhaseGate::explicit(alloc::vec![linalg::ONE, r(0.5)]).is_err());
        assert!(DiagonalPhaseGate::from_terms(2, &[(alloc::vec![2], 1.0)]).is_err());
        let spec = BroadcastSpec::new(1, 2, r(H), r(H)).unwrap();
        assert!(spec.with_entangler(ccz).is_err());
        assert!(BroadcastSpec::new(1, 2, r(1.0), r(1.0)).is_err());
        assert!(BroadcastSpec::new(1, 0, r(1.0), r(0.0)).is_err());
    }
}
