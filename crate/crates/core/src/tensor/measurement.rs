#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use super::{split_layout, StateVector, SubsystemId, ALGEBRAIC_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64, ZERO};

/// Probabilities at or below this are treated as impossible outcomes.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-14;

/// A complete orthonormal basis on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    pub name: String,
    target: SubsystemId,
    vectors: Vec<Vec<C64>>,
}

impl MeasurementBasis {
    pub fn new(name: impl Into<String>, target: SubsystemId, vectors: Vec<Vec<C64>>) -> Result<Self> {
        let d = vectors.len();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        for v in &vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        for i in 0..d {
            for j in 0..d {
                let g = linalg::inner(&vectors[i], &vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - linalg::r(want)).norm() > ALGEBRAIC_TOL {
                    return Err(Error::NotOrthonormal);
                }
            }
        }
        Ok(Self { name: name.into(), target, vectors })
    }

    pub fn computational(target: SubsystemId, dim: usize) -> Result<Self> {
        let vectors = (0..dim)
            .map(|k| (0..dim).map(|j| if j == k { linalg::ONE } else { ZERO }).collect())
            .collect();
        Self::new("Z", target, vectors)
    }

    pub fn target(&self) -> SubsystemId {
        self.target
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// The same basis placed on another subsystem.
    pub fn retarget(&self, target: SubsystemId) -> Self {
        Self { target, ..self.clone() }
    }
}

/// A positive operator-valued measure on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    pub name: String,
    target: SubsystemId,
    elements: Vec<Matrix>,
    roots: Vec<Matrix>,
}

impl Povm {
    pub fn new(name: impl Into<String>, target: SubsystemId, elements: Vec<Matrix>) -> Result<Self> {
        let d = elements.first().map(|e| e.nrows()).ok_or(Error::InvalidPovm("no elements"))?;
        let mut sum = Matrix::zeros(d, d);
        for e in &elements {
            if e.nrows() != d || !e.is_square() {
                return Err(Error::InvalidPovm("element shapes differ"));
            }
            if !linalg::is_hermitian(e, ALGEBRAIC_TOL) {
                return Err(Error::InvalidPovm("element is not Hermitian"));
            }
            let (values, _) = linalg::hermitian_eigen(e);
            if values.iter().any(|&v| v < -1e-10) {
                return Err(Error::InvalidPovm("element is not positive semidefinite"));
            }
            sum += e;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(d)) > ALGEBRAIC_TOL {
            return Err(Error::InvalidPovm("elements do not sum to the identity"));
        }
        let roots = elements.iter().map(linalg::psd_sqrt).collect();
        Ok(Self { name: name.into(), target, elements, roots })
    }

    /// Two-outcome projective measurement `{I - P, P}`.
    pub fn binary_projector(name: impl Into<String>, target: SubsystemId, projector: Matrix) -> Result<Self> {
        let d = projector.nrows();
        if linalg::max_abs_diff(&(&projector * &projector), &projector) > ALGEBRAIC_TOL {
            return Err(Error::InvalidPovm("operator is not a projector"));
        }
        Self::new(name, target, alloc::vec![linalg::identity(d) - &projector, projector])
    }

    pub fn target(&self) -> SubsystemId {
        self.target
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn retarget(&self, target: SubsystemId) -> Self {
        Self { target, ..self.clone() }
    }
}

/// Either a rank-one basis measurement or a general POVM.
#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    Basis(MeasurementBasis),
    Povm(Povm),
}

impl From<MeasurementBasis> for Measurement {
    fn from(b: MeasurementBasis) -> Self {
        Self::Basis(b)
    }
}

impl From<Povm> for Measurement {
    fn from(p: Povm) -> Self {
        Self::Povm(p)
    }
}

impl Measurement {
    pub fn name(&self) -> &str {
        match self {
            Self::Basis(b) => &b.name,
            Self::Povm(p) => &p.name,
        }
    }

    pub fn target(&self) -> SubsystemId {
        match self {
            Self::Basis(b) => b.target,
            Self::Povm(p) => p.target,
        }
    }

    pub fn num_outcomes(&self) -> usize {
        match self {
            Self::Basis(b) => b.vectors.len(),
            Self::Povm(p) => p.elements.len(),
        }
    }

    pub fn retarget(&self, target: SubsystemId) -> Self {
        match self {
            Self::Basis(b) => Self::Basis(b.retarget(target)),
            Self::Povm(p) => Self::Povm(p.retarget(target)),
        }
    }

    fn local_dim(&self) -> usize {
        match self {
            Self::Basis(b) => b.dim(),
            Self::Povm(p) => p.elements[0].nrows(),
        }
    }
}

/// One measurement outcome with its Born probability and collapsed state.
///
/// `state` is `None` for impossible outcomes (probability at most
/// [`IMPOSSIBLE_PROBABILITY`]); such branches are kept so that callers can
/// assert impossibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub outcome: usize,
    pub probability: f64,
    pub state: Option<StateVector>,
}

impl Branch {
    pub fn is_possible(&self) -> bool {
        self.state.is_some()
    }
}

impl StateVector {
    fn check_measurement(&self, m: &Measurement) -> Result<()> {
        let dim = self.subsystem(m.target())?.dim;
        if dim != m.local_dim() {
            return Err(Error::DimensionMismatch { expected: dim, found: m.local_dim() });
        }
        Ok(())
    }

    /// Born probabilities of every outcome.
    pub fn outcome_probabilities(&self, m: &Measurement) -> Result<Vec<f64>> {
        self.check_measurement(m)?;
        let (toff, bases) = split_layout(&self.dims(), &[m.target().0]);
        let amps = self.amplitudes();
        let probs = match m {
            Measurement::Basis(b) => b
                .vectors
                .iter()
                .map(|v| {
                    bases
                        .iter()
                        .map(|&base| {
                            toff.iter().zip(v).map(|(&o, x)| x.conj() * amps[base + o]).sum::<C64>().norm_sqr()
                        })
                        .sum()
                })
                .collect(),
            Measurement::Povm(p) => p
                .elements
                .iter()
                .map(|e| {
                    let mut acc = 0.0;
                    for &base in &bases {
                        for (i, &oi) in toff.iter().enumerate() {
                            for (j, &oj) in toff.iter().enumerate() {
                                acc += (amps[base + oi].conj() * e[(i, j)] * amps[base + oj]).re;
                            }
                        }
                    }
                    acc.max(0.0)
                })
                .collect(),
        };
        Ok(probs)
    }

    /// Collapses onto one outcome, keeping the measured subsystem.
    pub fn collapse(&self, m: &Measurement, outcome: usize) -> Result<Branch> {
        self.check_measurement(m)?;
        if outcome >= m.num_outcomes() {
            return Err(Error::OutOfRange { what: "outcome", value: outcome as i64, bound: m.num_outcomes() as i64 });
        }
        let target = m.target();
        let kraus = match m {
            Measurement::Basis(b) => linalg::outer(&b.vectors[outcome]),
            Measurement::Povm(p) => p.roots[outcome].clone(),
        };
        let mut out = self.clone();
        let op = super::LocalOperator::named(m.name(), alloc::vec![target], kraus)?;
        let (toff, bases) = split_layout(&self.dims(), &[target.0]);
        let d = toff.len();
        let mut buf = alloc::vec![ZERO; d];
        let mut p = 0.0;
        {
            let amps = out.amps_mut();
            for &b in &bases {
                for (l, &o) in toff.iter().enumerate() {
                    buf[l] = amps[b + o];
                }
                for (row, &o) in toff.iter().enumerate() {
                    let v: C64 = (0..d).map(|col| op.matrix()[(row, col)] * buf[col]).sum();
                    p += v.norm_sqr();
                    amps[b + o] = v;
                }
            }
        }
        if p <= IMPOSSIBLE_PROBABILITY {
            return Ok(Branch { outcome, probability: p.max(0.0), state: None });
        }
        let inv = 1.0 / p.sqrt();
        out.amps_mut().iter_mut().for_each(|a| *a *= inv);
        Ok(Branch { outcome, probability: p, state: Some(out) })
    }

    /// Every outcome with its probability and collapsed state.
    pub fn enumerate_branches(&self, m: &Measurement) -> Result<Vec<Branch>> {
        let probs = self.outcome_probabilities(m)?;
        if probs.iter().all(|&p| p <= IMPOSSIBLE_PROBABILITY) {
            return Err(Error::ZeroProbability);
        }
        (0..m.num_outcomes()).map(|k| self.collapse(m, k)).collect()
    }

    /// Samples an outcome by the Born rule.
    pub fn measure<R: Rng + ?Sized>(&self, m: &Measurement, rng: &mut R) -> Result<Branch> {
        let probs = self.outcome_probabilities(m)?;
        let k = sample_index(&probs, rng)?;
        self.collapse(m, k)
    }
}

/// Draws an index from (possibly unnormalized) weights, skipping impossible ones.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().filter(|&&p| p > IMPOSSIBLE_PROBABILITY).sum();
    if total <= IMPOSSIBLE_PROBABILITY {
        return Err(Error::ZeroProbability);
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= IMPOSSIBLE_PROBABILITY {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};
    use crate::tensor::Subsystem;
    use alloc::vec;
    use rand::SeedableRng;

    fn qubit(v: [C64; 2]) -> StateVector {
        StateVector::from_amplitudes(&[2], v.to_vec()).unwrap()
    }

    fn z(target: usize, d: usize) -> Measurement {
        MeasurementBasis::computational(SubsystemId(target), d).unwrap().into()
    }

    #[test]
    fn zero_state_branches() {
        let b = qubit([r(1.0), r(0.0)]).enumerate_branches(&z(0, 2)).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b[0].probability - 1.0).abs() < 1e-15 && b[0].is_possible());
        assert!(b[1].probability == 0.0 && !b[1].is_possible());
    }

    #[test]
    fn uniform_qutrit_in_fourier_basis_is_deterministic() {
        let s = StateVector::from_amplitudes(&[3], vec![r(1.0); 3]).unwrap();
        let f = crate::library::fourier_basis(SubsystemId(0), 3).unwrap();
        let p = s.outcome_probabilities(&f.into()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] < 1e-12 && p[2] < 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal_basis_and_bad_povm() {
        let v = vec![vec![r(1.0), r(0.0)], vec![r(1.0), r(1.0)]];
        assert!(matches!(MeasurementBasis::new("bad", SubsystemId(0), v), Err(Error::NotOrthonormal)));
        let e = vec![linalg::diag(&[r(1.0), r(0.0)]), linalg::diag(&[r(0.0), r(0.5)])];
        assert!(matches!(Povm::new("bad", SubsystemId(0), e), Err(Error::InvalidPovm(_))));
        let e = vec![linalg::diag(&[r(1.5), r(0.0)]), linalg::diag(&[r(-0.5), r(1.0)])];
        assert!(matches!(Povm::new("bad", SubsystemId(0), e), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn povm_collapse_uses_square_root() {
        let e0 = linalg::diag(&[r(0.25), r(1.0)]);
        let e1 = linalg::diag(&[r(0.75), r(0.0)]);
        let m: Measurement = Povm::new("p", SubsystemId(0), vec![e0, e1]).unwrap().into();
        let s = qubit([r(1.0), r(1.0)]);
        let b = s.collapse(&m, 0).unwrap();
        assert!((b.probability - 0.625).abs() < 1e-12);
        let st = b.state.unwrap();
        let n = (0.25f64 + 1.0).sqrt();
        assert!((st.amplitudes()[0] - r(0.5 / n)).norm() < 1e-12);
        assert!((st.amplitudes()[1] - r(1.0 / n)).norm() < 1e-12);
    }

    #[test]
    fn all_zero_probabilities_error() {
        let m: Measurement = Povm::new(
            "p",
            SubsystemId(0),
            vec![linalg::diag(&[r(0.0), r(1.0)]), linalg::diag(&[r(1.0), r(0.0)])],
        )
        .unwrap()
        .into();
        let s = qubit([r(1.0), r(0.0)]);
        assert!(s.enumerate_branches(&m).is_ok());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(sample_index(&[0.0, 1e-15], &mut rng), Err(Error::ZeroProbability)));
    }

    #[test]
    fn branch_probabilities_sum_to_one_on_joint_register() {
        let s = StateVector::new(
            vec![Subsystem::new("a", 3), Subsystem::qubit("b")],
            (0..6).map(|k| c(k as f64 - 2.5, 0.3 * k as f64)).collect(),
        )
        .unwrap();
        for target in 0..2 {
            let d = s.dims()[target];
            let b = s.enumerate_branches(&z(target, d)).unwrap();
            let total: f64 = b.iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for br in b.iter().filter(|b| b.is_possible()) {
                assert!(br.state.as_ref().unwrap().is_normalized());
            }
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let s = qubit([r(1.0), r(1.0)]);
        let run = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..32).map(|_| s.measure(&z(0, 2), &mut rng).unwrap().outcome).collect::<vec::Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn sampled_frequencies_match_born_rule() {
        // Unequal weights on a qutrit; 1e5 trials, 3 sigma per outcome.
        let s = StateVector::from_amplitudes(&[3], vec![r(1.0), r(2.0), c(0.0, 3.0)]).unwrap();
        let m = z(0, 3);
        let probs = s.outcome_probabilities(&m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let trials = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            counts[s.measure(&m, &mut rng).unwrap().outcome] += 1;
        }
        for k in 0..3 {
            let p = probs[k];
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((counts[k] as f64 / trials as f64 - p).abs() <= 3.0 * sigma, "outcome {k}");
        }
    }
}
