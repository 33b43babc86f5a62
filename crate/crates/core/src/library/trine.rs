use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::Result;
use crate::linalg::{self, C64};
use crate::tensor::{MeasurementBasis, Povm, SubsystemId};

/// Angle `theta_j = 2 pi j / 3` of trine state `j`.
pub fn trine_angle(j: usize) -> f64 {
    2.0 * PI * (j % 3) as f64 / 3.0
}

/// The trine states `(e^{i theta_j}|0> + e^{-i theta_j}|1>)/sqrt 2` and the
/// anti-trine states with a relative minus sign.
#[derive(Debug, Clone, PartialEq)]
pub struct TrineSet {
    pub trine: [[C64; 2]; 3],
    pub anti: [[C64; 2]; 3],
}

pub fn trine_states() -> TrineSet {
    let s = linalg::r(FRAC_1_SQRT_2);
    let make = |j: usize, sign: f64| {
        let t = trine_angle(j);
        [linalg::cis(t) * s, linalg::cis(-t) * s * sign]
    };
    TrineSet { trine: [0, 1, 2].map(|j| make(j, 1.0)), anti: [0, 1, 2].map(|j| make(j, -1.0)) }
}

impl TrineSet {
    /// POVM with elements `(2/3)|anti_j><anti_j|`.
    pub fn anti_trine_povm(&self, target: SubsystemId) -> Result<Povm> {
        let elements = self.anti.iter().map(|v| linalg::outer(v) * linalg::r(2.0 / 3.0)).collect();
        Povm::new("anti-trine", target, elements)
    }

    /// Projective basis `{|trine_l>, |anti_l>}`; outcome 0 is the trine state.
    pub fn basis(&self, target: SubsystemId, l: usize) -> Result<MeasurementBasis> {
        let vectors: Vec<Vec<C64>> = alloc::vec![self.trine[l % 3].to_vec(), self.anti[l % 3].to_vec()];
        MeasurementBasis::new(alloc::format!("trine-{}", l % 3), target, vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Measurement, StateVector};

    const TOL: f64 = 1e-12;

    #[test]
    fn overlaps() {
        let t = trine_states();
        for j in 0..3 {
            assert!(linalg::inner(&t.anti[j], &t.trine[j]).norm() < TOL);
            for k in 0..3 {
                let want = if j == k { 1.0 } else { -0.5 };
                assert!((linalg::inner(&t.trine[j], &t.trine[k]) - linalg::r(want)).norm() < TOL);
                assert!((linalg::inner(&t.anti[j], &t.anti[k]) - linalg::r(want)).norm() < TOL);
            }
        }
    }

    #[test]
    fn literal_trine_states() {
        let t = trine_states();
        let w = linalg::cis(2.0 * PI / 3.0);
        let s = linalg::r(FRAC_1_SQRT_2);
        let trine = [[s, s], [w * s, w.conj() * s], [w.conj() * s, w * s]];
        for j in 0..3 {
            for k in 0..2 {
                assert!((t.trine[j][k] - trine[j][k]).norm() < TOL);
            }
            assert!((t.anti[j][1] + trine[j][1]).norm() < TOL);
        }
    }

    #[test]
    fn anti_trine_povm_excludes_sent_label() {
        let t = trine_states();
        let m: Measurement = t.anti_trine_povm(SubsystemId(0)).unwrap().into();
        for j in 0..3 {
            let s = StateVector::from_amplitudes(&[2], t.trine[j].to_vec()).unwrap();
            let p = s.outcome_probabilities(&m).unwrap();
            for (k, pk) in p.iter().enumerate() {
                let want = if k == j { 0.0 } else { 0.5 };
                assert!((pk - want).abs() < TOL);
            }
        }
    }

    #[test]
    fn povm_elements_sum_to_identity() {
        let t = trine_states();
        let povm = t.anti_trine_povm(SubsystemId(0)).unwrap();
        let sum = povm.elements().iter().fold(crate::linalg::Matrix::zeros(2, 2), |a, e| a + e);
        assert!(linalg::max_abs_diff(&sum, &linalg::identity(2)) < TOL);
    }
}
