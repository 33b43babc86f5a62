//! Named gates and measurement bases.

#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64, I, ONE, ZERO};
use crate::tensor::{Gate, MeasurementBasis, Subsystem, StateVector, SubsystemId};

fn gate(name: &str, dims: &[usize], m: Matrix) -> Gate {
    Gate::new(name, dims.to_vec(), m).expect("library gate is well formed")
}

pub fn identity(dim: usize) -> Gate {
    gate("I", &[dim], linalg::identity(dim))
}

pub fn pauli_x() -> Gate {
    gate("X", &[2], linalg::from_rows(2, 2, &[ZERO, ONE, ONE, ZERO]))
}

pub fn pauli_y() -> Gate {
    gate("Y", &[2], linalg::from_rows(2, 2, &[ZERO, -I, I, ZERO]))
}

pub fn pauli_z() -> Gate {
    gate("Z", &[2], linalg::diag(&[ONE, -ONE]))
}

pub fn hadamard() -> Gate {
    let h = linalg::r(core::f64::consts::FRAC_1_SQRT_2);
    gate("H", &[2], linalg::from_rows(2, 2, &[h, h, h, -h]))
}

pub fn cz() -> Gate {
    gate("CZ", &[2, 2], linalg::diag(&[ONE, ONE, ONE, -ONE]))
}

/// Controlled-NOT with the first qubit as control.
pub fn cx() -> Gate {
    let mut m = Matrix::zeros(4, 4);
    for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(row, col)] = ONE;
    }
    gate("CX", &[2, 2], m)
}

/// `e^{i theta Z}`.
pub fn z_rotation(theta: f64) -> Gate {
    gate(&format!("e^(i{theta}Z)"), &[2], linalg::diag(&[linalg::cis(theta), linalg::cis(-theta)]))
}

/// `e^{i theta X}`.
pub fn x_rotation(theta: f64) -> Gate {
    gate(&format!("e^(i{theta}X)"), &[2], linalg::involution_exp(&pauli_x().matrix, theta))
}

/// Euler rotation `e^{i gamma Z} e^{i beta X} e^{i alpha Z}`.
pub fn euler_rotation(alpha: f64, beta: f64, gamma: f64) -> Gate {
    let m = z_rotation(gamma).matrix * x_rotation(beta).matrix * z_rotation(alpha).matrix;
    gate("R", &[2], m)
}

/// Permutation gate `|k> -> |perm[k]>`.
pub fn permutation(name: &str, perm: &[usize]) -> Result<Gate> {
    let d = perm.len();
    let mut seen = alloc::vec![false; d];
    let mut m = Matrix::zeros(d, d);
    for (k, &p) in perm.iter().enumerate() {
        if p >= d || seen[p] {
            return Err(Error::InvalidParameter(format!("{name}: not a permutation")));
        }
        seen[p] = true;
        m[(p, k)] = ONE;
    }
    Gate::new(name, alloc::vec![d], m)
}

/// `|k> -> |k + amount mod d>`.
pub fn shift(dim: usize, amount: i64) -> Gate {
    let perm: Vec<usize> = (0..dim).map(|k| (k as i64 + amount).rem_euclid(dim as i64) as usize).collect();
    permutation(&format!("Shift({amount})"), &perm).expect("shift is a permutation")
}

/// Fourier vectors `u_n[k] = e^{2 pi i n k / D} / sqrt(D)`.
pub fn fourier_vectors(dim: usize) -> Result<Vec<Vec<C64>>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let norm = 1.0 / (dim as f64).sqrt();
    Ok((0..dim)
        .map(|n| (0..dim).map(|k| linalg::cis(2.0 * PI * ((n * k) % dim) as f64 / dim as f64) * norm).collect())
        .collect())
}

pub fn fourier_basis(target: SubsystemId, dim: usize) -> Result<MeasurementBasis> {
    MeasurementBasis::new("Fourier", target, fourier_vectors(dim)?)
}

/// Fourier transform `|k> -> sum_n e^{2 pi i n k / D} |n> / sqrt(D)`.
pub fn fourier_gate(dim: usize) -> Result<Gate> {
    let v = fourier_vectors(dim)?;
    let mut m = Matrix::zeros(dim, dim);
    for (n, row) in v.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            m[(k, n)] = *x;
        }
    }
    Gate::new("F", alloc::vec![dim], m)
}

/// `{|+>, |->}`.
pub fn x_basis(target: SubsystemId) -> MeasurementBasis {
    let h = linalg::r(core::f64::consts::FRAC_1_SQRT_2);
    MeasurementBasis::new("X", target, alloc::vec![alloc::vec![h, h], alloc::vec![h, -h]])
        .expect("X basis is orthonormal")
}

pub fn z_basis(target: SubsystemId, dim: usize) -> MeasurementBasis {
    MeasurementBasis::computational(target, dim).expect("computational basis is orthonormal")
}

/// `{e^{-i theta X}|0>, e^{-i theta X}|1>}`.
pub fn rotated_x_basis(target: SubsystemId, theta: f64) -> Result<MeasurementBasis> {
    let rot = x_rotation(-theta);
    let m = &rot.matrix;
    let vectors = (0..2).map(|s| (0..2).map(|r| m[(r, s)]).collect()).collect();
    MeasurementBasis::new(format!("M({theta})"), target, vectors)
}

/// Sender phase `|k> -> e^{i(2k - N) theta} |k>` on a qudit of dimension `N + 1`.
pub fn sender_phase_gate(dim: usize, receivers: usize, theta: f64) -> Result<Gate> {
    if dim != receivers + 1 {
        return Err(Error::DimensionMismatch { expected: receivers + 1, found: dim });
    }
    let entries: Vec<C64> = (0..dim).map(|k| linalg::cis((2.0 * k as f64 - receivers as f64) * theta)).collect();
    Gate::new(format!("U({theta})"), alloc::vec![dim], linalg::diag(&entries))
}

/// Receiver correction `diag(e^{2 pi i s / modulus}, 1)` for outcome sum `s`.
pub fn correction_gate(modulus: usize, outcome_sum: usize) -> Result<Gate> {
    if modulus < 2 {
        return Err(Error::InvalidDimension(modulus));
    }
    let s = outcome_sum % modulus;
    let phase = linalg::cis(2.0 * PI * s as f64 / modulus as f64);
    Gate::new(format!("C({s}/{modulus})"), alloc::vec![2], linalg::diag(&[phase, ONE]))
}

/// `|k>|l> -> |k>|l + direction * k mod tgt_dim>`.
pub fn controlled_shift(ctrl_dim: usize, tgt_dim: usize, direction: i64) -> Result<Gate> {
    if ctrl_dim < 2 || tgt_dim < 2 {
        return Err(Error::InvalidDimension(ctrl_dim.min(tgt_dim)));
    }
    if ctrl_dim > tgt_dim {
        return Err(Error::InvalidParameter(format!(
            "controlled shift needs control dimension {ctrl_dim} <= target dimension {tgt_dim}"
        )));
    }
    if direction != 1 && direction != -1 {
        return Err(Error::InvalidParameter(format!("shift direction must be +1 or -1, got {direction}")));
    }
    let n = ctrl_dim * tgt_dim;
    let mut m = Matrix::zeros(n, n);
    for k in 0..ctrl_dim {
        for l in 0..tgt_dim {
            let to = (l as i64 + direction * k as i64).rem_euclid(tgt_dim as i64) as usize;
            m[(k * tgt_dim + to, k * tgt_dim + l)] = ONE;
        }
    }
    Gate::new(if direction > 0 { "CShift" } else { "CShift-" }, alloc::vec![ctrl_dim, tgt_dim], m)
}

/// Controlled version of a qubit-register gate, control first.
pub fn controlled(g: &Gate) -> Gate {
    let n = g.matrix.nrows();
    let mut m = Matrix::identity(2 * n, 2 * n);
    m.view_mut((n, n), (n, n)).copy_from(&g.matrix);
    let mut dims = alloc::vec![2];
    dims.extend_from_slice(&g.dims);
    Gate::new(format!("C-{}", g.name), dims, m).expect("controlled unitary is unitary")
}

/// Dicke state on `n` qubits with `zeros` qubits in `|0>`.
pub fn dicke_state(n: usize, zeros: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("Dicke state needs at least one qubit".into()));
    }
    if zeros > n {
        return Err(Error::OutOfRange { what: "Dicke excitation", value: zeros as i64, bound: n as i64 });
    }
    let subs = (0..n).map(|i| Subsystem::qubit(format!("q{i}"))).collect();
    StateVector::new(subs, dicke_amplitudes(n, zeros))
}

/// Unnormalized 0/1 amplitudes of the Dicke pattern.
pub(crate) fn dicke_amplitudes(n: usize, zeros: usize) -> Vec<C64> {
    (0..1usize << n).map(|x| if n - x.count_ones() as usize == zeros { ONE } else { ZERO }).collect()
}
