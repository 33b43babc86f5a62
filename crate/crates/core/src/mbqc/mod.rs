//! Remote measurement-based computation on brickwork blocks.
//!
//! The receiver holds the brickwork qubits and only ever measures in the `X`
//! basis. The sender holds one ancilla per measured vertex, coupled by `CZ`,
//! and teleports adaptive `Z` rotations onto the block by measuring them in
//! rotated bases. Byproduct Paulis are tracked as parities of recorded
//! outcomes and threaded from block to block.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::library::gates::{cx, cz, euler_rotation, hadamard, pauli_x, pauli_z, x_basis, z_rotation};
use crate::library::{brickwork_block, rotated_x_basis, BlockWires, Graph};
use crate::linalg::{self, Matrix, C64, ZERO};
use crate::protocol::{Mode, OutcomeId, ProtocolTranscript, Recipient, Role, Session, Verdict};
use crate::tensor::{Gate, Subsystem, StateVector, SubsystemId, CHAINED_TOL};

pub const SENDER: &str = "Alice";
pub const RECEIVER: &str = "Bob";

/// A mod-2 sum of recorded outcomes plus a constant bit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Parity {
    ids: BTreeSet<OutcomeId>,
    constant: bool,
}

impl Parity {
    pub fn constant(bit: bool) -> Self {
        Self { ids: BTreeSet::new(), constant: bit }
    }

    pub fn of(id: OutcomeId) -> Self {
        let mut ids = BTreeSet::new();
        ids.insert(id);
        Self { ids, constant: false }
    }

    pub fn xor(&self, other: &Parity) -> Self {
        Self { ids: self.ids.symmetric_difference(&other.ids).copied().collect(), constant: self.constant ^ other.constant }
    }

    pub fn ids(&self) -> Vec<OutcomeId> {
        self.ids.iter().copied().collect()
    }

    /// Value given all outcomes of a branch.
    pub fn eval(&self, outcomes: &[usize]) -> bool {
        self.ids.iter().fold(self.constant, |acc, &i| acc ^ (outcomes[i] & 1 == 1))
    }

    /// Value given the outcomes of `self.ids()`, in that order.
    fn eval_deps(&self, vals: &[usize]) -> bool {
        vals.iter().fold(self.constant, |acc, &v| acc ^ (v & 1 == 1))
    }
}

fn sum(parts: &[&Parity]) -> Parity {
    parts.iter().fold(Parity::default(), |acc, p| acc.xor(p))
}

/// Byproduct exponents `X^x Z^z` on the two logical wires.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Byproducts {
    pub x_top: Parity,
    pub z_top: Parity,
    pub x_bottom: Parity,
    pub z_bottom: Parity,
}

impl Byproducts {
    pub fn constant(bits: [bool; 4]) -> Self {
        let [a, b, c, d] = bits.map(Parity::constant);
        Self { x_top: a, z_top: b, x_bottom: c, z_bottom: d }
    }

    /// `(x_top, z_top, x_bottom, z_bottom)` on a branch.
    pub fn eval(&self, outcomes: &[usize]) -> [bool; 4] {
        [&self.x_top, &self.z_top, &self.x_bottom, &self.z_bottom].map(|p| p.eval(outcomes))
    }
}

/// `(-1)^sign * base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Angle {
    pub base: f64,
    pub sign: Parity,
}

impl Angle {
    pub fn zero() -> Self {
        Self { base: 0.0, sign: Parity::default() }
    }

    fn new(base: f64, sign: Parity) -> Self {
        Self { base, sign }
    }

    fn value(&self, vals: &[usize]) -> f64 {
        if self.sign.eval_deps(vals) {
            -self.base
        } else {
            self.base
        }
    }
}

/// One logical step on the two wires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockSpec {
    /// Controlled-X with the top wire as control.
    Cnot,
    /// `R(a, b, c) = e^{icZ} e^{ibX} e^{iaZ}` on each wire.
    Rotation { top: [f64; 3], bottom: [f64; 3] },
}

impl BlockSpec {
    /// The logical two-qubit unitary, top wire first.
    pub fn unitary(&self) -> Matrix {
        match self {
            BlockSpec::Cnot => cx().matrix,
            BlockSpec::Rotation { top, bottom } => linalg::kron(
                &euler_rotation(top[0], top[1], top[2]).matrix,
                &euler_rotation(bottom[0], bottom[1], bottom[2]).matrix,
            ),
        }
    }
}

/// `<t~|_1 Z_1^s e^{i theta Z_1} CZ_12 (psi_1 (x) |+>_2)` as a map from qubit 1 to qubit 2.
pub fn single_link_map(theta: f64, s: usize, t: usize) -> Result<Matrix> {
    let plus = [linalg::r(FRAC_1_SQRT_2); 2];
    let mut m = Matrix::zeros(2, 2);
    let mut out_basis = x_basis(SubsystemId(0)).vectors()[t].clone();
    for a in out_basis.iter_mut() {
        *a = a.conj();
    }
    let rot = z_rotation(theta).matrix;
    let zs = if s % 2 == 1 { pauli_z().matrix } else { linalg::identity(2) };
    let front = &zs * &rot;
    for col in 0..2 {
        let mut psi = alloc::vec![ZERO; 2];
        psi[col] = linalg::ONE;
        let joint = StateVector::from_amplitudes(&[2, 2], psi.iter().flat_map(|a| plus.iter().map(move |b| a * b)).collect())?;
        let joint = joint.apply(&cz().on(&[SubsystemId(0), SubsystemId(1)])?)?;
        let joint = joint.apply(&Gate::new("Z^s e^(iθZ)", alloc::vec![2], front.clone())?.on(&[SubsystemId(0)])?)?;
        for row in 0..2 {
            let a: C64 = (0..2).map(|i| out_basis[i] * joint.amplitude(&[i, row])).sum();
            m[(row, col)] = a;
        }
    }
    Ok(m)
}

/// `(1/sqrt 2) H e^{i theta Z} Z^{s+t}`.
pub fn single_link_formula(theta: f64, s: usize, t: usize) -> Matrix {
    let z = if (s + t) % 2 == 1 { pauli_z().matrix } else { linalg::identity(2) };
    hadamard().matrix * z_rotation(theta).matrix * z * linalg::r(FRAC_1_SQRT_2)
}

fn column(v: usize) -> usize {
    (v - 1) % 5 + 1
}

/// A brickwork block being executed inside a session. Qubits are created one
/// column ahead of the measurement front, so at most a few are live at once.
pub struct BlockRun<'s> {
    session: &'s mut Session,
    graph: Graph,
    wires: BlockWires,
    labels: Vec<String>,
    ancillas: Vec<String>,
    prepared: [bool; 10],
    applied: BTreeSet<(usize, usize)>,
    teleported: [Option<OutcomeId>; 10],
    measured: [Option<OutcomeId>; 10],
}

impl<'s> BlockRun<'s> {
    /// `inputs` are the receiver's labels for vertices 1 and 6.
    pub fn new(session: &'s mut Session, block: usize, inputs: [String; 2]) -> Self {
        let (graph, wires) = brickwork_block();
        let mut labels: Vec<String> = (1..=10).map(|v| format!("q{block}_{v}")).collect();
        labels[wires.inputs[0] - 1] = inputs[0].clone();
        labels[wires.inputs[1] - 1] = inputs[1].clone();
        let ancillas = (1..=10).map(|v| format!("a{block}_{v}")).collect();
        let mut prepared = [false; 10];
        for v in wires.inputs {
            prepared[v - 1] = true;
        }
        Self {
            session,
            graph,
            wires,
            labels,
            ancillas,
            prepared,
            applied: BTreeSet::new(),
            teleported: [None; 10],
            measured: [None; 10],
        }
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v - 1]
    }

    pub fn outputs(&self) -> [String; 2] {
        self.wires.outputs.map(|v| self.labels[v - 1].clone())
    }

    fn check(&self, v: usize) -> Result<()> {
        if !(1..=10).contains(&v) {
            return Err(Error::OutOfRange { what: "brickwork vertex", value: v as i64, bound: 10 });
        }
        if self.wires.outputs.contains(&v) {
            return Err(Error::InvalidParameter(format!("vertex {v} carries an output")));
        }
        Ok(())
    }

    /// Creates column `c` as `|+>` qubits and applies every edge whose ends exist.
    fn prepare_column(&mut self, c: usize) -> Result<()> {
        for v in [c, c + 5] {
            if !self.prepared[v - 1] {
                let l = self.labels[v - 1].clone();
                self.session.prepare(RECEIVER, &plus(&l))?;
                self.prepared[v - 1] = true;
            }
        }
        let edges: Vec<(usize, usize)> = self.graph.edges().collect();
        for (u, v) in edges {
            if self.prepared[u - 1] && self.prepared[v - 1] && self.applied.insert((u, v)) {
                let (a, b) = (self.labels[u - 1].clone(), self.labels[v - 1].clone());
                self.session.apply(RECEIVER, &cz(), &[&a, &b])?;
            }
        }
        Ok(())
    }

    /// Couples an ancilla to `v` and has the sender measure it in the rotated
    /// basis for `angle`, which imprints `Z^s e^{i theta Z}` on `v`.
    pub fn teleport(&mut self, v: usize, angle: &Angle) -> Result<OutcomeId> {
        self.check(v)?;
        if self.teleported[v - 1].is_some() {
            return Err(Error::AlreadyMeasured(v));
        }
        self.prepare_column(column(v))?;
        let (a, q) = (self.ancillas[v - 1].clone(), self.labels[v - 1].clone());
        // The coupled pair stands in for the resource state shared beforehand.
        self.session.prepare(RECEIVER, &plus(&a))?;
        self.session.apply(RECEIVER, &cz(), &[&a, &q])?;
        self.session.transfer(RECEIVER, SENDER, &a)?;
        let deps = angle.sign.ids();
        let angle = angle.clone();
        let s = self.session.measure_with(SENDER, &a, "M(theta)", &deps, |vals| {
            Ok(rotated_x_basis(SubsystemId(0), angle.value(vals))?.into())
        }, true)?;
        self.session.send(SENDER, Recipient::Broadcast, &[s])?;
        self.teleported[v - 1] = Some(s);
        Ok(s)
    }

    /// Receiver's `X` measurement of `v`, announced to the sender.
    pub fn x_measure(&mut self, v: usize) -> Result<OutcomeId> {
        self.check(v)?;
        if self.measured[v - 1].is_some() {
            return Err(Error::AlreadyMeasured(v));
        }
        if self.teleported[v - 1].is_none() {
            return Err(Error::InvalidParameter(format!("vertex {v} has no teleported rotation yet")));
        }
        self.prepare_column(column(v) + 1)?;
        let q = self.labels[v - 1].clone();
        let t = self.session.measure(RECEIVER, &q, x_basis(SubsystemId(0)), true)?;
        self.session.send(RECEIVER, Recipient::Broadcast, &[t])?;
        self.measured[v - 1] = Some(t);
        Ok(t)
    }

    /// `w_v = s_v + t_v` once both are recorded.
    pub fn w(&self, v: usize) -> Result<Parity> {
        match (self.teleported[v - 1], self.measured[v - 1]) {
            (Some(s), Some(t)) => Ok(Parity::of(s).xor(&Parity::of(t))),
            _ => Err(Error::InvalidParameter(format!("vertex {v} is not fully measured"))),
        }
    }
}

fn plus(label: &str) -> StateVector {
    let h = linalg::r(FRAC_1_SQRT_2);
    StateVector::new(alloc::vec![Subsystem::qubit(label)], alloc::vec![h, h]).expect("|+> is normalized")
}

/// Recorded `w` parities of the measured vertices, indexed by vertex.
pub type Record = [Option<Parity>; 11];

type AngleRule<'r> = dyn Fn(usize, &Record, &Byproducts) -> Angle + 'r;

/// Adaptive angles of each block type.
pub fn block_angle(spec: &BlockSpec, v: usize, w: &Record, input: &Byproducts) -> Angle {
    let w = |i: usize| w[i].clone().expect("angle depends only on earlier outcomes");
    match spec {
        BlockSpec::Cnot => match v {
            9 => Angle::new(-FRAC_PI_4, sum(&[&w(2), &w(6), &w(8), &input.x_top, &input.z_bottom])),
            3 => Angle::new(FRAC_PI_4, w(2).xor(&input.x_top)),
            7 => Angle::new(FRAC_PI_4, w(6).xor(&input.z_bottom)),
            _ => Angle::zero(),
        },
        BlockSpec::Rotation { top, bottom } => match v {
            1 => Angle::new(top[0], input.x_top.clone()),
            2 => Angle::new(top[1], w(1).xor(&input.z_top)),
            3 => Angle::new(top[2], w(2).xor(&input.x_top)),
            6 => Angle::new(bottom[0], input.x_bottom.clone()),
            7 => Angle::new(bottom[1], w(6).xor(&input.z_bottom)),
            8 => Angle::new(bottom[2], w(7).xor(&input.x_bottom)),
            _ => Angle::zero(),
        },
    }
}

/// Output byproducts of a block in terms of its `w` parities and input flags.
pub fn output_byproducts(w: &Record, input: &Byproducts) -> Byproducts {
    let w = |i: usize| w[i].clone().expect("all measured vertices recorded");
    Byproducts {
        x_top: sum(&[&w(2), &w(4), &input.x_top]),
        z_top: sum(&[&w(1), &w(3), &w(9), &input.z_top]),
        x_bottom: sum(&[&w(7), &w(9), &input.x_bottom]),
        z_bottom: sum(&[&w(4), &w(6), &w(8), &input.z_bottom]),
    }
}

/// Runs one block column by column. `swap` measures the bottom wire first
/// within each column.
fn run_block_with(
    session: &mut Session,
    block: usize,
    inputs: [String; 2],
    input: &Byproducts,
    rule: &AngleRule<'_>,
    swap: bool,
) -> Result<([String; 2], Byproducts)> {
    let mut run = BlockRun::new(session, block, inputs);
    let mut w: Record = Default::default();
    for c in 1..=4 {
        let order = if swap { [c + 5, c] } else { [c, c + 5] };
        for v in order {
            run.teleport(v, &rule(v, &w, input))?;
            run.x_measure(v)?;
            w[v] = Some(run.w(v)?);
        }
    }
    Ok((run.outputs(), output_byproducts(&w, input)))
}

/// Per-branch logical output of a program.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalResult {
    pub transcript: ProtocolTranscript,
    /// `(x_top, z_top, x_bottom, z_bottom)` closed-form byproducts per branch.
    pub byproducts: Vec<[bool; 4]>,
    /// Byproduct-free target, top wire first.
    pub target: StateVector,
}

impl LogicalResult {
    pub fn passed(&self) -> bool {
        self.transcript.passed()
    }
}

fn wire_pauli(x: bool, z: bool) -> Matrix {
    let mut m = linalg::identity(2);
    if x {
        m = pauli_x().matrix * m;
    }
    if z {
        m = pauli_z().matrix * m;
    }
    m
}

fn byproduct_op(bits: [bool; 4]) -> Matrix {
    linalg::kron(&wire_pauli(bits[0], bits[1]), &wire_pauli(bits[2], bits[3]))
}

fn apply_two(state: &StateVector, m: &Matrix, labels: &[&str; 2]) -> Result<StateVector> {
    let ids = [state.id(labels[0])?, state.id(labels[1])?];
    state.apply(&Gate::new("U", alloc::vec![2, 2], m.clone())?.on(&ids)?)
}

fn run_program_with(
    blocks: &[BlockSpec],
    psi: &StateVector,
    input_flags: [bool; 4],
    mode: Mode,
    rule: &dyn Fn(&BlockSpec, usize, &Record, &Byproducts) -> Angle,
    swap: bool,
) -> Result<LogicalResult> {
    if blocks.is_empty() {
        return Err(Error::MalformedProgram("no blocks".into()));
    }
    if psi.dims() != [2, 2] {
        return Err(Error::MalformedProgram(format!("input must be two qubits, got dimensions {:?}", psi.dims())));
    }
    let mut s = Session::new("mbqc", mode);
    s.add_party(SENDER, Role::Sender)?;
    s.add_party(RECEIVER, Role::Receiver)?;
    let inputs = [String::from("q1_1"), String::from("q1_6")];
    let physical = psi.with_labels(&[&inputs[0], &inputs[1]])?;
    let physical = apply_two(&physical, &byproduct_op(input_flags), &[&inputs[0], &inputs[1]])?;
    s.prepare(RECEIVER, &physical)?;

    let mut wires = inputs;
    let mut flags = Byproducts::constant(input_flags);
    let mut total = linalg::identity(4);
    for (i, b) in blocks.iter().enumerate() {
        let r = |v: usize, w: &Record, f: &Byproducts| rule(b, v, w, f);
        let (out, next) = run_block_with(&mut s, i + 1, wires, &flags, &r, swap)?;
        wires = out;
        flags = next;
        total = b.unitary() * total;
    }
    let target = psi.with_labels(&[&wires[0], &wires[1]])?;
    let target = apply_two(&target, &total, &[&wires[0], &wires[1]])?;
    let labels = [wires[0].as_str(), wires[1].as_str()];
    let mut byproducts = Vec::new();
    let transcript = s.finish(|b| {
        let out = b.state().permute_labels(&labels)?;
        let bits = flags.eval(b.outcomes());
        byproducts.push(bits);
        let stripped = apply_two(&out, &byproduct_op(bits), &labels)?;
        let fid = stripped.fidelity(&target)?;
        let found: Vec<[bool; 4]> = (0..16u8)
            .map(|k| [k & 8 != 0, k & 4 != 0, k & 2 != 0, k & 1 != 0])
            .filter(|&p| apply_two(&out, &byproduct_op(p), &labels).and_then(|st| st.fidelity(&target)).is_ok_and(|f| f > 1.0 - CHAINED_TOL))
            .collect();
        let v = alloc::vec![
            Verdict::at_least("stripped output fidelity", fid, 1.0 - CHAINED_TOL),
            Verdict::holds("byproduct closed form", found.contains(&bits)),
        ];
        Ok((None, v))
    })?;
    Ok(LogicalResult { transcript, byproducts, target })
}

/// A sequence of blocks applied to the byproduct-free two-qubit input `psi`,
/// which enters carrying `X^x Z^z` byproducts given by `input_flags`.
pub fn run_program(blocks: &[BlockSpec], psi: &StateVector, input_flags: [bool; 4], mode: Mode) -> Result<LogicalResult> {
    run_program_with(blocks, psi, input_flags, mode, &block_angle, false)
}

pub fn run_cnot_block(psi: &StateVector, input_flags: [bool; 4], mode: Mode) -> Result<LogicalResult> {
    run_program(&[BlockSpec::Cnot], psi, input_flags, mode)
}

pub fn run_rotation_block(
    psi: &StateVector,
    top: [f64; 3],
    bottom: [f64; 3],
    input_flags: [bool; 4],
    mode: Mode,
) -> Result<LogicalResult> {
    run_program(&[BlockSpec::Rotation { top, bottom }], psi, input_flags, mode)
}

/// Enumerates the receiver's outcomes and samples the sender's.
pub fn receiver_enumeration(seed: u64) -> Mode {
    Mode::Mixed { seed, enumerate: alloc::vec![String::from(RECEIVER)] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn input() -> StateVector {
        let amps = alloc::vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.6, -0.1), c(0.1, 0.45)];
        let n = linalg::norm(&amps);
        StateVector::from_amplitudes(&[2, 2], amps.iter().map(|a| a / n).collect()).unwrap()
    }

    fn failures(r: &LogicalResult) -> usize {
        r.transcript.branches.iter().filter(|b| !b.passed()).count()
    }

    #[test]
    fn single_link_identity() {
        for theta in [0.0, 0.4, -1.3, 2.9] {
            for s in 0..2 {
                for t in 0..2 {
                    let d = linalg::max_abs_diff(&single_link_map(theta, s, t).unwrap(), &single_link_formula(theta, s, t));
                    assert!(d < 1e-12, "{theta} {s} {t}: {d}");
                }
            }
        }
    }

    #[test]
    fn cnot_every_branch() {
        let r = run_cnot_block(&input(), [false; 4], receiver_enumeration(5)).unwrap();
        assert_eq!(r.transcript.branches.len(), 256);
        assert_eq!(failures(&r), 0);
        assert!(r.passed());
    }

    #[test]
    fn cnot_with_input_byproducts() {
        let r = run_cnot_block(&input(), [true, false, true, true], receiver_enumeration(9)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn rotation_every_branch() {
        let r = run_rotation_block(&input(), [0.3, -0.7, 1.1], [2.0, 0.25, -0.4], [false, true, true, false], receiver_enumeration(2))
            .unwrap();
        assert_eq!(failures(&r), 0);
    }

    #[test]
    fn unadapted_rotation_signs_fail() {
        // Signs without the w2 / w7 adaptation, and the bottom Z angles swapped.
        let naive = |b: &BlockSpec, v: usize, w: &Record, f: &Byproducts| match (b, v) {
            (BlockSpec::Rotation { top, .. }, 3) => Angle::new(top[2], f.x_top.clone()),
            (BlockSpec::Rotation { bottom, .. }, 6) => Angle::new(bottom[2], f.x_bottom.clone()),
            (BlockSpec::Rotation { bottom, .. }, 8) => Angle::new(bottom[0], f.x_bottom.clone()),
            _ => block_angle(b, v, w, f),
        };
        let spec = [BlockSpec::Rotation { top: [0.3, -0.7, 1.1], bottom: [2.0, 0.25, -0.4] }];
        let r = run_program_with(&spec, &input(), [false; 4], receiver_enumeration(2), &naive, false).unwrap();
        assert!(failures(&r) > 0);
    }

    #[test]
    fn intra_column_order_is_irrelevant() {
        let a = run_program_with(&[BlockSpec::Cnot], &input(), [false; 4], receiver_enumeration(1), &block_angle, true).unwrap();
        assert!(a.passed());
    }

    #[test]
    fn remeasuring_is_rejected() {
        let mut s = Session::new("t", Mode::Enumerate);
        s.add_party(SENDER, Role::Sender).unwrap();
        s.add_party(RECEIVER, Role::Receiver).unwrap();
        s.prepare(RECEIVER, &plus("x").tensor(&plus("y")).unwrap()).unwrap();
        let mut run = BlockRun::new(&mut s, 1, [String::from("x"), String::from("y")]);
        run.teleport(1, &Angle::zero()).unwrap();
        assert_eq!(run.teleport(1, &Angle::zero()), Err(Error::AlreadyMeasured(1)));
        run.x_measure(1).unwrap();
        assert_eq!(run.x_measure(1), Err(Error::AlreadyMeasured(1)));
        assert!(run.teleport(5, &Angle::zero()).is_err());
    }

    #[test]
    fn two_block_program() {
        let r = run_program(
            &[BlockSpec::Rotation { top: [0.0; 3], bottom: [0.0; 3] }, BlockSpec::Cnot],
            &input(),
            [false; 4],
            Mode::Sample { seed: 4 },
        )
        .unwrap();
        assert!(r.passed());
    }
}
