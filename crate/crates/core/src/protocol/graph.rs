//! Distributing stabilizer and graph states with controlled-stabilizer
//! circuits, and the constructions built on them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::library::gates::{controlled, hadamard, pauli_z, x_basis, z_basis, z_rotation};
use crate::library::{graph_state, rotated_x_basis, vertex_label, Graph, Pauli, PauliString, StabilizerSet};
use crate::linalg::{self, C64, ZERO};
use crate::tensor::{Gate, Subsystem, StateVector, SubsystemId, CHAINED_TOL};

use super::common::{apply_on, overlap, plus, qubit, reduced_fidelity, strs, OVERLAP_BOUND};
use super::session::{LiveBranch, Mode, OutcomeId, ProtocolTranscript, Recipient, Role, Session, Verdict};

const SENDER: &str = "Alice";

fn pauli_gate(p: Pauli) -> Gate {
    Gate::new(format!("{}", p.letter()), alloc::vec![2], p.matrix()).expect("Pauli matrices are unitary")
}

fn zero(label: &str) -> StateVector {
    qubit(label, [linalg::ONE, ZERO]).expect("|0> is normalized")
}

/// `<p>` with the letters of `p` placed on `labels`.
pub(crate) fn pauli_expectation(state: &StateVector, p: &PauliString, labels: &[&str]) -> Result<f64> {
    let ids = labels.iter().map(|l| state.id(l)).collect::<Result<Vec<_>>>()?;
    Ok(state.expectation(&p.on(&ids)?)?.re)
}

/// The joint `+1` eigenstate of a complete generator set, on `labels`.
pub fn stabilizer_state(set: &StabilizerSet, labels: &[&str]) -> Result<StateVector> {
    let n = set.num_qubits();
    if set.len() != n || labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: if set.len() != n { set.len() } else { labels.len() } });
    }
    let dim = 1usize << n;
    let id = linalg::identity(dim);
    let proj = set.generators().iter().fold(id.clone(), |acc, g| acc * (&id + g.matrix()) * linalg::r(0.5));
    let col = (0..dim)
        .max_by(|&a, &b| proj.column(a).norm().total_cmp(&proj.column(b).norm()))
        .expect("at least one column");
    let amps: Vec<C64> = proj.column(col).iter().copied().collect();
    let subs = labels.iter().map(|l| Subsystem::qubit(*l)).collect();
    let v = StateVector::new(subs, amps)?;
    Ok(v)
}

/// Controlled-`S` on `(control, targets)`, one controlled Pauli per letter;
/// a negative sign becomes a `Z` on the control.
fn controlled_stabilizer(s: &mut Session, party: &str, control: &str, p: &PauliString, targets: &[String]) -> Result<()> {
    for (i, letter) in p.factors() {
        s.apply(party, &controlled(&pauli_gate(letter)), &[control, &targets[i]])?;
    }
    if p.sign() == Some(-1) {
        s.apply(party, &pauli_z(), &[control])?;
    }
    Ok(())
}

/// Prepares controls and targets, applies every controlled stabilizer and
/// returns the control labels.
fn imprint_stabilizers(s: &mut Session, gens: &[PauliString], targets: &[String], target_zero: bool) -> Result<Vec<String>> {
    let controls: Vec<String> = (1..=gens.len()).map(|k| format!("c{k}")).collect();
    for c in &controls {
        s.prepare(SENDER, &plus(c))?;
    }
    for t in targets {
        s.prepare(SENDER, &if target_zero { zero(t) } else { plus(t) })?;
    }
    for (c, g) in controls.iter().zip(gens) {
        controlled_stabilizer(s, SENDER, c, g, targets)?;
    }
    Ok(controls)
}

fn receiver_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("Bob{i}")).collect()
}

fn new_session(protocol: &str, mode: Mode, receivers: &[String]) -> Result<Session> {
    let mut s = Session::new(protocol, mode);
    s.add_party(SENDER, Role::Sender)?;
    for r in receivers {
        s.add_party(r.as_str(), Role::Receiver)?;
    }
    Ok(s)
}

/// Von Neumann entropy of every bipartition `(A, rest)` with the first
/// subsystem in the rest, i.e. each cut counted once.
fn max_bipartite_entropy(state: &StateVector) -> Result<f64> {
    let n = state.num_subsystems();
    let mut worst: f64 = 0.0;
    for mask in 1u64..(1u64 << (n - 1)) {
        let part: Vec<SubsystemId> = (1..n).filter(|i| mask >> (i - 1) & 1 == 1).map(SubsystemId).collect();
        worst = worst.max(state.entanglement_entropy(&part)?);
    }
    Ok(worst)
}

/// Distributes the stabilizer state of `set`, one qubit per receiver. On
/// abort the controls are measured in the computational basis instead.
pub fn run_stabilizer_broadcast(set: &StabilizerSet, abort: bool, mode: Mode) -> Result<ProtocolTranscript> {
    let n = set.num_qubits();
    let names = receiver_names(n);
    let labels: Vec<String> = (1..=n).map(vertex_label).collect();
    let mut s = new_session("stab-broadcast", mode, &names)?;
    let controls = imprint_stabilizers(&mut s, set.generators(), &labels, false)?;
    for (l, r) in labels.iter().zip(&names) {
        s.transfer(SENDER, r, l)?;
    }
    if abort {
        for c in &controls {
            s.measure(SENDER, c, z_basis(SubsystemId(0), 2), true)?;
        }
        s.send_abort(SENDER, Recipient::Broadcast)?;
        let mut t = s.finish(|b| {
            let e = if n > 1 { max_bipartite_entropy(b.state())? } else { 0.0 };
            Ok((Some(b.state().clone()), alloc::vec![Verdict::at_most("bipartite entropy", e, CHAINED_TOL)]))
        })?;
        t.metrics.push(("aborted".into(), 1.0));
        return Ok(t);
    }
    let ids = controls
        .iter()
        .map(|c| s.measure(SENDER, c, x_basis(SubsystemId(0)), true))
        .collect::<Result<Vec<_>>>()?;
    s.send(SENDER, Recipient::Broadcast, &ids)?;
    let fix = |v: &[usize]| set.correction(&v.iter().map(|&x| x == 1).collect::<Vec<_>>());
    for (i, (l, r)) in labels.iter().zip(&names).enumerate() {
        s.apply_with(r, "correction", &[l], &ids, |v| {
            let letter = fix(v)?.letters()[i];
            Ok((letter != Pauli::I).then(|| pauli_gate(letter)))
        })?;
    }
    let lbl = strs(&labels);
    let target = if set.len() == n && n <= 10 { Some(stabilizer_state(set, &lbl)?) } else { None };
    s.finish(|b| {
        let st = b.state();
        let flips: Vec<bool> = ids.iter().map(|&i| b.outcome(i) == 1).collect();
        let mut v = Vec::new();
        // Undo the correction to check the signs the measurement produced.
        let c = set.correction(&flips)?;
        let raw = st.apply(&c.on(&lbl.iter().map(|l| st.id(l)).collect::<Result<Vec<_>>>()?)?)?;
        for (k, g) in set.generators().iter().enumerate() {
            let sign = if flips[k] { -1.0 } else { 1.0 };
            let before = pauli_expectation(&raw, g, &lbl)? * sign;
            v.push(Verdict::at_least(format!("generator {} sign before correction", k + 1), before, 1.0 - CHAINED_TOL));
            v.push(Verdict::at_least(format!("generator {}", k + 1), pauli_expectation(st, g, &lbl)?, 1.0 - CHAINED_TOL));
        }
        if let Some(t) = &target {
            v.push(Verdict::at_least("target overlap", overlap(st, t)?, OVERLAP_BOUND));
        }
        Ok((Some(st.clone()), v))
    })
}

/// Imprints `e^{i theta Z}` on chosen vertices of a graph state through
/// measured ancillas. Without `correct` the receivers keep the `Z^s` byproduct.
pub fn teleport_phase_gate(g: &Graph, angles: &[(usize, f64)], correct: bool, mode: Mode) -> Result<ProtocolTranscript> {
    for (v, _) in angles {
        if !g.contains(*v) {
            return Err(Error::InvalidGraph(format!("no vertex {v}")));
        }
    }
    let verts = g.vertices().to_vec();
    let names: Vec<String> = verts.iter().map(|v| format!("Bob{v}")).collect();
    let labels: Vec<String> = verts.iter().map(|&v| vertex_label(v)).collect();
    let mut s = new_session("phase-teleport", mode, &names)?;
    s.prepare(SENDER, &graph_state(g)?)?;
    let ancillas: Vec<String> = angles.iter().enumerate().map(|(i, (v, _))| format!("c{v}_{i}")).collect();
    for ((v, _), a) in angles.iter().zip(&ancillas) {
        s.prepare(SENDER, &plus(a))?;
        s.apply(SENDER, &crate::library::gates::cz(), &[a, &vertex_label(*v)])?;
    }
    for (l, r) in labels.iter().zip(&names) {
        s.transfer(SENDER, r, l)?;
    }
    let mut ids: Vec<OutcomeId> = Vec::with_capacity(angles.len());
    for ((v, theta), a) in angles.iter().zip(&ancillas) {
        let id = s.measure(SENDER, a, rotated_x_basis(SubsystemId(0), *theta)?, true)?;
        let bob = format!("Bob{v}");
        s.send(SENDER, Recipient::Party(bob.clone()), &[id])?;
        if correct {
            s.apply_with(&bob, "byproduct", &[&vertex_label(*v)], &[id], |x| Ok((x[0] == 1).then(pauli_z)))?;
        }
        ids.push(id);
    }
    let base = graph_state(g)?;
    s.finish(|b| {
        let mut target = base.clone();
        for ((v, theta), &id) in angles.iter().zip(&ids) {
            let l = vertex_label(*v);
            target = apply_on(&target, &z_rotation(*theta), &[&l])?;
            if !correct && b.outcome(id) == 1 {
                target = apply_on(&target, &pauli_z(), &[&l])?;
            }
        }
        let v = alloc::vec![Verdict::at_least("receiver overlap", overlap(b.state(), &target)?, OVERLAP_BOUND)];
        Ok((Some(b.state().clone()), v))
    })
}

/// Distributes the subgraph induced on `keep`: controls of kept vertices
/// are measured in `X`, the others in `Z`, which leaves the discarded
/// receivers in computational states.
pub fn run_graph_reduction(g: &Graph, keep: &[usize], mode: Mode) -> Result<ProtocolTranscript> {
    let reduced_graph = g.induced(keep)?;
    let verts = g.vertices().to_vec();
    let names: Vec<String> = verts.iter().map(|v| format!("Bob{v}")).collect();
    let labels: Vec<String> = verts.iter().map(|&v| vertex_label(v)).collect();
    let mut s = new_session("graph-reduce", mode, &names)?;
    let controls = imprint_stabilizers(&mut s, &g.stabilizers(), &labels, true)?;
    for (l, r) in labels.iter().zip(&names) {
        s.transfer(SENDER, r, l)?;
    }
    let mut ids: Vec<OutcomeId> = Vec::with_capacity(verts.len());
    for (v, c) in verts.iter().zip(&controls) {
        let m = if keep.contains(v) { x_basis(SubsystemId(0)) } else { z_basis(SubsystemId(0), 2) };
        ids.push(s.measure(SENDER, c, m, true)?);
    }
    s.send(SENDER, Recipient::Broadcast, &ids)?;
    let outcome_of = |v: usize| ids[g.index_of(v).expect("vertex exists")];
    for (idx, &v) in verts.iter().enumerate() {
        if !keep.contains(&v) {
            continue;
        }
        let mut deps = alloc::vec![ids[idx]];
        deps.extend(g.neighbors(v).into_iter().filter(|u| !keep.contains(u)).map(outcome_of));
        s.apply_with(&names[idx], "correction", &[&labels[idx]], &deps, |x| {
            Ok((x.iter().sum::<usize>() % 2 == 1).then(pauli_z))
        })?;
    }
    let target = graph_state(&reduced_graph)?;
    s.finish(|b| {
        let st = b.state();
        let mut v = alloc::vec![Verdict::at_least("kept block fidelity", reduced_fidelity(st, &target)?, OVERLAP_BOUND)];
        for (idx, &u) in verts.iter().enumerate() {
            if keep.contains(&u) {
                continue;
            }
            let bit = b.outcome(ids[idx]);
            let q = if bit == 0 { [linalg::ONE, ZERO] } else { [ZERO, linalg::ONE] };
            let f = reduced_fidelity(st, &qubit(&labels[idx], q)?)?;
            v.push(Verdict::at_least(format!("{} computational", labels[idx]), f, OVERLAP_BOUND));
        }
        Ok((Some(st.clone()), v))
    })
}

/// `(|0...0> + |1...1>)/sqrt 2` on `labels`.
pub fn ghz_state(labels: &[&str]) -> Result<StateVector> {
    let n = labels.len();
    let mut amps = alloc::vec![ZERO; 1 << n];
    let h = linalg::r(core::f64::consts::FRAC_1_SQRT_2);
    amps[0] = h;
    amps[(1 << n) - 1] = h;
    StateVector::new(labels.iter().map(|l| Subsystem::qubit(*l)).collect(), amps)
}

/// `Z_i Z_{i+1}` for neighbouring positions and `X...X`.
pub fn ghz_generators(n: usize) -> Result<StabilizerSet> {
    let mut gens: Vec<PauliString> = (0..n - 1)
        .map(|i| {
            let mut l = alloc::vec![Pauli::I; n];
            l[i] = Pauli::Z;
            l[i + 1] = Pauli::Z;
            PauliString::new(false, l)
        })
        .collect();
    gens.push(PauliString::new(false, alloc::vec![Pauli::X; n]));
    StabilizerSet::new(gens)
}

fn ghz_verdicts(b: &LiveBranch, labels: &[&str]) -> Result<Vec<Verdict>> {
    let st = b.state();
    let mut v = alloc::vec![Verdict::at_least("GHZ fidelity", reduced_fidelity(st, &ghz_state(labels)?)?, OVERLAP_BOUND)];
    for (k, g) in ghz_generators(labels.len())?.generators().iter().enumerate() {
        v.push(Verdict::at_least(format!("{g} [{k}]"), pauli_expectation(st, g, labels)?, 1.0 - CHAINED_TOL));
    }
    Ok(v)
}

/// Star graph with the sender at the centre; Hadamards on the leaves turn
/// it into a GHZ state that includes the sender's qubit.
pub fn run_ghz_star(leaves: usize, mode: Mode) -> Result<ProtocolTranscript> {
    if leaves < 2 {
        return Err(Error::OutOfRange { what: "star leaves", value: leaves as i64, bound: 2 });
    }
    let g = Graph::star(leaves + 1);
    let names = receiver_names(leaves);
    let labels: Vec<String> = (1..=leaves + 1).map(vertex_label).collect();
    let mut s = new_session("ghz-star", mode, &names)?;
    let controls = imprint_stabilizers(&mut s, &g.stabilizers(), &labels, false)?;
    for (l, r) in labels[1..].iter().zip(&names) {
        s.transfer(SENDER, r, l)?;
    }
    let ids = controls
        .iter()
        .map(|c| s.measure(SENDER, c, x_basis(SubsystemId(0)), true))
        .collect::<Result<Vec<_>>>()?;
    s.send(SENDER, Recipient::Broadcast, &ids)?;
    s.apply_with(SENDER, "byproduct", &[&labels[0]], &[ids[0]], |x| Ok((x[0] == 1).then(pauli_z)))?;
    for (i, r) in names.iter().enumerate() {
        let l = labels[i + 1].as_str();
        s.apply_with(r, "byproduct", &[l], &[ids[i + 1]], |x| Ok((x[0] == 1).then(pauli_z)))?;
        s.apply(r, &hadamard(), &[l])?;
    }
    let lbl = strs(&labels);
    s.finish(|b| Ok((Some(b.state().clone()), ghz_verdicts(b, &lbl)?)))
}

/// Ring of `2N` vertices: odd sites go to the receivers, the sender measures
/// the even sites in `X`, and the receivers end in a GHZ state.
pub fn run_ghz_ring(receivers: usize, mode: Mode) -> Result<ProtocolTranscript> {
    if receivers < 2 {
        return Err(Error::OutOfRange { what: "ring receivers", value: receivers as i64, bound: 2 });
    }
    let n = receivers;
    let g = Graph::ring(2 * n)?;
    let names = receiver_names(n);
    let labels: Vec<String> = (1..=2 * n).map(vertex_label).collect();
    let odd: Vec<String> = (0..n).map(|i| labels[2 * i].clone()).collect();
    let mut s = new_session("ghz-ring", mode, &names)?;
    let controls = imprint_stabilizers(&mut s, &g.stabilizers(), &labels, false)?;
    for (l, r) in odd.iter().zip(&names) {
        s.transfer(SENDER, r, l)?;
    }
    let cids = controls
        .iter()
        .map(|c| s.measure(SENDER, c, x_basis(SubsystemId(0)), true))
        .collect::<Result<Vec<_>>>()?;
    // Even site 2k sits at index 2k - 1.
    let sids = (1..=n)
        .map(|k| s.measure(SENDER, &labels[2 * k - 1], x_basis(SubsystemId(0)), true))
        .collect::<Result<Vec<_>>>()?;
    let mut all = cids.clone();
    all.extend(&sids);
    s.send(SENDER, Recipient::Broadcast, &all)?;
    let ghz = ghz_generators(n)?;
    let flips = move |v: &[usize]| -> Vec<bool> {
        let (c, sv) = v.split_at(2 * n);
        let mut f: Vec<bool> = (1..n).map(|k| (c[2 * k - 1] + sv[k - 1]) % 2 == 1).collect();
        f.push((0..n).map(|k| c[2 * k]).sum::<usize>() % 2 == 1);
        f
    };
    for (i, (l, r)) in odd.iter().zip(&names).enumerate() {
        s.apply_with(r, "correction", &[l], &all, |v| {
            let letter = ghz.correction(&flips(v))?.letters()[i];
            Ok((letter != Pauli::I).then(|| pauli_gate(letter)))
        })?;
    }
    let lbl = strs(&odd);
    s.finish(|b| Ok((Some(b.state().clone()), ghz_verdicts(b, &lbl)?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass(t: &ProtocolTranscript) {
        assert!(t.passed(), "{:?}", t.branches.iter().flat_map(|b| b.verdicts.iter().filter(|v| !v.passed())).collect::<Vec<_>>());
    }

    #[test]
    fn path_graph_stabilizers() {
        let g = Graph::path(3);
        let set = StabilizerSet::new(g.stabilizers()).unwrap();
        let t = run_stabilizer_broadcast(&set, false, Mode::Enumerate).unwrap();
        // K1 K3 = X1 X3 fixes s1 = s3 on |+++>.
        assert_eq!(t.branches.len(), 4);
        all_pass(&t);
        let st = t.branches[3].final_state.as_ref().unwrap();
        assert!(overlap(st, &graph_state(&g).unwrap()).unwrap() > OVERLAP_BOUND);
    }

    #[test]
    fn bell_pair() {
        let set = StabilizerSet::parse(&["XX", "ZZ"]).unwrap();
        let t = run_stabilizer_broadcast(&set, false, Mode::Enumerate).unwrap();
        // |++> is already an XX eigenstate, so only the ZZ outcome is random.
        assert_eq!(t.branches.len(), 2);
        all_pass(&t);
    }

    #[test]
    fn negative_generators() {
        let set = StabilizerSet::parse(&["-XX", "-ZZ"]).unwrap();
        all_pass(&run_stabilizer_broadcast(&set, false, Mode::Enumerate).unwrap());
        let set = StabilizerSet::parse(&["+XYZ", "+ZXY", "+YZX"]);
        if let Ok(set) = set {
            all_pass(&run_stabilizer_broadcast(&set, false, Mode::Enumerate).unwrap());
        }
    }

    #[test]
    fn abort_leaves_product_state() {
        let set = StabilizerSet::new(Graph::ring(4).unwrap().stabilizers()).unwrap();
        let t = run_stabilizer_broadcast(&set, true, Mode::Enumerate).unwrap();
        all_pass(&t);
    }

    #[test]
    fn teleported_phase_without_correction() {
        let g = Graph::path(2);
        let t = teleport_phase_gate(&g, &[(1, 0.0)], false, Mode::Enumerate).unwrap();
        all_pass(&t);
        let t = teleport_phase_gate(&g, &[(1, core::f64::consts::FRAC_PI_4), (2, 0.3)], true, Mode::Enumerate).unwrap();
        assert_eq!(t.branches.len(), 4);
        all_pass(&t);
    }

    #[test]
    fn reduction_of_six_vertices() {
        let g = Graph::numbered(6, [(1, 2), (1, 3), (2, 3), (3, 4), (3, 5), (3, 6), (4, 6), (5, 6)]).unwrap();
        let t = run_graph_reduction(&g, &[1, 2, 3, 4, 5], Mode::Enumerate).unwrap();
        assert_eq!(t.branches.len(), 64);
        all_pass(&t);
    }

    #[test]
    fn reduction_keep_all_and_keep_one() {
        let g = Graph::path(3);
        all_pass(&run_graph_reduction(&g, &[1, 2, 3], Mode::Enumerate).unwrap());
        all_pass(&run_graph_reduction(&g, &[2], Mode::Enumerate).unwrap());
    }

    #[test]
    fn ghz_constructions() {
        for n in 2..=5 {
            all_pass(&run_ghz_star(n, Mode::Enumerate).unwrap());
        }
        for n in 2..=4 {
            all_pass(&run_ghz_ring(n, Mode::Enumerate).unwrap());
        }
    }
}
