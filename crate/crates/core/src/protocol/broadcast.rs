//! Broadcasting phase-parameterized qubits from one or more senders.

#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::library::gates::{identity, permutation, z_basis};
use crate::library::{
    controlled_shift, correction_gate, fourier_basis, make_broadcast_state, sender_label, sender_phase_gate,
    BroadcastSpec, DiagonalPhaseGate,
};
use crate::linalg::{self, C64, ZERO};
use crate::tensor::{Subsystem, StateVector, SubsystemId};

use super::common::{
    apply_on, overlap, overlap_verdict, party_names, per_receiver_verdicts, product, qubit, strs, OVERLAP_BOUND,
};
use super::session::{Mode, OutcomeId, ProtocolTranscript, Recipient, Role, Session, Verdict};

/// Basic broadcast: one sender, `receivers` receivers, target
/// `alpha e^{i theta}|0> + beta e^{-i theta}|1>` on every receiver.
pub fn run_bbp(alpha: C64, beta: C64, theta: f64, receivers: usize, mode: Mode) -> Result<ProtocolTranscript> {
    let spec = BroadcastSpec::new(1, receivers, alpha, beta)?;
    broadcast_phase("bbp", &spec, &[theta], &[true], false, mode)
}

/// `M` senders each adding their own angle; inactive senders only measure.
pub fn run_multisender(spec: &BroadcastSpec, thetas: &[f64], active: &[bool], mode: Mode) -> Result<ProtocolTranscript> {
    if spec.entangler.is_some() {
        return Err(Error::InvalidParameter("multisender broadcast takes no entangler".into()));
    }
    broadcast_phase("multisender", spec, thetas, active, false, mode)
}

/// Distributes `entangler * (target qubit)^{⊗N}`; on abort every sender
/// measures in the computational basis instead.
pub fn run_graph_dist_phase(spec: &BroadcastSpec, thetas: &[f64], abort: bool, mode: Mode) -> Result<ProtocolTranscript> {
    if spec.entangler.is_none() {
        return Err(Error::InvalidParameter("graph distribution needs an entangler".into()));
    }
    let active = alloc::vec![true; spec.senders];
    broadcast_phase("graph-dist-phase", spec, thetas, &active, abort, mode)
}

fn broadcast_phase(
    protocol: &str,
    spec: &BroadcastSpec,
    thetas: &[f64],
    active: &[bool],
    abort: bool,
    mode: Mode,
) -> Result<ProtocolTranscript> {
    spec.validate()?;
    let (m, n, d) = (spec.senders, spec.receivers, spec.sender_dim());
    if m == 0 {
        return Err(Error::InvalidParameter("at least one sender is required".into()));
    }
    if thetas.len() != m || active.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: if thetas.len() != m { thetas.len() } else { active.len() } });
    }
    let senders = party_names("Alice", m);
    let receivers = party_names("Bob", n);
    let a_labels = spec.sender_labels();
    let b_labels = spec.receiver_labels();

    let mut s = Session::new(protocol, mode);
    for p in &senders {
        s.add_party(p.as_str(), Role::Sender)?;
    }
    for p in &receivers {
        s.add_party(p.as_str(), Role::Receiver)?;
    }
    s.prepare(&senders[0], &make_broadcast_state(spec)?)?;
    for j in 1..m {
        s.transfer(&senders[0], &senders[j], &a_labels[j])?;
    }
    for l in 0..n {
        s.transfer(&senders[0], &receivers[l], &b_labels[l])?;
    }

    if abort {
        for j in 0..m {
            s.measure(&senders[j], &a_labels[j], z_basis(SubsystemId(0), d), true)?;
            s.send_abort(&senders[j], Recipient::Broadcast)?;
        }
        let mut t = s.finish(|b| Ok((Some(b.state().clone()), Vec::new())))?;
        t.metrics.push(("aborted".into(), 1.0));
        return Ok(t);
    }

    let mut total = 0.0;
    for j in 0..m {
        let g = if active[j] {
            total += thetas[j];
            sender_phase_gate(d, n, thetas[j])?
        } else {
            identity(d)
        };
        s.apply(&senders[j], &g, &[&a_labels[j]])?;
    }
    let mut ids: Vec<OutcomeId> = Vec::with_capacity(m);
    for j in 0..m {
        let id = s.measure(&senders[j], &a_labels[j], fourier_basis(SubsystemId(0), d)?, true)?;
        s.send(&senders[j], Recipient::Broadcast, &[id])?;
        ids.push(id);
    }
    for l in 0..n {
        s.apply_with(&receivers[l], "correction", &[&b_labels[l]], &ids, |v| {
            correction_gate(d, v.iter().sum()).map(Some)
        })?;
    }

    let q = spec.target_qubit(total);
    let mut target = product(&b_labels, q)?;
    if let Some(e) = &spec.entangler {
        target = apply_on(&target, &e.gate(), &strs(&b_labels))?;
    }
    let entangled = spec.entangler.is_some();
    let mut t = s.finish(|b| {
        let mut v = alloc::vec![overlap_verdict("receiver overlap", b.state(), &target)?];
        if !entangled {
            v.extend(per_receiver_verdicts(b.state(), &b_labels, q)?);
        }
        Ok((Some(b.state().clone()), v))
    })?;
    t.metrics.push(("total angle".into(), total));
    Ok(t)
}

/// Broadcast in a rotated basis: `T` maps `|j>` to `|s_j>` and both
/// receivers end with `(e^{i theta}|s0><s0| + e^{-i theta}|s1><s1|)|psi>`.
pub fn run_bbp_rotated(t: &crate::tensor::Gate, psi: [C64; 2], theta: f64, mode: Mode) -> Result<ProtocolTranscript> {
    if t.dims != [2] {
        return Err(Error::DimensionMismatch { expected: 2, found: t.matrix.nrows() });
    }
    if !t.is_unitary() {
        return Err(Error::NotUnitary);
    }
    let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let psi = [psi[0] / norm, psi[1] / norm];
    let (alice, bobs) = ("Alice", ["Bob1", "Bob2"]);
    let (a, b) = ("a", ["b1", "b2"]);
    let mut s = Session::new("bbp-rotated", mode);
    s.add_party(alice, Role::Sender)?;
    for p in bobs {
        s.add_party(p, Role::Receiver)?;
    }
    let qutrit = StateVector::basis(alloc::vec![Subsystem::new(a, 3)], &[0])?;
    s.prepare(alice, &qutrit)?;
    for l in b {
        s.prepare(alice, &qubit(l, psi)?)?;
    }
    let t_inv = t.adjoint();
    let shift_down = controlled_shift(2, 3, -1)?;
    for l in b {
        s.apply(alice, &t_inv, &[l])?;
    }
    for l in b {
        s.apply(alice, &shift_down, &[l, a])?;
    }
    for l in b {
        s.apply(alice, t, &[l])?;
    }

    // Amplitudes of psi in the rotated basis.
    let tm = &t.matrix;
    let mu = tm[(0, 0)].conj() * psi[0] + tm[(1, 0)].conj() * psi[1];
    let nu = tm[(0, 1)].conj() * psi[0] + tm[(1, 1)].conj() * psi[1];
    let s0 = [tm[(0, 0)], tm[(1, 0)]];
    let s1 = [tm[(0, 1)], tm[(1, 1)]];
    let template = rotated_template(mu, nu, s0, s1)?;
    let prepared = overlap(s.branches()[0].state(), &template)?;

    // Relabel the qutrit so its digit counts receivers in |s0>.
    let relabel = permutation("relabel", &[2, 0, 1])?;
    s.apply(alice, &relabel, &[a])?;
    for (l, p) in b.iter().zip(bobs) {
        s.transfer(alice, p, l)?;
    }
    s.apply(alice, &sender_phase_gate(3, 2, theta)?, &[a])?;
    let id = s.measure(alice, a, fourier_basis(SubsystemId(0), 3)?, true)?;
    s.send(alice, Recipient::Broadcast, &[id])?;
    let t_owned = t.clone();
    for (l, p) in b.iter().zip(bobs) {
        s.apply_with(p, "correction", &[l], &[id], |v| Ok(Some(correction_gate(3, v[0])?.conjugated_by(&t_owned)?)))?;
    }

    let rotated = t.matrix.clone() * linalg::diag(&[linalg::cis(theta), linalg::cis(-theta)]) * t.matrix.adjoint();
    let q = [rotated[(0, 0)] * psi[0] + rotated[(0, 1)] * psi[1], rotated[(1, 0)] * psi[0] + rotated[(1, 1)] * psi[1]];
    let labels: Vec<String> = b.iter().map(|l| String::from(*l)).collect();
    let target = product(&labels, q)?;
    let mut tr = s.finish(|br| {
        let mut v = alloc::vec![overlap_verdict("receiver overlap", br.state(), &target)?];
        v.extend(per_receiver_verdicts(br.state(), &labels, q)?);
        Ok((Some(br.state().clone()), v))
    })?;
    tr.verdicts.push(Verdict::at_least("prepared template", prepared, OVERLAP_BOUND));
    Ok(tr)
}

/// `mu^2|0>|s0 s0> + nu^2|1>|s1 s1> + mu nu|2>(|s0 s1> + |s1 s0>)` over `(a, b1, b2)`.
pub fn rotated_template(mu: C64, nu: C64, s0: [C64; 2], s1: [C64; 2]) -> Result<StateVector> {
    let mut amps = alloc::vec![ZERO; 12];
    let terms = [(0usize, mu * mu, s0, s0), (1, nu * nu, s1, s1), (2, mu * nu, s0, s1), (2, mu * nu, s1, s0)];
    for (k, w, x, y) in terms {
        for i in 0..2 {
            for j in 0..2 {
                amps[k * 4 + i * 2 + j] += w * x[i] * y[j];
            }
        }
    }
    StateVector::new(alloc::vec![Subsystem::new("a", 3), Subsystem::qubit("b1"), Subsystem::qubit("b2")], amps)
}

/// Labels of the template with `m` senders, senders first.
fn template_order(m: usize, n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=m).map(sender_label).collect();
    v.extend((1..=n).map(crate::library::receiver_label));
    v
}

fn pair_label(m: usize) -> String {
    format!("{}'", sender_label(m))
}

/// Runs the sender-extension step on a session holding `Ψ^{(M,N)}`:
/// Alice M entangles her qudit with one half of a maximally entangled pair
/// whose other half belongs to the new sender, measures, and the new sender
/// relabels. Returns the new sender's party name.
fn extend(s: &mut Session, senders: &[String], m: usize, d: usize) -> Result<String> {
    let owner = &senders[m - 1];
    let newcomer = format!("Alice{}", m + 1);
    s.add_party(newcomer.as_str(), Role::Sender)?;
    let (aux, fresh) = (pair_label(m), sender_label(m + 1));
    let norm = linalg::r(1.0 / (d as f64).sqrt());
    let mut pair = alloc::vec![ZERO; d * d];
    for l in 0..d {
        pair[l * d + l] = norm;
    }
    let pair = StateVector::new(alloc::vec![Subsystem::new(aux.as_str(), d), Subsystem::new(fresh.as_str(), d)], pair)?;
    s.prepare(owner, &pair)?;
    s.transfer(owner, &newcomer, &fresh)?;
    s.apply(owner, &controlled_shift(d, d, 1)?, &[&sender_label(m), &aux])?;
    let id = s.measure(owner, &aux, z_basis(SubsystemId(0), d), true)?;
    s.send(owner, Recipient::Party(newcomer.clone()), &[id])?;
    s.apply_with(&newcomer, "relabel", &[&fresh], &[id], |v| {
        let j = v[0];
        let perm: Vec<usize> = (0..d).map(|x| (j + d - x) % d).collect();
        permutation(&format!("relabel({j})"), &perm).map(Some)
    })?;
    Ok(newcomer)
}

/// Removes `which` (1-based) by a Fourier measurement; receivers correct.
fn remove(s: &mut Session, who: &str, label: &str, receivers: &[String], d: usize) -> Result<()> {
    let id = s.measure(who, label, fourier_basis(SubsystemId(0), d)?, true)?;
    s.send(who, Recipient::Broadcast, &[id])?;
    for (l, p) in receivers.iter().enumerate() {
        s.apply_with(p, "correction", &[&crate::library::receiver_label(l + 1)], &[id], |v| {
            correction_gate(d, v[0]).map(Some)
        })?;
    }
    Ok(())
}

fn template_session(protocol: &str, spec: &BroadcastSpec, mode: Mode) -> Result<(Session, Vec<String>, Vec<String>)> {
    if spec.entangler.is_some() {
        return Err(Error::InvalidParameter("sender changes take no entangler".into()));
    }
    let (m, n) = (spec.senders, spec.receivers);
    let senders: Vec<String> = (1..=m).map(|j| format!("Alice{j}")).collect();
    let receivers = party_names("Bob", n);
    let mut s = Session::new(protocol, mode);
    for p in &senders {
        s.add_party(p.as_str(), Role::Sender)?;
    }
    for p in &receivers {
        s.add_party(p.as_str(), Role::Receiver)?;
    }
    s.prepare(&senders[0], &make_broadcast_state(spec)?)?;
    for j in 1..m {
        s.transfer(&senders[0], &senders[j], &sender_label(j + 1))?;
    }
    for (l, p) in receivers.iter().enumerate() {
        s.transfer(&senders[0], p, &crate::library::receiver_label(l + 1))?;
    }
    Ok((s, senders, receivers))
}

/// Compares a branch state with `Ψ^{(M,N)}` after renaming its senders, in
/// `present` order, to `a1..aM`.
fn template_overlap(state: &StateVector, spec: &BroadcastSpec, present: &[String]) -> Result<f64> {
    let n = spec.receivers;
    let mut order: Vec<String> = present.to_vec();
    order.extend((1..=n).map(crate::library::receiver_label));
    let arranged = state.permute_labels(&strs(&order))?;
    let canonical = template_order(present.len(), n);
    let renamed = arranged.with_labels(&strs(&canonical))?;
    let target = make_broadcast_state(&BroadcastSpec { senders: present.len(), entangler: None, ..spec.clone() })?;
    Ok(renamed.inner(&target)?.norm())
}

/// Turns `Ψ^{(M,N)}` into `Ψ^{(M+1,N)}` with the help of a maximally
/// entangled pair shared between Alice M and the new sender.
pub fn add_sender(spec: &BroadcastSpec, mode: Mode) -> Result<ProtocolTranscript> {
    let (m, d) = (spec.senders, spec.sender_dim());
    if m == 0 {
        return Err(Error::InvalidParameter("adding a sender needs an existing sender".into()));
    }
    let (mut s, senders, _) = template_session("add-sender", spec, mode)?;
    extend(&mut s, &senders, m, d)?;
    let present: Vec<String> = (1..=m + 1).map(sender_label).collect();
    s.finish(|b| {
        let f = template_overlap(b.state(), spec, &present)?;
        Ok((Some(b.state().clone()), alloc::vec![Verdict::at_least("template overlap", f, OVERLAP_BOUND)]))
    })
}

/// Sender `which` (1-based) leaves; the result is `Ψ^{(M-1,N)}` over the
/// remaining senders.
pub fn delete_sender(spec: &BroadcastSpec, which: usize, mode: Mode) -> Result<ProtocolTranscript> {
    let (m, d) = (spec.senders, spec.sender_dim());
    if which == 0 || which > m {
        return Err(Error::OutOfRange { what: "deleted sender", value: which as i64, bound: m as i64 });
    }
    let (mut s, senders, receivers) = template_session("delete-sender", spec, mode)?;
    remove(&mut s, &senders[which - 1], &sender_label(which), &receivers, d)?;
    let present: Vec<String> = (1..=m).filter(|&j| j != which).map(sender_label).collect();
    s.finish(|b| {
        let f = template_overlap(b.state(), spec, &present)?;
        Ok((Some(b.state().clone()), alloc::vec![Verdict::at_least("template overlap", f, OVERLAP_BOUND)]))
    })
}

/// Adds a sender, then lets the first sender leave: the role of Alice 1 is
/// handed over and the template returns to `Ψ^{(M,N)}`.
pub fn add_then_delete(spec: &BroadcastSpec, mode: Mode) -> Result<ProtocolTranscript> {
    let (m, d) = (spec.senders, spec.sender_dim());
    if m == 0 {
        return Err(Error::InvalidParameter("adding a sender needs an existing sender".into()));
    }
    let (mut s, senders, receivers) = template_session("add-then-delete", spec, mode)?;
    extend(&mut s, &senders, m, d)?;
    remove(&mut s, &senders[0], &sender_label(1), &receivers, d)?;
    let present: Vec<String> = (2..=m + 1).map(sender_label).collect();
    s.finish(|b| {
        let f = template_overlap(b.state(), spec, &present)?;
        Ok((Some(b.state().clone()), alloc::vec![Verdict::at_least("template overlap", f, OVERLAP_BOUND)]))
    })
}

/// The diagonal entangler for a graph's CZ edges, as a convenience.
pub fn cz_entangler(g: &crate::library::Graph) -> Result<DiagonalPhaseGate> {
    DiagonalPhaseGate::cz_graph(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::gates;
    use crate::linalg::{r, ONE};
    use crate::protocol::common::front;
    use core::f64::consts::{FRAC_1_SQRT_2 as H, PI};

    fn equal_split() -> (C64, C64) {
        (r(H), r(H))
    }

    #[test]
    fn bbp_three_equal_branches() {
        let (a, b) = equal_split();
        let t = run_bbp(a, b, 0.0, 2, Mode::Enumerate).unwrap();
        assert_eq!(t.branches.len(), 3);
        for br in &t.branches {
            assert!((br.probability - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(t.passed(), "{:?}", t.verdicts);
    }

    #[test]
    fn bbp_first_branch_needs_no_phase_fix() {
        let (a, b) = (r(0.6), linalg::c(0.0, 0.8));
        let t = run_bbp(a, b, 0.7, 2, Mode::Enumerate).unwrap();
        let br = t.branches.iter().find(|b| b.outcomes == [0]).unwrap();
        assert_eq!(br.corrections[0].1.as_deref(), Some("C(0/3)"));
        assert!(t.passed());
    }

    #[test]
    fn rotated_identity_matches_plain() {
        let psi = [r(0.6), r(0.8)];
        let t = run_bbp_rotated(&identity(2), psi, 0.3, Mode::Enumerate).unwrap();
        assert!(t.passed(), "{:?}", t.verdicts);
        let plain = run_bbp(psi[0], psi[1], 0.3, 2, Mode::Enumerate).unwrap();
        for (x, y) in t.branches.iter().zip(&plain.branches) {
            let (x, y) = (x.final_state.as_ref().unwrap(), y.final_state.as_ref().unwrap());
            assert!(x.max_abs_diff(y).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rotated_hadamard_gives_x_rotation() {
        let theta = 0.4;
        let t = run_bbp_rotated(&gates::hadamard(), [ONE, ZERO], theta, Mode::Enumerate).unwrap();
        assert!(t.passed());
        let expect = qubit("b1", [r(theta.cos()), linalg::c(0.0, theta.sin())]).unwrap();
        for br in &t.branches {
            let f = super::super::common::reduced_fidelity(br.final_state.as_ref().unwrap(), &expect).unwrap();
            assert!(f > 1.0 - 1e-12);
        }
    }

    #[test]
    fn rotated_rejects_non_unitary() {
        let g = crate::tensor::Gate::new("bad", alloc::vec![2], linalg::diag(&[ONE, r(2.0)])).unwrap();
        assert_eq!(run_bbp_rotated(&g, [ONE, ZERO], 0.0, Mode::Enumerate).unwrap_err(), Error::NotUnitary);
    }

    #[test]
    fn inactive_sender_contributes_nothing() {
        let spec = BroadcastSpec::new(2, 2, r(0.8), r(0.6)).unwrap();
        let t1 = run_multisender(&spec, &[0.3, 1.1], &[true, false], Mode::Enumerate).unwrap();
        let t2 = run_multisender(&spec, &[0.3, -2.0], &[true, false], Mode::Enumerate).unwrap();
        assert!(t1.passed() && t2.passed());
        for (x, y) in t1.branches.iter().zip(&t2.branches) {
            assert!(x.final_state.as_ref().unwrap().max_abs_diff(y.final_state.as_ref().unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn add_sender_all_outcomes() {
        let spec = BroadcastSpec::new(1, 2, r(0.8), linalg::c(0.0, 0.6)).unwrap();
        let t = add_sender(&spec, Mode::Enumerate).unwrap();
        assert_eq!(t.branches.len(), 3);
        assert!(t.passed(), "{:?}", t.branches[0].verdicts);
    }

    #[test]
    fn delete_last_sender_is_bbp() {
        let (a, b) = equal_split();
        let spec = BroadcastSpec::new(1, 2, a, b).unwrap();
        let t = delete_sender(&spec, 1, Mode::Enumerate).unwrap();
        let plus = product(&spec.receiver_labels(), [a, b]).unwrap();
        for br in &t.branches {
            assert!(overlap(br.final_state.as_ref().unwrap(), &plus).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn hand_over_restores_template() {
        let spec = BroadcastSpec::new(2, 3, r(0.6), linalg::cis(PI / 5.0) * 0.8).unwrap();
        let t = add_then_delete(&spec, Mode::Enumerate).unwrap();
        assert_eq!(t.branches.len(), 16);
        assert!(t.passed());
    }

    #[test]
    fn abort_records_leftover() {
        let g = crate::library::Graph::path(2);
        let (a, b) = equal_split();
        let spec = BroadcastSpec::new(1, 2, a, b).unwrap().with_entangler(cz_entangler(&g).unwrap()).unwrap();
        let t = run_graph_dist_phase(&spec, &[0.0], true, Mode::Enumerate).unwrap();
        assert_eq!(t.metric("aborted"), Some(1.0));
        assert!(t.branches.iter().all(|b| b.final_state.is_some()));
        let _ = front(t.branches[0].final_state.as_ref().unwrap(), &["b1"]).unwrap();
    }
}
