//! Key generation from broadcast trine states: receiver authentication and
//! three-state key distribution.

#[allow(unused_imports)] // std, when linked, provides these methods inherently
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::library::{
    correction_gate, fourier_basis, make_broadcast_state, sender_phase_gate, trine_angle, trine_states, BroadcastSpec,
};
use crate::linalg;
use crate::tensor::{SubsystemId, ALGEBRAIC_TOL};

use super::common::party_names;
use super::session::{Mode, OutcomeId, ProtocolTranscript, Recipient, Role, Session, Verdict};

const SENDER: &str = "Alice";

/// Seed of round `r`, decorrelated from neighbouring rounds.
pub fn round_seed(seed: u64, r: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (r as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct TrineRound {
    session: Session,
    receivers: Vec<String>,
    labels: Vec<String>,
    sent: OutcomeId,
}

/// Alice picks a trine label uniformly and broadcasts that trine state to
/// every receiver through the phase protocol.
fn trine_round(protocol: &str, receivers: usize, mode: Mode) -> Result<TrineRound> {
    let h = linalg::r(FRAC_1_SQRT_2);
    let spec = BroadcastSpec::new(1, receivers, h, h)?;
    let names = party_names("Bob", receivers);
    let labels = spec.receiver_labels();
    let a = spec.sender_labels().remove(0);
    let d = spec.sender_dim();

    let mut s = Session::new(protocol, mode);
    s.add_party(SENDER, Role::Sender)?;
    for n in &names {
        s.add_party(n.as_str(), Role::Receiver)?;
    }
    let sent = s.choose(SENDER, "trine label", &[], |_| alloc::vec![1.0; 3])?;
    s.prepare(SENDER, &make_broadcast_state(&spec)?)?;
    for (l, n) in labels.iter().zip(&names) {
        s.transfer(SENDER, n, l)?;
    }
    s.apply_with(SENDER, "trine phase", &[&a], &[sent], |v| sender_phase_gate(d, receivers, trine_angle(v[0])).map(Some))?;
    let f = s.measure(SENDER, &a, fourier_basis(SubsystemId(0), d)?, true)?;
    s.send(SENDER, Recipient::Broadcast, &[f])?;
    for (l, n) in labels.iter().zip(&names) {
        s.apply_with(n, "correction", &[l], &[f], |v| correction_gate(d, v[0]).map(Some))?;
    }
    Ok(TrineRound { session: s, receivers: names, labels, sent })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthRound {
    pub sent: usize,
    /// Anti-trine outcome of each receiver.
    pub outcomes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthReport {
    pub rounds: Vec<AuthRound>,
    /// Rounds in which some receiver's outcome equals the sent label.
    pub violations: usize,
    /// Fraction of (round, receiver pair) samples with equal outcomes.
    pub pairwise_agreement: f64,
    /// Fraction of rounds in which all receivers agree.
    pub full_agreement: f64,
    /// Exact `max Pr[outcome = sent]` over receivers and labels.
    pub max_hit_probability: f64,
    /// Exact `Pr[outcome | sent]`, indexed `[receiver][sent][outcome]`.
    pub conditional: Vec<[[f64; 3]; 3]>,
    /// Exact pairwise agreement probability.
    pub exact_pairwise_agreement: f64,
    /// The exact single-round transcript.
    pub exact: ProtocolTranscript,
}

fn auth_session(receivers: usize, mode: Mode) -> Result<(ProtocolTranscript, OutcomeId, Vec<OutcomeId>)> {
    let TrineRound { mut session, receivers: names, labels, sent } = trine_round("auth", receivers, mode)?;
    let trines = trine_states();
    let mut ids = Vec::with_capacity(receivers);
    for (l, n) in labels.iter().zip(&names) {
        ids.push(session.measure(n, l, trines.anti_trine_povm(SubsystemId(0))?, false)?);
    }
    let t = session.finish(|_| Ok((None, Vec::new())))?;
    Ok((t, sent, ids))
}

/// `rounds` sampled rounds plus one exhaustively enumerated round.
pub fn run_authentication(rounds: usize, receivers: usize, seed: u64) -> Result<AuthReport> {
    if receivers == 0 {
        return Err(Error::InvalidParameter("at least one receiver is required".into()));
    }
    let mut out = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let (t, sent, ids) = auth_session(receivers, Mode::Sample { seed: round_seed(seed, r) })?;
        let b = &t.branches[0];
        out.push(AuthRound { sent: b.outcomes[sent], outcomes: ids.iter().map(|&i| b.outcomes[i]).collect() });
    }
    let violations = out.iter().filter(|r| r.outcomes.contains(&r.sent)).count();
    let pairs = receivers * (receivers - 1) / 2;
    let mut agree = 0usize;
    for r in &out {
        for i in 0..receivers {
            for j in i + 1..receivers {
                agree += (r.outcomes[i] == r.outcomes[j]) as usize;
            }
        }
    }
    let pairwise_agreement = if pairs == 0 || rounds == 0 { 1.0 } else { agree as f64 / (pairs * rounds) as f64 };
    let full = out.iter().filter(|r| r.outcomes.iter().all(|&o| o == r.outcomes[0])).count();
    let full_agreement = if rounds == 0 { 1.0 } else { full as f64 / rounds as f64 };

    let (exact, sent, ids) = auth_session(receivers, Mode::Enumerate)?;
    let mut joint = alloc::vec![[[0.0f64; 3]; 3]; receivers];
    let mut exact_agree = 0.0;
    for b in &exact.branches {
        let j = b.outcomes[sent];
        for (i, &id) in ids.iter().enumerate() {
            joint[i][j][b.outcomes[id]] += b.probability;
        }
        for i in 0..receivers {
            for k in i + 1..receivers {
                if b.outcomes[ids[i]] == b.outcomes[ids[k]] {
                    exact_agree += b.probability;
                }
            }
        }
    }
    let conditional: Vec<[[f64; 3]; 3]> = joint
        .iter()
        .map(|m| m.map(|row| {
            let s: f64 = row.iter().sum();
            row.map(|p| if s > 0.0 { p / s } else { 0.0 })
        }))
        .collect();
    let max_hit_probability = conditional
        .iter()
        .flat_map(|m| (0..3).map(move |j| m[j][j]))
        .fold(0.0, f64::max);
    Ok(AuthReport {
        rounds: out,
        violations,
        pairwise_agreement,
        full_agreement,
        max_hit_probability,
        conditional,
        exact_pairwise_agreement: if pairs == 0 { 1.0 } else { exact_agree / pairs as f64 },
        exact,
    })
}

impl AuthReport {
    /// Exact-statistics checks plus a three-sigma band on the sampled
    /// pairwise agreement around the exact value.
    pub fn verdicts(&self) -> Vec<Verdict> {
        let mut v = alloc::vec![
            Verdict::at_most("violations", self.violations as f64, 0.0),
            Verdict::at_most("max hit probability", self.max_hit_probability, ALGEBRAIC_TOL),
        ];
        let dev = self
            .conditional
            .iter()
            .flat_map(|m| (0..3).flat_map(move |j| (0..3).map(move |k| (m[j][k] - if j == k { 0.0 } else { 0.5 }).abs())))
            .fold(0.0, f64::max);
        v.push(Verdict::at_most("conditional distribution deviation", dev, ALGEBRAIC_TOL));
        let n = self.rounds.len();
        let receivers = self.conditional.len();
        if receivers >= 2 && n > 0 {
            let samples = n * receivers * (receivers - 1) / 2;
            let sigma = binomial_sigma(self.exact_pairwise_agreement, samples);
            let dev = (self.pairwise_agreement - self.exact_pairwise_agreement).abs();
            v.push(Verdict::at_most("pairwise agreement deviation", dev, 3.0 * sigma));
        }
        v
    }
}

/// How each receiver reads its trine state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobStrategy {
    /// A random projective basis `{trine_l, anti_l}`.
    Projective,
    /// The anti-trine POVM.
    Povm,
}

/// Label a receiver infers from its reading and Alice's announcement, or
/// `None` when the round is discarded. `basis` is `Some(l)` for a projective
/// reading (outcome 0 = trine, 1 = anti) and `None` for the POVM.
pub fn pbc_sift(basis: Option<usize>, outcome: usize, announced: usize) -> Option<usize> {
    let excluded = match basis {
        Some(l) if outcome == 1 => l,
        Some(_) => return None,
        None => outcome,
    };
    (excluded != announced).then(|| 3 - excluded - announced)
}

/// Bit carried by sent label `j` and announced label `k`: 0 if `k = j+1`,
/// 1 if `k = j+2` (mod 3).
pub fn hop_bit(sent: usize, announced: usize) -> Option<u8> {
    match (announced + 3 - sent) % 3 {
        1 => Some(0),
        2 => Some(1),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QkdRound {
    pub sent: usize,
    pub announced: usize,
    /// Per receiver: basis label for projective readings.
    pub bases: Vec<Option<usize>>,
    pub outcomes: Vec<usize>,
    /// Per receiver: inferred label when the round is kept.
    pub inferred: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QkdReport {
    pub strategy: BobStrategy,
    pub rounds: Vec<QkdRound>,
    /// Alice's key with each receiver.
    pub alice_keys: Vec<Vec<u8>>,
    pub bob_keys: Vec<Vec<u8>>,
    /// Kept bits whose values differ between Alice and the receiver.
    pub disagreements: usize,
    /// Kept fraction per receiver.
    pub sifted_fraction: Vec<f64>,
    /// Exact kept probability per round, from one enumerated round.
    pub exact_sifted_fraction: f64,
    pub exact: ProtocolTranscript,
}

struct QkdIds {
    sent: OutcomeId,
    announced: OutcomeId,
    bases: Vec<Option<OutcomeId>>,
    outcomes: Vec<OutcomeId>,
}

fn qkd_session(receivers: usize, strategy: BobStrategy, mode: Mode) -> Result<(ProtocolTranscript, QkdIds)> {
    let TrineRound { mut session, receivers: names, labels, sent } = trine_round("qkd", receivers, mode)?;
    let s = &mut session;
    let trines = trine_states();
    let mut bases = Vec::with_capacity(receivers);
    let mut outcomes = Vec::with_capacity(receivers);
    for (l, n) in labels.iter().zip(&names) {
        match strategy {
            BobStrategy::Projective => {
                let basis = s.choose(n, "basis", &[], |_| alloc::vec![1.0; 3])?;
                let m = s.measure_with(n, l, "trine basis", &[basis], |v| Ok(trines.basis(SubsystemId(0), v[0])?.into()), false)?;
                // Bob tells Alice only whether his reading was conclusive.
                s.send(n, Recipient::Party(SENDER.into()), &[m])?;
                bases.push(Some(basis));
                outcomes.push(m);
            }
            BobStrategy::Povm => {
                outcomes.push(s.measure(n, l, trines.anti_trine_povm(SubsystemId(0))?, false)?);
                bases.push(None);
            }
        }
    }
    let announced = s.choose(SENDER, "announced label", &[sent], |v| {
        (0..3).map(|k| if k == v[0] { 0.0 } else { 1.0 }).collect()
    })?;
    s.send(SENDER, Recipient::Broadcast, &[announced])?;
    let t = session.finish(|_| Ok((None, Vec::new())))?;
    Ok((t, QkdIds { sent, announced, bases, outcomes }))
}

fn read_round(b: &super::session::BranchRecord, ids: &QkdIds) -> QkdRound {
    let sent = b.outcomes[ids.sent];
    let announced = b.outcomes[ids.announced];
    let bases: Vec<Option<usize>> = ids.bases.iter().map(|o| o.map(|i| b.outcomes[i])).collect();
    let outcomes: Vec<usize> = ids.outcomes.iter().map(|&i| b.outcomes[i]).collect();
    let inferred = bases.iter().zip(&outcomes).map(|(&l, &m)| pbc_sift(l, m, announced)).collect();
    QkdRound { sent, announced, bases, outcomes, inferred }
}

/// `rounds` sampled rounds plus one exhaustively enumerated single-receiver round.
pub fn run_qkd_pbc(rounds: usize, receivers: usize, strategy: BobStrategy, seed: u64) -> Result<QkdReport> {
    if receivers == 0 {
        return Err(Error::InvalidParameter("at least one receiver is required".into()));
    }
    let mut out = Vec::with_capacity(rounds);
    let mut alice_keys = alloc::vec![Vec::new(); receivers];
    let mut bob_keys = alloc::vec![Vec::new(); receivers];
    let mut disagreements = 0;
    for r in 0..rounds {
        let (t, ids) = qkd_session(receivers, strategy, Mode::Sample { seed: round_seed(seed, r) })?;
        let round = read_round(&t.branches[0], &ids);
        for (i, inf) in round.inferred.iter().enumerate() {
            if let Some(j) = *inf {
                let (Some(a), Some(b)) = (hop_bit(round.sent, round.announced), hop_bit(j, round.announced)) else {
                    return Err(Error::InvalidParameter("kept round without a bit".into()));
                };
                disagreements += (a != b) as usize;
                alice_keys[i].push(a);
                bob_keys[i].push(b);
            }
        }
        out.push(round);
    }
    let sifted_fraction = alice_keys.iter().map(|k| if rounds == 0 { 0.0 } else { k.len() as f64 / rounds as f64 }).collect();

    let (exact, ids) = qkd_session(1, strategy, Mode::Enumerate)?;
    let exact_sifted_fraction = exact
        .branches
        .iter()
        .filter(|b| read_round(b, &ids).inferred[0].is_some())
        .map(|b| b.probability)
        .sum();
    Ok(QkdReport {
        strategy,
        rounds: out,
        alice_keys,
        bob_keys,
        disagreements,
        sifted_fraction,
        exact_sifted_fraction,
        exact,
    })
}

impl QkdReport {
    /// Exact key agreement plus a three-sigma band on each sampled kept
    /// fraction around the exact single-round probability.
    pub fn verdicts(&self) -> Vec<Verdict> {
        let mut v = alloc::vec![Verdict::at_most("key disagreements", self.disagreements as f64, 0.0)];
        let n = self.rounds.len();
        if n > 0 {
            let sigma = binomial_sigma(self.exact_sifted_fraction, n);
            for (i, f) in self.sifted_fraction.iter().enumerate() {
                let dev = (f - self.exact_sifted_fraction).abs();
                v.push(Verdict::at_most(format!("receiver {} sifted fraction deviation", i + 1), dev, 3.0 * sigma));
            }
        }
        v
    }
}

/// Binomial standard deviation of a fraction estimated from `n` samples.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_authentication_statistics() {
        let rep = run_authentication(200, 2, 7).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.max_hit_probability < 1e-12);
        for m in &rep.conditional {
            for j in 0..3 {
                for k in 0..3 {
                    let want = if j == k { 0.0 } else { 0.5 };
                    assert!((m[j][k] - want).abs() < 1e-12);
                }
            }
        }
        assert!((rep.exact_pairwise_agreement - 0.5).abs() < 1e-12);
        assert!(rep.exact.passed());
        assert!(rep.verdicts().iter().all(Verdict::passed));
    }

    #[test]
    fn sift_rules() {
        // Projective: trine reading or announced basis label discards the round.
        assert_eq!(pbc_sift(Some(1), 0, 0), None);
        assert_eq!(pbc_sift(Some(1), 1, 1), None);
        assert_eq!(pbc_sift(Some(1), 1, 0), Some(2));
        assert_eq!(pbc_sift(None, 2, 0), Some(1));
        assert_eq!(pbc_sift(None, 2, 2), None);
        assert_eq!(hop_bit(2, 0), Some(0));
        assert_eq!(hop_bit(2, 1), Some(1));
        assert_eq!(hop_bit(1, 1), None);
    }

    #[test]
    fn exact_sifted_fractions() {
        let p = run_qkd_pbc(0, 1, BobStrategy::Projective, 0).unwrap();
        assert!((p.exact_sifted_fraction - 0.25).abs() < 1e-12);
        let q = run_qkd_pbc(0, 1, BobStrategy::Povm, 0).unwrap();
        assert!((q.exact_sifted_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn keys_agree() {
        for s in [BobStrategy::Projective, BobStrategy::Povm] {
            let r = run_qkd_pbc(300, 2, s, 3).unwrap();
            assert_eq!(r.disagreements, 0);
            assert_eq!(r.alice_keys, r.bob_keys);
            assert!(r.verdicts().iter().all(Verdict::passed));
        }
    }
}
