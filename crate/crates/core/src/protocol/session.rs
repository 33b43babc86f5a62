//! Branch-parallel execution of multi-party protocols.
//!
//! A [`Session`] keeps every live measurement branch side by side. Local
//! operations act on all branches at once; a measurement either samples one
//! outcome per branch or splits each branch into one child per possible
//! outcome. Ownership of subsystems and knowledge of outcomes are tracked per
//! party, so that locality and causality are enforced while the protocol runs
//! and can be re-checked afterwards from the event log alone.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{sample_index, Gate, Measurement, StateVector, IMPOSSIBLE_PROBABILITY};

/// Index of a recorded measurement or classical choice.
pub type OutcomeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Sample { seed: u64 },
    Enumerate,
    /// Enumerate the listed parties' outcomes and sample everyone else's.
    Mixed { seed: u64, enumerate: Vec<String> },
}

impl Mode {
    fn enumerates(&self, party: &str) -> bool {
        match self {
            Mode::Sample { .. } => false,
            Mode::Enumerate => true,
            Mode::Mixed { enumerate, .. } => enumerate.iter().any(|p| p == party),
        }
    }

    fn seed(&self) -> u64 {
        match self {
            Mode::Sample { seed } | Mode::Mixed { seed, .. } => *seed,
            Mode::Enumerate => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Sender,
    Receiver,
    PhaseProvider,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Party {
    pub name: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipient {
    Party(String),
    Broadcast,
}

impl Recipient {
    fn includes(&self, party: &str) -> bool {
        match self {
            Recipient::Party(p) => p == party,
            Recipient::Broadcast => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Prepare { seq: usize, party: String, labels: Vec<String> },
    Operation { seq: usize, party: String, name: String, targets: Vec<String>, depends_on: Vec<OutcomeId> },
    Measurement {
        seq: usize,
        party: String,
        target: String,
        basis: String,
        outcome: OutcomeId,
        consumed: bool,
        depends_on: Vec<OutcomeId>,
    },
    Choice { seq: usize, party: String, name: String, outcome: OutcomeId, depends_on: Vec<OutcomeId> },
    Message { seq: usize, from: String, to: Recipient, outcomes: Vec<OutcomeId>, abort: bool },
    Transfer { seq: usize, from: String, to: String, label: String },
}

impl Event {
    pub fn seq(&self) -> usize {
        match self {
            Event::Prepare { seq, .. }
            | Event::Operation { seq, .. }
            | Event::Measurement { seq, .. }
            | Event::Choice { seq, .. }
            | Event::Message { seq, .. }
            | Event::Transfer { seq, .. } => *seq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtLeast,
    AtMost,
}

/// A checked quantity with its acceptance bound. Pass/fail is derived, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub comparison: Comparison,
}

impl Verdict {
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, comparison: Comparison::AtLeast }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, comparison: Comparison::AtMost }
    }

    /// A yes/no property, encoded as value 1 or 0 against bound 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn passed(&self) -> bool {
        match self.comparison {
            Comparison::AtLeast => self.value >= self.bound,
            Comparison::AtMost => self.value <= self.bound,
        }
    }
}

/// One live branch of a running session.
#[derive(Debug, Clone)]
pub struct LiveBranch {
    state: StateVector,
    probability: f64,
    outcomes: Vec<usize>,
    conditional: Vec<f64>,
    corrections: Vec<(usize, Option<String>)>,
    rngs: BTreeMap<String, ChaCha8Rng>,
}

impl LiveBranch {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn outcome(&self, id: OutcomeId) -> usize {
        self.outcomes[id]
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    fn values(&self, ids: &[OutcomeId]) -> Vec<usize> {
        ids.iter().map(|&i| self.outcomes[i]).collect()
    }

    fn rng(&mut self, party: &str, seed: u64) -> &mut ChaCha8Rng {
        self.rngs.entry(party.to_string()).or_insert_with(|| party_rng(seed, party))
    }

    fn child(&self, state: StateVector, outcome: usize, p: f64) -> Self {
        let mut c = Self {
            state,
            probability: self.probability * p,
            outcomes: self.outcomes.clone(),
            conditional: self.conditional.clone(),
            corrections: self.corrections.clone(),
            rngs: self.rngs.clone(),
        };
        c.outcomes.push(outcome);
        c.conditional.push(p);
        c
    }
}

/// Independent stream for one party, derived from the master seed.
pub fn party_rng(seed: u64, party: &str) -> ChaCha8Rng {
    // FNV-1a over the party name selects the ChaCha stream.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in party.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub outcomes: Vec<usize>,
    pub conditional_probabilities: Vec<f64>,
    pub probability: f64,
    /// Conditional operations by event sequence number and the gate chosen (if any).
    pub corrections: Vec<(usize, Option<String>)>,
    pub final_state: Option<StateVector>,
    pub verdicts: Vec<Verdict>,
}

impl BranchRecord {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }
}

/// A branch cut off because its outcome had probability at most 1e-14.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedBranch {
    pub outcomes: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub protocol: String,
    pub mode: Mode,
    pub parties: Vec<Party>,
    pub events: Vec<Event>,
    pub branches: Vec<BranchRecord>,
    pub pruned: Vec<PrunedBranch>,
    pub metrics: Vec<(String, f64)>,
    pub verdicts: Vec<Verdict>,
}

impl ProtocolTranscript {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed) && self.branches.iter().all(BranchRecord::passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum::<f64>() + self.pruned.iter().map(|b| b.probability).sum::<f64>()
    }

    /// Replays ownership from the event log and reports the first action on
    /// a subsystem the acting party did not hold.
    pub fn check_locality(&self) -> Result<()> {
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        let deny = |party: &str, sub: &str| Error::Locality { party: party.to_string(), subsystem: sub.to_string() };
        for e in &self.events {
            match e {
                Event::Prepare { party, labels, .. } => {
                    for l in labels {
                        owner.insert(l, party);
                    }
                }
                Event::Operation { party, targets, .. } => {
                    if let Some(t) = targets.iter().find(|t| owner.get(t.as_str()) != Some(&party.as_str())) {
                        return Err(deny(party, t));
                    }
                }
                Event::Measurement { party, target, consumed, .. } => {
                    if owner.get(target.as_str()) != Some(&party.as_str()) {
                        return Err(deny(party, target));
                    }
                    if *consumed {
                        owner.remove(target.as_str());
                    }
                }
                Event::Transfer { from, to, label, .. } => {
                    if owner.get(label.as_str()) != Some(&from.as_str()) {
                        return Err(deny(from, label));
                    }
                    owner.insert(label, to);
                }
                Event::Choice { .. } | Event::Message { .. } => {}
            }
        }
        Ok(())
    }

    /// Checks that every outcome a party conditions on, or forwards, was
    /// produced by that party or delivered to it by an earlier message.
    pub fn check_causality(&self) -> Result<()> {
        let mut known: BTreeMap<&str, BTreeSet<OutcomeId>> = BTreeMap::new();
        let parties: Vec<&str> = self.parties.iter().map(|p| p.name.as_str()).collect();
        let check = |known: &BTreeMap<&str, BTreeSet<OutcomeId>>, party: &str, deps: &[OutcomeId]| {
            let k = known.get(party);
            if deps.iter().all(|d| k.is_some_and(|k| k.contains(d))) {
                Ok(())
            } else {
                Err(Error::Causality { party: party.to_string() })
            }
        };
        for e in &self.events {
            match e {
                Event::Operation { party, depends_on, .. } => check(&known, party, depends_on)?,
                Event::Measurement { party, depends_on, outcome, .. }
                | Event::Choice { party, depends_on, outcome, .. } => {
                    check(&known, party, depends_on)?;
                    known.entry(party).or_default().insert(*outcome);
                }
                Event::Message { from, to, outcomes, .. } => {
                    check(&known, from, outcomes)?;
                    for p in parties.iter().filter(|p| to.includes(p) && **p != from.as_str()) {
                        known.entry(p).or_default().extend(outcomes.iter().copied());
                    }
                }
                Event::Prepare { .. } | Event::Transfer { .. } => {}
            }
        }
        Ok(())
    }

    /// Simple success statistics over the recorded branches.
    pub fn passing_probability(&self) -> f64 {
        self.branches.iter().filter(|b| b.passed()).map(|b| b.probability).sum()
    }
}

/// A protocol in progress.
#[derive(Debug, Clone)]
pub struct Session {
    protocol: String,
    mode: Mode,
    parties: Vec<Party>,
    owner: BTreeMap<String, String>,
    known: BTreeMap<String, BTreeSet<OutcomeId>>,
    next_outcome: OutcomeId,
    events: Vec<Event>,
    branches: Vec<LiveBranch>,
    pruned: Vec<PrunedBranch>,
}

impl Session {
    pub fn new(protocol: impl Into<String>, mode: Mode) -> Self {
        let root = LiveBranch {
            state: StateVector::empty(),
            probability: 1.0,
            outcomes: Vec::new(),
            conditional: Vec::new(),
            corrections: Vec::new(),
            rngs: BTreeMap::new(),
        };
        Self {
            protocol: protocol.into(),
            mode,
            parties: Vec::new(),
            owner: BTreeMap::new(),
            known: BTreeMap::new(),
            next_outcome: 0,
            events: Vec::new(),
            branches: alloc::vec![root],
            pruned: Vec::new(),
        }
    }

    pub fn add_party(&mut self, name: impl Into<String>, role: Role) -> Result<()> {
        let name = name.into();
        if self.parties.iter().any(|p| p.name == name) {
            return Err(Error::InvalidParameter(format!("party `{name}` registered twice")));
        }
        self.known.insert(name.clone(), BTreeSet::new());
        self.parties.push(Party { name, role });
        Ok(())
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn branches(&self) -> &[LiveBranch] {
        &self.branches
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn owner_of(&self, label: &str) -> Option<&str> {
        self.owner.get(label).map(String::as_str)
    }

    fn check_party(&self, party: &str) -> Result<()> {
        if self.parties.iter().any(|p| p.name == party) {
            Ok(())
        } else {
            Err(Error::UnknownParty(party.to_string()))
        }
    }

    fn check_owns(&self, party: &str, labels: &[&str]) -> Result<()> {
        self.check_party(party)?;
        for l in labels {
            if self.owner.get(*l).map(String::as_str) != Some(party) {
                return Err(Error::Locality { party: party.to_string(), subsystem: l.to_string() });
            }
        }
        Ok(())
    }

    fn check_knows(&self, party: &str, deps: &[OutcomeId]) -> Result<()> {
        let k = &self.known[party];
        if deps.iter().all(|d| k.contains(d)) {
            Ok(())
        } else {
            Err(Error::Causality { party: party.to_string() })
        }
    }

    fn seq(&self) -> usize {
        self.events.len()
    }

    /// Appends a freshly prepared local state owned by `party` to every branch.
    pub fn prepare(&mut self, party: &str, state: &StateVector) -> Result<()> {
        self.check_party(party)?;
        let labels: Vec<String> = state.subsystems().iter().map(|s| s.label.clone()).collect();
        for l in &labels {
            if self.owner.contains_key(l) || self.branches[0].state.id(l).is_ok() {
                return Err(Error::DuplicateSubsystem(l.clone()));
            }
        }
        for b in &mut self.branches {
            b.state = b.state.tensor(state)?;
        }
        for l in &labels {
            self.owner.insert(l.clone(), party.to_string());
        }
        self.events.push(Event::Prepare { seq: self.seq(), party: party.to_string(), labels });
        Ok(())
    }

    /// Applies the same gate on every branch.
    pub fn apply(&mut self, party: &str, gate: &Gate, targets: &[&str]) -> Result<()> {
        self.check_owns(party, targets)?;
        let ids = targets.iter().map(|t| self.branches[0].state.id(t)).collect::<Result<Vec<_>>>()?;
        let op = gate.on(&ids)?;
        for b in &mut self.branches {
            b.state.apply_in_place(&op)?;
        }
        self.events.push(Event::Operation {
            seq: self.seq(),
            party: party.to_string(),
            name: gate.name.clone(),
            targets: targets.iter().map(|t| t.to_string()).collect(),
            depends_on: Vec::new(),
        });
        Ok(())
    }

    /// Applies a gate chosen per branch from earlier outcomes the party knows.
    /// `choose` returns `None` to skip the operation on that branch.
    pub fn apply_with<F>(&mut self, party: &str, name: &str, targets: &[&str], deps: &[OutcomeId], choose: F) -> Result<()>
    where
        F: Fn(&[usize]) -> Result<Option<Gate>>,
    {
        self.check_owns(party, targets)?;
        self.check_knows(party, deps)?;
        let ids = targets.iter().map(|t| self.branches[0].state.id(t)).collect::<Result<Vec<_>>>()?;
        let seq = self.seq();
        let mut cache: BTreeMap<Vec<usize>, Option<crate::tensor::LocalOperator>> = BTreeMap::new();
        for b in &mut self.branches {
            let vals = b.values(deps);
            if !cache.contains_key(&vals) {
                let op = choose(&vals)?.map(|g| g.on(&ids)).transpose()?;
                cache.insert(vals.clone(), op);
            }
            let op = &cache[&vals];
            if let Some(op) = op {
                b.state.apply_in_place(op)?;
            }
            b.corrections.push((seq, op.as_ref().map(|o| o.name().to_string())));
        }
        self.events.push(Event::Operation {
            seq,
            party: party.to_string(),
            name: name.to_string(),
            targets: targets.iter().map(|t| t.to_string()).collect(),
            depends_on: deps.to_vec(),
        });
        Ok(())
    }

    /// Measures `label` with a fixed measurement.
    pub fn measure(&mut self, party: &str, label: &str, m: impl Into<Measurement>, consume: bool) -> Result<OutcomeId> {
        let m = m.into();
        let name = m.name().to_string();
        self.measure_with(party, label, &name, &[], move |_| Ok(m.clone()), consume)
    }

    /// Measures `label` with a measurement chosen per branch from earlier outcomes.
    /// Consuming removes the subsystem (projective measurements only).
    pub fn measure_with<F>(
        &mut self,
        party: &str,
        label: &str,
        basis_name: &str,
        deps: &[OutcomeId],
        choose: F,
        consume: bool,
    ) -> Result<OutcomeId>
    where
        F: Fn(&[usize]) -> Result<Measurement>,
    {
        self.check_owns(party, &[label])?;
        self.check_knows(party, deps)?;
        let target = self.branches[0].state.id(label)?;
        let enumerate = self.mode.enumerates(party);
        let seed = self.mode.seed();
        let mut next = Vec::with_capacity(self.branches.len());
        let mut cache: BTreeMap<Vec<usize>, Measurement> = BTreeMap::new();
        for mut b in core::mem::take(&mut self.branches) {
            let vals = b.values(deps);
            if !cache.contains_key(&vals) {
                cache.insert(vals.clone(), choose(&vals)?.retarget(target));
            }
            let m = &cache[&vals];
            if consume && matches!(m, Measurement::Povm(_)) {
                return Err(Error::InvalidParameter("a POVM outcome cannot consume its subsystem".into()));
            }
            let outcomes: Vec<usize> = if enumerate {
                (0..m.num_outcomes()).collect()
            } else {
                let probs = b.state.outcome_probabilities(m)?;
                alloc::vec![sample_index(&probs, b.rng(party, seed))?]
            };
            let mut any = false;
            for k in outcomes {
                let (p, state) = outcome_state(&b.state, m, k, consume)?;
                match state {
                    Some(s) => {
                        any = true;
                        next.push(b.child(s, k, p));
                    }
                    None => {
                        let mut o = b.outcomes.clone();
                        o.push(k);
                        self.pruned.push(PrunedBranch { outcomes: o, probability: b.probability * p });
                    }
                }
            }
            if !any && !enumerate {
                return Err(Error::ZeroProbability);
            }
        }
        if next.is_empty() {
            return Err(Error::ZeroProbability);
        }
        self.branches = next;
        let id = self.new_outcome(party);
        if consume {
            self.owner.remove(label);
        }
        self.events.push(Event::Measurement {
            seq: self.seq(),
            party: party.to_string(),
            target: label.to_string(),
            basis: basis_name.to_string(),
            outcome: id,
            consumed: consume,
            depends_on: deps.to_vec(),
        });
        Ok(id)
    }

    /// A local classical random choice with per-branch weights over `0..n`.
    pub fn choose<F>(&mut self, party: &str, name: &str, deps: &[OutcomeId], weights: F) -> Result<OutcomeId>
    where
        F: Fn(&[usize]) -> Vec<f64>,
    {
        self.check_party(party)?;
        self.check_knows(party, deps)?;
        let enumerate = self.mode.enumerates(party);
        let seed = self.mode.seed();
        let mut next = Vec::with_capacity(self.branches.len());
        for mut b in core::mem::take(&mut self.branches) {
            let w = weights(&b.values(deps));
            let total: f64 = w.iter().sum();
            if total.is_nan() || total <= 0.0 {
                return Err(Error::ZeroProbability);
            }
            if enumerate {
                for (k, &wk) in w.iter().enumerate() {
                    let p = wk / total;
                    if p > IMPOSSIBLE_PROBABILITY {
                        let s = b.state.clone();
                        next.push(b.child(s, k, p));
                    } else if wk > 0.0 {
                        let mut o = b.outcomes.clone();
                        o.push(k);
                        self.pruned.push(PrunedBranch { outcomes: o, probability: b.probability * p });
                    }
                }
            } else {
                let k = sample_index(&w, b.rng(party, seed))?;
                let s = core::mem::replace(&mut b.state, StateVector::empty());
                next.push(b.child(s, k, w[k] / total));
            }
        }
        self.branches = next;
        let id = self.new_outcome(party);
        self.events.push(Event::Choice {
            seq: self.seq(),
            party: party.to_string(),
            name: name.to_string(),
            outcome: id,
            depends_on: deps.to_vec(),
        });
        Ok(id)
    }

    fn new_outcome(&mut self, party: &str) -> OutcomeId {
        let id = self.next_outcome;
        self.next_outcome += 1;
        self.known.get_mut(party).expect("party registered").insert(id);
        id
    }

    /// Sends recorded outcomes to one party or to everyone.
    pub fn send(&mut self, from: &str, to: Recipient, outcomes: &[OutcomeId]) -> Result<()> {
        self.message(from, to, outcomes, false)
    }

    /// Announces that the protocol is aborted.
    pub fn send_abort(&mut self, from: &str, to: Recipient) -> Result<()> {
        self.message(from, to, &[], true)
    }

    fn message(&mut self, from: &str, to: Recipient, outcomes: &[OutcomeId], abort: bool) -> Result<()> {
        self.check_party(from)?;
        if let Recipient::Party(p) = &to {
            self.check_party(p)?;
        }
        self.check_knows(from, outcomes)?;
        for p in &self.parties {
            if to.includes(&p.name) && p.name != from {
                self.known.get_mut(&p.name).expect("party registered").extend(outcomes.iter().copied());
            }
        }
        self.events.push(Event::Message { seq: self.seq(), from: from.to_string(), to, outcomes: outcomes.to_vec(), abort });
        Ok(())
    }

    /// Hands a subsystem to another party.
    pub fn transfer(&mut self, from: &str, to: &str, label: &str) -> Result<()> {
        self.check_owns(from, &[label])?;
        self.check_party(to)?;
        self.owner.insert(label.to_string(), to.to_string());
        self.events.push(Event::Transfer { seq: self.seq(), from: from.to_string(), to: to.to_string(), label: label.to_string() });
        Ok(())
    }

    /// Closes the session; `judge` maps each live branch to its recorded final
    /// state and verdicts.
    pub fn finish<F>(self, mut judge: F) -> Result<ProtocolTranscript>
    where
        F: FnMut(&LiveBranch) -> Result<(Option<StateVector>, Vec<Verdict>)>,
    {
        let mut branches = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let (final_state, verdicts) = judge(b)?;
            branches.push(BranchRecord {
                outcomes: b.outcomes.clone(),
                conditional_probabilities: b.conditional.clone(),
                probability: b.probability,
                corrections: b.corrections.clone(),
                final_state,
                verdicts,
            });
        }
        let mut t = ProtocolTranscript {
            protocol: self.protocol,
            mode: self.mode,
            parties: self.parties,
            events: self.events,
            branches,
            pruned: self.pruned,
            metrics: Vec::new(),
            verdicts: Vec::new(),
        };
        if t.mode == Mode::Enumerate {
            let total = t.total_probability();
            t.verdicts.push(Verdict::at_most("probability conservation", (total - 1.0).abs(), crate::tensor::CHAINED_TOL));
        }
        t.verdicts.push(Verdict::holds("locality", t.check_locality().is_ok()));
        t.verdicts.push(Verdict::holds("causality", t.check_causality().is_ok()));
        Ok(t)
    }
}

fn outcome_state(state: &StateVector, m: &Measurement, k: usize, consume: bool) -> Result<(f64, Option<StateVector>)> {
    match (m, consume) {
        (Measurement::Basis(b), true) => state.project_out(b.target(), &b.vectors()[k]),
        _ => {
            let br = state.collapse(m, k)?;
            Ok((br.probability, br.state))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::gates::{hadamard, pauli_x, z_basis};
    use crate::tensor::{Subsystem, SubsystemId};

    fn plus(label: &str) -> StateVector {
        StateVector::product(alloc::vec![(Subsystem::qubit(label), alloc::vec![crate::linalg::r(1.0), crate::linalg::r(1.0)])]).unwrap()
    }

    fn zero(label: &str) -> StateVector {
        StateVector::basis(alloc::vec![Subsystem::qubit(label)], &[0]).unwrap()
    }

    /// Alice measures a |+> qubit and tells Bob, who flips his |0> on outcome 1.
    fn copy_bit(mode: Mode) -> Result<ProtocolTranscript> {
        let mut s = Session::new("copy", mode);
        s.add_party("Alice", Role::Sender)?;
        s.add_party("Bob", Role::Receiver)?;
        s.prepare("Alice", &plus("a"))?;
        s.prepare("Bob", &zero("b"))?;
        let m = s.measure("Alice", "a", z_basis(SubsystemId(0), 2), true)?;
        s.send("Alice", Recipient::Party("Bob".into()), &[m])?;
        s.apply_with("Bob", "copy", &["b"], &[m], |v| Ok((v[0] == 1).then(pauli_x)))?;
        s.finish(|b| {
            let want = if b.outcome(m) == 1 { 1.0 } else { 0.0 };
            let st = b.state();
            let got = st.amplitude(&[1]).norm_sqr();
            Ok((Some(st.clone()), alloc::vec![Verdict::at_most("copy error", (got - want).abs(), 1e-12)]))
        })
    }

    #[test]
    fn enumeration_conserves_probability() {
        let t = copy_bit(Mode::Enumerate).unwrap();
        assert_eq!(t.branches.len(), 2);
        assert!((t.total_probability() - 1.0).abs() < 1e-12);
        assert!(t.passed());
        assert_eq!(t.branches[1].corrections, alloc::vec![(4, Some(String::from("X")))]);
        assert_eq!(t.branches[0].corrections, alloc::vec![(4, None)]);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let outcomes = |seed| copy_bit(Mode::Sample { seed }).unwrap().branches[0].outcomes.clone();
        for seed in 0..8 {
            assert_eq!(outcomes(seed), outcomes(seed));
        }
        let seen: BTreeSet<Vec<usize>> = (0..32).map(outcomes).collect();
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn mixed_mode_splits_only_listed_parties() {
        let mut s = Session::new("mixed", Mode::Mixed { seed: 3, enumerate: alloc::vec!["Bob".into()] });
        s.add_party("Alice", Role::Sender).unwrap();
        s.add_party("Bob", Role::Receiver).unwrap();
        s.prepare("Alice", &plus("a")).unwrap();
        s.prepare("Bob", &plus("b")).unwrap();
        s.measure("Alice", "a", z_basis(SubsystemId(0), 2), true).unwrap();
        s.measure("Bob", "b", z_basis(SubsystemId(0), 2), true).unwrap();
        let t = s.finish(|_| Ok((None, Vec::new()))).unwrap();
        assert_eq!(t.branches.len(), 2);
        assert_eq!(t.branches[0].outcomes[0], t.branches[1].outcomes[0]);
        assert!((t.total_probability() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn foreign_subsystems_are_rejected() {
        let mut s = Session::new("bad", Mode::Enumerate);
        s.add_party("Alice", Role::Sender).unwrap();
        s.add_party("Bob", Role::Receiver).unwrap();
        s.prepare("Alice", &zero("a")).unwrap();
        assert!(matches!(s.apply("Bob", &hadamard(), &["a"]), Err(Error::Locality { .. })));
        assert!(matches!(s.prepare("Bob", &zero("a")), Err(Error::DuplicateSubsystem(_))));
        assert!(matches!(s.apply("Carol", &hadamard(), &["a"]), Err(_)));
        s.transfer("Alice", "Bob", "a").unwrap();
        s.apply("Bob", &hadamard(), &["a"]).unwrap();
        let m = s.measure("Bob", "a", z_basis(SubsystemId(0), 2), true).unwrap();
        // Consumed subsystems belong to nobody.
        assert!(s.apply("Bob", &hadamard(), &["a"]).is_err());
        let t = s.finish(|_| Ok((None, Vec::new()))).unwrap();
        assert!(t.check_locality().is_ok());
        assert_eq!(m, 0);
    }

    #[test]
    fn unsent_outcomes_cannot_be_used() {
        let mut s = Session::new("bad", Mode::Enumerate);
        s.add_party("Alice", Role::Sender).unwrap();
        s.add_party("Bob", Role::Receiver).unwrap();
        s.prepare("Alice", &plus("a")).unwrap();
        s.prepare("Bob", &zero("b")).unwrap();
        let m = s.measure("Alice", "a", z_basis(SubsystemId(0), 2), true).unwrap();
        let r = s.apply_with("Bob", "copy", &["b"], &[m], |_| Ok(None));
        assert!(matches!(r, Err(Error::Causality { .. })));
        assert!(s.send("Bob", Recipient::Broadcast, &[m]).is_err());
        s.send("Alice", Recipient::Broadcast, &[m]).unwrap();
        s.apply_with("Bob", "copy", &["b"], &[m], |_| Ok(None)).unwrap();
    }

    #[test]
    fn replay_flags_tampered_logs() {
        let mut t = copy_bit(Mode::Enumerate).unwrap();
        assert!(t.check_locality().is_ok() && t.check_causality().is_ok());
        // Drop Alice's message: Bob's correction is no longer justified.
        t.events.retain(|e| !matches!(e, Event::Message { .. }));
        assert!(matches!(t.check_causality(), Err(Error::Causality { .. })));
        let mut t = copy_bit(Mode::Enumerate).unwrap();
        if let Event::Operation { party, .. } = &mut t.events[4] {
            *party = "Alice".into();
        }
        assert!(matches!(t.check_locality(), Err(Error::Locality { .. })));
    }

    #[test]
    fn povm_outcomes_cannot_consume() {
        let mut s = Session::new("povm", Mode::Enumerate);
        s.add_party("Bob", Role::Receiver).unwrap();
        s.prepare("Bob", &zero("b")).unwrap();
        let povm = crate::library::trine_states().anti_trine_povm(SubsystemId(0)).unwrap();
        assert!(matches!(s.measure("Bob", "b", povm, true), Err(Error::InvalidParameter(_))));
    }
}
