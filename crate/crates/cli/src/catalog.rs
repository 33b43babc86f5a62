//! The static list of runnable scenarios.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub topics: &'static [&'static str],
    /// Config keys the scenario reads.
    pub parameters: &'static [&'static str],
}

const fn entry(
    name: &'static str,
    summary: &'static str,
    topics: &'static [&'static str],
    parameters: &'static [&'static str],
) -> ScenarioInfo {
    ScenarioInfo { name, summary, topics, parameters }
}

pub const CATALOG: &[ScenarioInfo] = &[
    entry("bbp", "one sender broadcasts a phase-rotated qubit to N receivers", &["broadcast"], &["alpha", "beta", "theta", "receivers"]),
    entry("bbp-rotated", "two-receiver broadcast in a rotated basis", &["broadcast", "rotation"], &["alpha", "beta", "theta", "gate", "euler"]),
    entry("multisender", "M senders add their angles into one broadcast", &["broadcast", "multi-sender"], &["alpha", "beta", "thetas", "active", "senders", "receivers"]),
    entry("add-sender", "a new sender joins an existing template", &["broadcast", "multi-sender"], &["alpha", "beta", "senders", "receivers"]),
    entry("delete-sender", "one sender leaves an existing template", &["broadcast", "multi-sender"], &["alpha", "beta", "senders", "receivers", "which"]),
    entry("phase-restricted", "sending an unknown phase 2 pi k / K held in a qudit", &["unknown-phase", "qudit"], &["alpha", "beta", "levels", "k", "receivers", "uses"]),
    entry("phase-general", "sending an unknown general phase held in a qudit", &["unknown-phase", "qudit"], &["alpha", "beta", "theta", "levels", "variant", "uses"]),
    entry("phase-approx", "unmeasured reuse of the encoding qudit", &["unknown-phase", "qudit", "approximate"], &["alpha", "beta", "theta", "levels", "uses"]),
    entry("auth", "trine-state authentication with anti-trine readout", &["keys", "trine", "povm"], &["receivers", "trials", "seed"]),
    entry("qkd", "three-state key distribution from broadcast trines", &["keys", "trine", "qkd"], &["receivers", "strategy", "trials", "seed"]),
    entry("graph-dist-phase", "broadcast followed by a diagonal entangling phase", &["broadcast", "graph", "hypergraph"], &["alpha", "beta", "thetas", "senders", "graph", "entangler", "receivers", "abort"]),
    entry("stab-broadcast", "distribute a stabilizer state via controlled stabilizers", &["stabilizer", "graph"], &["stabilizers", "graph", "abort"]),
    entry("phase-teleport", "imprint Z rotations on a distributed graph state", &["graph", "teleportation"], &["graph", "angles", "correct"]),
    entry("graph-reduce", "distribute an induced subgraph by Z-measuring controls", &["graph", "stabilizer"], &["graph", "keep"]),
    entry("ghz-star", "GHZ state from a star graph including the sender", &["ghz", "graph"], &["receivers"]),
    entry("ghz-ring", "GHZ state among receivers from a ring", &["ghz", "graph"], &["receivers"]),
    entry("mbqc-cnot", "brickwork CNOT block with X-only receiver measurements", &["mbqc", "byproduct"], &["input", "input_flags", "seed"]),
    entry("mbqc-rotation", "brickwork single-qubit rotation block", &["mbqc", "byproduct"], &["input", "input_flags", "top", "bottom", "seed"]),
    entry("mbqc-program", "a sequence of brickwork blocks", &["mbqc", "byproduct"], &["input", "input_flags", "blocks", "seed"]),
];

/// Alternative names accepted on the command line.
const ALIASES: &[(&str, &str)] = &[("unknown-phase-general", "phase-general"), ("unknown-phase-restricted", "phase-restricted")];

pub fn lookup(name: &str) -> Option<&'static ScenarioInfo> {
    let canonical = ALIASES.iter().find(|(a, _)| *a == name).map_or(name, |(_, c)| c);
    CATALOG.iter().find(|s| s.name == canonical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_resolvable() {
        for (i, s) in CATALOG.iter().enumerate() {
            assert!(CATALOG[i + 1..].iter().all(|t| t.name != s.name));
            assert_eq!(lookup(s.name), Some(s));
            assert!(!s.topics.is_empty());
        }
        assert_eq!(lookup("unknown-phase-general").unwrap().name, "phase-general");
        assert!(lookup("teleport-everything").is_none());
    }
}
