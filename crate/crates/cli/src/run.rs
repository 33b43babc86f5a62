//! Scenario dispatch: fill defaults, validate, run, collect a report.

use core::f64::consts::FRAC_1_SQRT_2;

use serde_json::{json, Value};

use qbcast_core::library::gates::{euler_rotation, hadamard, identity};
use qbcast_core::library::{BroadcastSpec, DiagonalPhaseGate, Graph, StabilizerSet};
use qbcast_core::linalg::C64;
use qbcast_core::mbqc::{self, BlockSpec, LogicalResult};
use qbcast_core::protocol::{self, BobStrategy, GeneralVariant, Mode, ProtocolTranscript, Verdict};
use qbcast_core::tensor::{StateVector, Subsystem, CHAINED_TOL};

use crate::catalog::{lookup, ScenarioInfo};
use crate::config::{BlockInput, ComplexInput, GraphInput, ModeName, ScenarioConfig};
use crate::report::{self, num, Record, Report};
use crate::CliError;

/// Keys every scenario accepts.
const COMMON_KEYS: &[&str] = &["scenario", "mode", "seed", "trials"];

const DEFAULT_ROUNDS: usize = 1000;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Rejects keys the scenario would silently ignore.
fn check_keys(info: &ScenarioInfo, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let Value::Object(map) = serde_json::to_value(cfg).expect("config is serializable") else {
        unreachable!("config serializes to an object")
    };
    for k in map.keys() {
        if !COMMON_KEYS.contains(&k.as_str()) && !info.parameters.contains(&k.as_str()) {
            return Err(invalid(format!("scenario `{}` does not take `{k}`", info.name)));
        }
    }
    Ok(())
}

fn graph_of(g: &GraphInput) -> Result<Graph, CliError> {
    Ok(Graph::numbered(g.vertices, g.edges.iter().map(|e| (e[0], e[1])))?)
}

fn graph_input(g: &Graph) -> GraphInput {
    GraphInput { vertices: g.num_vertices(), edges: g.edges().map(|(u, v)| [u, v]).collect() }
}

/// The six-vertex reduction example: a triangle and a square sharing vertex 3.
fn reduction_example() -> GraphInput {
    GraphInput { vertices: 6, edges: vec![[1, 2], [1, 3], [2, 3], [3, 4], [3, 5], [3, 6], [4, 6], [5, 6]] }
}

fn amplitude(x: Option<ComplexInput>, default: f64) -> ComplexInput {
    x.unwrap_or(ComplexInput::Real(default))
}

fn default_input() -> Vec<ComplexInput> {
    vec![
        ComplexInput::Pair([0.5, 0.5]),
        ComplexInput::Pair([-0.4, 0.2]),
        ComplexInput::Pair([0.2, -0.3]),
        ComplexInput::Pair([0.1, 0.4]),
    ]
}

fn two_qubit_input(amps: &[ComplexInput]) -> Result<StateVector, CliError> {
    if amps.len() != 4 {
        return Err(invalid(format!("input needs 4 amplitudes, got {}", amps.len())));
    }
    let v: Vec<C64> = amps.iter().map(|a| a.value()).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > CHAINED_TOL {
        return Err(invalid(format!("input amplitudes have squared norm {norm}, expected 1")));
    }
    Ok(StateVector::new(vec![Subsystem::qubit("in_top"), Subsystem::qubit("in_bottom")], v)?)
}

fn block_of(b: &BlockInput) -> Result<BlockSpec, CliError> {
    match b.kind.as_str() {
        "cnot" if b.top.is_none() && b.bottom.is_none() => Ok(BlockSpec::Cnot),
        "cnot" => Err(invalid("a cnot block takes no angles")),
        "rotation" => Ok(BlockSpec::Rotation { top: b.top.unwrap_or([0.0; 3]), bottom: b.bottom.unwrap_or([0.0; 3]) }),
        other => Err(invalid(format!("unknown block kind `{other}`, expected cnot or rotation"))),
    }
}

fn variant_of(name: &str) -> Result<GeneralVariant, CliError> {
    match name {
        "destructive" => Ok(GeneralVariant::Destructive),
        "projector" => Ok(GeneralVariant::Projector),
        "approximate" => Ok(GeneralVariant::Approximate),
        other => Err(invalid(format!("unknown variant `{other}`, expected destructive, projector or approximate"))),
    }
}

/// What one protocol run hands back, before it becomes records.
struct Run {
    transcript: ProtocolTranscript,
    /// Extra fields per branch, aligned with `transcript.branches`.
    extra: Vec<Vec<(String, Value)>>,
}

impl From<ProtocolTranscript> for Run {
    fn from(transcript: ProtocolTranscript) -> Self {
        Self { transcript, extra: Vec::new() }
    }
}

impl From<LogicalResult> for Run {
    fn from(r: LogicalResult) -> Self {
        let extra = r.byproducts.iter().map(|b| vec![("byproducts".to_string(), json!(b))]).collect();
        Self { transcript: r.transcript, extra }
    }
}

fn branch_record(kind: &'static str, index: usize, run: &Run, b: usize, verbose: bool) -> Record {
    let br = &run.transcript.branches[b];
    let corrections: Vec<Value> = br.corrections.iter().map(|(seq, g)| json!({"seq": seq, "gate": g})).collect();
    let mut r = Record::new(kind, index)
        .field("outcomes", json!(br.outcomes))
        .field("probability", num(br.probability))
        .field("corrections", Value::Array(corrections));
    for (k, v) in run.extra.get(b).into_iter().flatten() {
        r = r.field(k, v.clone());
    }
    if verbose {
        if let Some(s) = &br.final_state {
            r = r.field("final_state", report::state(s));
        }
    }
    r.verdicts = br.verdicts.clone();
    r
}

/// Runs a single-transcript protocol either once, enumerated, or `trials`
/// times with derived seeds.
fn run_transcripts(
    report: &mut Report,
    mode: ModeName,
    enumerate: Mode,
    seed: u64,
    trials: usize,
    verbose: bool,
    f: &dyn Fn(Mode) -> Result<Run, CliError>,
) -> Result<(), CliError> {
    match mode {
        ModeName::Enumerate => {
            let run = f(enumerate)?;
            let t = &run.transcript;
            for b in 0..t.branches.len() {
                report.records.push(branch_record("branch", b, &run, b, verbose));
            }
            let total = t.total_probability();
            report.statistics.push(("branches".into(), t.branches.len() as f64));
            report.statistics.push(("pruned branches".into(), t.pruned.len() as f64));
            report.statistics.push(("total probability".into(), total));
            report.statistics.push(("passing probability".into(), t.passing_probability()));
            report.statistics.extend(t.metrics.iter().cloned());
            report.verdicts.extend(t.verdicts.iter().cloned());
            if verbose {
                report.events = t.events.clone();
            }
        }
        ModeName::Sample => {
            if trials == 0 {
                return Err(invalid("trials must be at least 1"));
            }
            let mut passed = 0usize;
            for i in 0..trials {
                let trial_seed = protocol::round_seed(seed, i);
                let run = f(Mode::Sample { seed: trial_seed })?;
                let t = &run.transcript;
                let mut r = branch_record("trial", i, &run, 0, verbose).field("seed", json!(trial_seed));
                for (k, v) in &t.metrics {
                    r = r.field(&report::key(k), num(*v));
                }
                r.verdicts.extend(t.verdicts.iter().cloned());
                passed += usize::from(r.passed());
                report.records.push(r);
                if verbose && i == 0 {
                    report.events = t.events.clone();
                }
            }
            let failed = trials - passed;
            report.statistics.push(("trials".into(), trials as f64));
            report.statistics.push(("passing fraction".into(), passed as f64 / trials as f64));
            report.verdicts.push(Verdict::at_most("failed trials", failed as f64, 0.0));
        }
    }
    Ok(())
}

/// Runs a scenario. The config must name it; CLI flags are merged in by the caller.
pub fn run_scenario(config: &ScenarioConfig, verbose: bool) -> Result<Report, CliError> {
    let name = config.scenario.as_deref().ok_or_else(|| invalid("no scenario given"))?;
    let info = lookup(name).ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    check_keys(info, config)?;

    let mut cfg = config.clone();
    cfg.scenario = Some(info.name.to_string());
    let keyed = matches!(info.name, "auth" | "qkd");
    let mode = *cfg.mode.get_or_insert(if keyed { ModeName::Sample } else { ModeName::Enumerate });
    let seed = *cfg.seed.get_or_insert(0);
    let trials = *cfg.trials.get_or_insert(if keyed { DEFAULT_ROUNDS } else { 1 });

    match info.name {
        "auth" => return authentication(cfg, trials, seed),
        "qkd" => return qkd(cfg, trials, seed),
        _ => {}
    }

    let (resolved, f) = prepare(info.name, cfg)?;
    let mut report = Report::new(info.name, resolved);
    let enumerate = if info.name.starts_with("mbqc") { mbqc::receiver_enumeration(seed) } else { Mode::Enumerate };
    run_transcripts(&mut report, mode, enumerate, seed, trials, verbose, &*f)?;
    Ok(report)
}

type Runner = Box<dyn Fn(Mode) -> Result<Run, CliError>>;

fn runner<R: Into<Run>>(f: impl Fn(Mode) -> qbcast_core::Result<R> + 'static) -> Runner {
    Box::new(move |m| Ok(f(m)?.into()))
}

/// Fills per-scenario defaults into the config and builds the protocol call.
fn prepare(name: &str, mut cfg: ScenarioConfig) -> Result<(ScenarioConfig, Runner), CliError> {
    let h = FRAC_1_SQRT_2;
    let f: Runner = match name {
        "bbp" => {
            let (a, b) = (amplitude(cfg.alpha, h), amplitude(cfg.beta, h));
            let theta = *cfg.theta.get_or_insert(0.0);
            let n = *cfg.receivers.get_or_insert(2);
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            runner(move |m| protocol::run_bbp(a.value(), b.value(), theta, n, m))
        }
        "bbp-rotated" => {
            let (a, b) = (amplitude(cfg.alpha, 1.0), amplitude(cfg.beta, 0.0));
            let theta = *cfg.theta.get_or_insert(0.0);
            let gate = match cfg.gate.get_or_insert_with(|| "hadamard".into()).as_str() {
                "identity" if cfg.euler.is_none() => identity(2),
                "hadamard" if cfg.euler.is_none() => hadamard(),
                "euler" => {
                    let [x, y, z] = cfg.euler.ok_or_else(|| invalid("gate `euler` needs `euler` angles"))?;
                    euler_rotation(x, y, z)
                }
                "identity" | "hadamard" => return Err(invalid("`euler` angles only apply to gate `euler`")),
                other => return Err(invalid(format!("unknown gate `{other}`, expected identity, hadamard or euler"))),
            };
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            runner(move |m| protocol::run_bbp_rotated(&gate, [a.value(), b.value()], theta, m))
        }
        "multisender" => {
            let (a, b) = (amplitude(cfg.alpha, h), amplitude(cfg.beta, h));
            let m_senders = cfg.thetas.as_ref().map_or(2, Vec::len);
            let senders = *cfg.senders.get_or_insert(m_senders);
            let thetas = cfg.thetas.get_or_insert_with(|| vec![0.0; senders]).clone();
            let active = cfg.active.get_or_insert_with(|| vec![true; senders]).clone();
            if thetas.len() != senders || active.len() != senders {
                return Err(invalid(format!("thetas and active need one entry per sender ({senders})")));
            }
            let spec = BroadcastSpec::new(senders, *cfg.receivers.get_or_insert(2), a.value(), b.value())?;
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            runner(move |m| protocol::run_multisender(&spec, &thetas, &active, m))
        }
        "add-sender" | "delete-sender" => {
            let (a, b) = (amplitude(cfg.alpha, h), amplitude(cfg.beta, h));
            let adding = name == "add-sender";
            let senders = *cfg.senders.get_or_insert(if adding { 1 } else { 2 });
            let spec = BroadcastSpec::new(senders, *cfg.receivers.get_or_insert(2), a.value(), b.value())?;
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            if adding {
                runner(move |m| protocol::add_sender(&spec, m))
            } else {
                let which = *cfg.which.get_or_insert(1);
                runner(move |m| protocol::delete_sender(&spec, which, m))
            }
        }
        "phase-restricted" => {
            let (a, b) = (amplitude(cfg.alpha, h), amplitude(cfg.beta, h));
            let levels = *cfg.levels.get_or_insert(4);
            let k = *cfg.k.get_or_insert(1);
            let n = *cfg.receivers.get_or_insert(2);
            let uses = *cfg.uses.get_or_insert(1);
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            runner(move |m| protocol::send_phase_restricted(a.value(), b.value(), k, levels, n, uses, m))
        }
        "phase-general" | "phase-approx" => {
            let (a, b) = (amplitude(cfg.alpha, h), amplitude(cfg.beta, h));
            let theta = *cfg.theta.get_or_insert(if name == "phase-approx" { 0.3 } else { 0.0 });
            let levels = *cfg.levels.get_or_insert(8);
            let variant = if name == "phase-approx" {
                GeneralVariant::Approximate
            } else {
                variant_of(cfg.variant.get_or_insert_with(|| "destructive".into()))?
            };
            let uses = *cfg.uses.get_or_insert(1);
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            runner(move |m| protocol::send_phase_general(a.value(), b.value(), theta, levels, variant, uses, m))
        }
        "graph-dist-phase" => {
            let (a, b) = (amplitude(cfg.alpha, h), amplitude(cfg.beta, h));
            let senders = *cfg.senders.get_or_insert(cfg.thetas.as_ref().map_or(1, Vec::len));
            let thetas = cfg.thetas.get_or_insert_with(|| vec![0.0; senders]).clone();
            if thetas.len() != senders {
                return Err(invalid(format!("thetas need one entry per sender ({senders})")));
            }
            let entangler = match cfg.entangler.get_or_insert_with(|| "cz".into()).as_str() {
                "cz" => {
                    let g = graph_of(cfg.graph.get_or_insert_with(|| graph_input(&Graph::path(3))))?;
                    if cfg.receivers.is_some_and(|n| n != g.num_vertices()) {
                        return Err(invalid("receivers must equal the number of graph vertices"));
                    }
                    cfg.receivers = Some(g.num_vertices());
                    protocol::cz_entangler(&g)?
                }
                "ccz" if cfg.graph.is_none() => DiagonalPhaseGate::multi_cz(*cfg.receivers.get_or_insert(3))?,
                "ccz" => return Err(invalid("the ccz entangler acts on all receivers and takes no graph")),
                other => return Err(invalid(format!("unknown entangler `{other}`, expected cz or ccz"))),
            };
            let receivers = cfg.receivers.unwrap_or_default();
            let spec = BroadcastSpec::new(senders, receivers, a.value(), b.value())?.with_entangler(entangler)?;
            let abort = *cfg.abort.get_or_insert(false);
            (cfg.alpha, cfg.beta) = (Some(a), Some(b));
            runner(move |m| protocol::run_graph_dist_phase(&spec, &thetas, abort, m))
        }
        "stab-broadcast" => {
            let set = match (&cfg.stabilizers, &cfg.graph) {
                (Some(_), Some(_)) => return Err(invalid("give either stabilizers or graph, not both")),
                (Some(s), None) => StabilizerSet::parse(&s.iter().map(String::as_str).collect::<Vec<_>>())?,
                (None, g) => {
                    let g = graph_of(&g.clone().unwrap_or_else(|| graph_input(&Graph::path(3))))?;
                    let set = StabilizerSet::new(g.stabilizers())?;
                    cfg.stabilizers = Some(set.generators().iter().map(|p| p.to_string()).collect());
                    set
                }
            };
            cfg.graph = None;
            let abort = *cfg.abort.get_or_insert(false);
            runner(move |m| protocol::run_stabilizer_broadcast(&set, abort, m))
        }
        "phase-teleport" => {
            let g = graph_of(cfg.graph.get_or_insert_with(|| graph_input(&Graph::path(3))))?;
            let angles = cfg.angles.get_or_insert_with(|| vec![(1, core::f64::consts::FRAC_PI_8)]).clone();
            let correct = *cfg.correct.get_or_insert(true);
            runner(move |m| protocol::teleport_phase_gate(&g, &angles, correct, m))
        }
        "graph-reduce" => {
            let g = graph_of(cfg.graph.get_or_insert_with(reduction_example))?;
            let keep = cfg.keep.get_or_insert_with(|| (1..g.num_vertices()).collect()).clone();
            runner(move |m| protocol::run_graph_reduction(&g, &keep, m))
        }
        "ghz-star" => {
            let n = *cfg.receivers.get_or_insert(3);
            runner(move |m| protocol::run_ghz_star(n, m))
        }
        "ghz-ring" => {
            let n = *cfg.receivers.get_or_insert(3);
            runner(move |m| protocol::run_ghz_ring(n, m))
        }
        "mbqc-cnot" | "mbqc-rotation" | "mbqc-program" => {
            let psi = two_qubit_input(cfg.input.get_or_insert_with(default_input))?;
            let flags = *cfg.input_flags.get_or_insert([false; 4]);
            let blocks = match name {
                "mbqc-cnot" => vec![BlockSpec::Cnot],
                "mbqc-rotation" => {
                    let top = *cfg.top.get_or_insert([0.3, -0.7, 1.1]);
                    let bottom = *cfg.bottom.get_or_insert([-0.4, 0.9, 0.2]);
                    vec![BlockSpec::Rotation { top, bottom }]
                }
                _ => {
                    let inputs = cfg.blocks.get_or_insert_with(|| {
                        vec![
                            BlockInput { kind: "cnot".into(), top: None, bottom: None },
                            BlockInput { kind: "rotation".into(), top: Some([0.3, -0.7, 1.1]), bottom: Some([-0.4, 0.9, 0.2]) },
                        ]
                    });
                    inputs.iter().map(block_of).collect::<Result<Vec<_>, _>>()?
                }
            };
            runner(move |m| mbqc::run_program(&blocks, &psi, flags, m))
        }
        other => unreachable!("catalog entry `{other}` has no dispatcher"),
    };
    Ok((cfg, f))
}

fn authentication(mut cfg: ScenarioConfig, rounds: usize, seed: u64) -> Result<Report, CliError> {
    let receivers = *cfg.receivers.get_or_insert(2);
    let rep = protocol::run_authentication(rounds, receivers, seed)?;
    let mut report = Report::new("auth", cfg);
    for (i, r) in rep.rounds.iter().enumerate() {
        let rec = Record::new("round", i).field("sent", json!(r.sent)).field("outcomes", json!(r.outcomes));
        report.records.push(rec);
    }
    report.statistics = vec![
        ("rounds".into(), rounds as f64),
        ("violations".into(), rep.violations as f64),
        ("pairwise agreement".into(), rep.pairwise_agreement),
        ("exact pairwise agreement".into(), rep.exact_pairwise_agreement),
        ("full agreement".into(), rep.full_agreement),
        ("max hit probability".into(), rep.max_hit_probability),
    ];
    let conditional: Vec<Value> =
        rep.conditional.iter().map(|m| json!(m.iter().map(|row| row.map(num)).collect::<Vec<_>>())).collect();
    report.extras.push(("conditional".into(), Value::Array(conditional)));
    report.verdicts = rep.verdicts();
    Ok(report)
}

fn qkd(mut cfg: ScenarioConfig, rounds: usize, seed: u64) -> Result<Report, CliError> {
    let receivers = *cfg.receivers.get_or_insert(1);
    let strategy = match cfg.strategy.get_or_insert_with(|| "povm".into()).as_str() {
        "projective" => BobStrategy::Projective,
        "povm" => BobStrategy::Povm,
        other => return Err(invalid(format!("unknown strategy `{other}`, expected projective or povm"))),
    };
    let rep = protocol::run_qkd_pbc(rounds, receivers, strategy, seed)?;
    let mut report = Report::new("qkd", cfg);
    for (i, r) in rep.rounds.iter().enumerate() {
        let rec = Record::new("round", i)
            .field("sent", json!(r.sent))
            .field("announced", json!(r.announced))
            .field("bases", json!(r.bases))
            .field("outcomes", json!(r.outcomes))
            .field("inferred", json!(r.inferred));
        report.records.push(rec);
    }
    report.statistics = vec![
        ("rounds".into(), rounds as f64),
        ("disagreements".into(), rep.disagreements as f64),
        ("exact sifted fraction".into(), rep.exact_sifted_fraction),
    ];
    for (l, f) in rep.sifted_fraction.iter().enumerate() {
        report.statistics.push((format!("sifted fraction Bob{}", l + 1), *f));
    }
    if receivers == 1 {
        report.statistics.push(("sifted fraction".into(), rep.sifted_fraction[0]));
    }
    let bits = |k: &Vec<u8>| k.iter().map(|b| char::from(b'0' + b)).collect::<String>();
    report.extras.push(("alice_keys".into(), json!(rep.alice_keys.iter().map(bits).collect::<Vec<_>>())));
    report.extras.push(("bob_keys".into(), json!(rep.bob_keys.iter().map(bits).collect::<Vec<_>>())));
    report.verdicts = rep.verdicts();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(name: &str) -> ScenarioConfig {
        ScenarioConfig { scenario: Some(name.into()), ..Default::default() }
    }

    #[test]
    fn every_scenario_runs_with_defaults() {
        for info in crate::catalog::CATALOG {
            let mut c = cfg(info.name);
            if matches!(info.name, "auth" | "qkd") {
                c.trials = Some(200);
            }
            let r = run_scenario(&c, false).unwrap_or_else(|e| panic!("{}: {e}", info.name));
            assert!(r.passed(), "{} failed:\n{}", info.name, r.to_text(true));
        }
    }

    #[test]
    fn bbp_defaults_give_three_branches() {
        let r = run_scenario(&cfg("bbp"), false).unwrap();
        assert_eq!(r.records.len(), 3);
        for rec in &r.records {
            let p = rec.fields.iter().find(|(k, _)| k == "probability").unwrap().1.as_f64().unwrap();
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_foreign_keys_and_bad_values() {
        let mut c = cfg("bbp");
        c.levels = Some(3);
        assert!(matches!(run_scenario(&c, false), Err(CliError::Invalid(_))));
        assert!(matches!(run_scenario(&cfg("teleport-everything"), false), Err(CliError::UnknownScenario(_))));
        let mut c = cfg("phase-restricted");
        c.k = Some(9);
        assert!(matches!(run_scenario(&c, false), Err(CliError::Core(_))));
    }

    #[test]
    fn sampled_trials_use_derived_seeds() {
        let mut c = cfg("bbp");
        c.mode = Some(ModeName::Sample);
        c.trials = Some(5);
        c.seed = Some(9);
        let r = run_scenario(&c, false).unwrap();
        assert_eq!(r.records.len(), 5);
        assert!(r.passed());
        assert_eq!(r.to_json_lines(), run_scenario(&c, false).unwrap().to_json_lines());
    }
}
