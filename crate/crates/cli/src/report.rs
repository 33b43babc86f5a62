//! Machine-readable reports: one JSON object per line, then a summary.

use core::fmt::Write as _;

use serde_json::{json, Map, Number, Value};

use qbcast_core::linalg::C64;
use qbcast_core::protocol::{Comparison, Event, Recipient, Verdict};
use qbcast_core::tensor::StateVector;

use crate::config::ScenarioConfig;

/// Floats are written with 17 significant digits so reruns compare byte for byte.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("exponent notation is valid JSON"))
}

pub fn complex(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn state(s: &StateVector) -> Value {
    let labels: Vec<&str> = s.subsystems().iter().map(|x| x.label.as_str()).collect();
    json!({
        "labels": labels,
        "dims": s.dims(),
        "amplitudes": s.amplitudes().iter().map(|&z| complex(z)).collect::<Vec<_>>(),
    })
}

/// Rewrites every non-integer number in a tree to the fixed float format.
fn normalize_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => n.as_f64().map_or(Value::Number(n), num),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize_floats(v))).collect()),
        other => other,
    }
}

/// Statistic and metric names become snake_case keys.
pub fn key(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

fn verdict(v: &Verdict) -> Value {
    json!({
        "name": v.name,
        "value": num(v.value),
        "bound": num(v.bound),
        "comparison": match v.comparison { Comparison::AtLeast => "at_least", Comparison::AtMost => "at_most" },
        // Derived here, never stored.
        "passed": v.passed(),
    })
}

pub fn event(e: &Event) -> Value {
    let recipient = |r: &Recipient| match r {
        Recipient::Party(p) => Value::String(p.clone()),
        Recipient::Broadcast => Value::String("*".into()),
    };
    match e {
        Event::Prepare { seq, party, labels } => json!({"event": "prepare", "seq": seq, "party": party, "labels": labels}),
        Event::Operation { seq, party, name, targets, depends_on } => {
            json!({"event": "operation", "seq": seq, "party": party, "name": name, "targets": targets, "depends_on": depends_on})
        }
        Event::Measurement { seq, party, target, basis, outcome, consumed, depends_on } => json!({
            "event": "measurement", "seq": seq, "party": party, "target": target, "basis": basis,
            "outcome": outcome, "consumed": consumed, "depends_on": depends_on,
        }),
        Event::Choice { seq, party, name, outcome, depends_on } => {
            json!({"event": "choice", "seq": seq, "party": party, "name": name, "outcome": outcome, "depends_on": depends_on})
        }
        Event::Message { seq, from, to, outcomes, abort } => {
            json!({"event": "message", "seq": seq, "from": from, "to": recipient(to), "outcomes": outcomes, "abort": abort})
        }
        Event::Transfer { seq, from, to, label } => json!({"event": "transfer", "seq": seq, "from": from, "to": to, "label": label}),
    }
}

/// A branch of an enumerated run, a sampled trial, or a key-generation round.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: &'static str,
    pub index: usize,
    pub fields: Vec<(String, Value)>,
    pub verdicts: Vec<Verdict>,
}

impl Record {
    pub fn new(kind: &'static str, index: usize) -> Self {
        Self { kind, index, fields: Vec::new(), verdicts: Vec::new() }
    }

    pub fn field(mut self, name: &str, value: Value) -> Self {
        self.fields.push((name.to_string(), value));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    /// The effective configuration, defaults filled in.
    pub config: ScenarioConfig,
    pub records: Vec<Record>,
    pub statistics: Vec<(String, f64)>,
    /// Non-numeric summary data such as keys.
    pub extras: Vec<(String, Value)>,
    pub verdicts: Vec<Verdict>,
    /// Event log, present with `--verbose-transcript`.
    pub events: Vec<Event>,
}

impl Report {
    pub fn new(scenario: &str, config: ScenarioConfig) -> Self {
        Self {
            scenario: scenario.to_string(),
            config,
            records: Vec::new(),
            statistics: Vec::new(),
            extras: Vec::new(),
            verdicts: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn statistic(&self, name: &str) -> Option<f64> {
        let k = key(name);
        self.statistics.iter().find(|(n, _)| key(n) == k).map(|(_, v)| *v)
    }

    pub fn failed_records(&self) -> usize {
        self.records.iter().filter(|r| !r.passed()).count()
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed) && self.failed_records() == 0
    }

    /// Process exit status: 0 when everything passes, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.passed())
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let config = serde_json::to_value(&self.config).expect("config is serializable");
        push(&mut out, json!({"type": "scenario", "scenario": self.scenario, "config": normalize_floats(config)}));
        for r in &self.records {
            let mut m = Map::new();
            m.insert("type".into(), Value::String(r.kind.into()));
            m.insert("index".into(), json!(r.index));
            for (k, v) in &r.fields {
                m.insert(k.clone(), v.clone());
            }
            m.insert("verdicts".into(), Value::Array(r.verdicts.iter().map(verdict).collect()));
            m.insert("passed".into(), Value::Bool(r.passed()));
            push(&mut out, Value::Object(m));
        }
        for e in &self.events {
            let mut v = event(e);
            v["type"] = Value::String("event".into());
            push(&mut out, v);
        }
        let stats: Map<String, Value> = self.statistics.iter().map(|(k, v)| (key(k), num(*v))).collect();
        let mut summary = json!({
            "type": "summary",
            "scenario": self.scenario,
            "records": self.records.len(),
            "failed_records": self.failed_records(),
            "statistics": stats,
            "verdicts": self.verdicts.iter().map(verdict).collect::<Vec<_>>(),
            "passed": self.passed(),
        });
        for (k, v) in &self.extras {
            summary[k.as_str()] = v.clone();
        }
        push(&mut out, summary);
        out
    }

    pub fn to_text(&self, verbose: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {} records, {} failed", self.scenario, self.records.len(), self.failed_records());
        if verbose {
            for r in &self.records {
                let fields: Vec<String> = r.fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(out, "  {} {} [{}] {}", r.kind, r.index, if r.passed() { "ok" } else { "FAIL" }, fields.join(" "));
            }
            for e in &self.events {
                let _ = writeln!(out, "  {}", event(e));
            }
        }
        for (k, v) in &self.statistics {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for v in &self.verdicts {
            let op = match v.comparison {
                Comparison::AtLeast => ">=",
                Comparison::AtMost => "<=",
            };
            let _ = writeln!(out, "  {} {}: {} {op} {}", if v.passed() { "PASS" } else { "FAIL" }, v.name, v.value, v.bound);
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

fn push(out: &mut String, v: Value) {
    out.push_str(&v.to_string());
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(num(0.75).to_string(), "7.5000000000000000e-1");
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        let back: f64 = num(core::f64::consts::PI).to_string().parse().unwrap();
        assert_eq!(back, core::f64::consts::PI);
        assert_eq!(num(f64::NAN), Value::String("NaN".into()));
    }

    #[test]
    fn verdicts_are_recomputed() {
        let mut r = Report::new("x", ScenarioConfig::default());
        r.verdicts.push(Verdict::at_most("error", 0.5, 1.0));
        assert!(r.passed());
        r.verdicts[0].value = 2.0;
        assert!(!r.passed());
        assert_eq!(r.exit_code(), 1);
        assert!(r.to_json_lines().contains("\"passed\":false"));
    }

    #[test]
    fn keys_are_snake_case() {
        assert_eq!(key("use 2 conditional success probability"), "use_2_conditional_success_probability");
    }
}
