use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qbcast_cli::{run_scenario, CliError, ModeName, ScenarioConfig, CATALOG, INVALID_INPUT_EXIT};

/// Run broadcast-protocol scenarios and report verdicts.
///
/// Exit status: 0 when every verdict passes, 1 when one fails, 2 on invalid input.
#[derive(Debug, Parser)]
#[command(name = "qbcast", version)]
struct Args {
    /// Scenario name; overrides `scenario` in the config file.
    scenario: Option<String>,
    /// TOML scenario configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampled trials, or rounds for the key scenarios.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    /// Emit line-delimited JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Include the event log and final states.
    #[arg(long)]
    verbose_transcript: bool,
    /// List the available scenarios.
    #[arg(long)]
    list: bool,
}

fn list(json: bool) -> String {
    let mut out = String::new();
    for s in CATALOG {
        if json {
            let line = serde_json::json!({"name": s.name, "summary": s.summary, "topics": s.topics, "parameters": s.parameters});
            out.push_str(&format!("{line}\n"));
        } else {
            out.push_str(&format!("{:<18} {}  [{}]\n", s.name, s.summary, s.topics.join(", ")));
        }
    }
    out
}

fn execute(args: &Args) -> Result<(String, u8), CliError> {
    if args.list {
        return Ok((list(args.json), 0));
    }
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::from_toml(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = &args.scenario {
        cfg.scenario = Some(s.clone());
    }
    cfg.seed = args.seed.or(cfg.seed);
    cfg.trials = args.trials.or(cfg.trials);
    cfg.mode = args.mode.or(cfg.mode);
    let report = run_scenario(&cfg, args.verbose_transcript)?;
    let text = if args.json { report.to_json_lines() } else { report.to_text(args.verbose_transcript) };
    Ok((text, report.exit_code()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok((text, code)) => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("qbcast: {e}");
            ExitCode::from(INVALID_INPUT_EXIT)
        }
    }
}
