//! `replaylab`: run single games, the verdict grid, or a WP trace.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use replaylab_core::engine::EngineError;
use replaylab_core::experiment::{
    parse_flag, run_grid, run_manifest, trace_manifest, GridOptions, ManifestError, RunError, RunManifest,
};
use serde_json::{Map, Value};

const EXIT_FAILURE_VERDICT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PROTOCOL: u8 = 3;

#[derive(Parser)]
#[command(name = "replaylab", version, about = "Generation games with replayed examples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game; writes transcript.jsonl, verdict.json and manifest.json.
    Run(RunArgs),
    /// Run the designated pairs behind every (notion, family) cell.
    Grid(GridArgs),
    /// Play a WP or baseline game and dump generator internals per round.
    Trace(RunArgs),
}

/// Flag values use the form `id` or `id:key=value,key=value`;
/// values are JSON (`a=[1,2]`, `j=3`, `kind="positive"`).
#[derive(Args)]
#[command(after_help = "\
Examples:
  replaylab run --generator wp --adversary fair --class nonuniform-hard \\
      --target member:index=6 --horizon 500 --inject-rate 0.3 --out runs/a
  replaylab run --config runs/a/manifest.json --out runs/b

A --config file holds a JSON manifest; every key it sets overrides the
matching flag. Exit codes: 0 success, 1 failure verdict under
--assert-success, 2 usage error, 3 protocol violation.")]
struct RunArgs {
    /// Generator: wp, baseline, echo, composite, greedy-proper[:rule=R], critical-proper[:rule=R]
    /// with R = all-examples or exclude-replayable
    #[arg(long)]
    generator: Option<String>,
    /// Adversary: fair, nonuniform-killer:d=N, separation-killer[:cap=N,max_phases=N],
    /// diagonal[:stabilization=F], proper-killer
    #[arg(long)]
    adversary: Option<String>,
    /// Class: nonuniform-hard, proper-replay, uniform-pair, marker-anchor,
    /// two-sided, generic:seed=N, markers-or-all
    #[arg(long)]
    class: Option<String>,
    /// Target: member:index=N, separation:b=N,kind=cutoff|below,a=[..],j=N, post-hoc
    #[arg(long)]
    target: Option<String>,
    /// Number of rounds.
    #[arg(long)]
    horizon: Option<usize>,
    /// Seed for the replay injector.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-round replay probability.
    #[arg(long)]
    inject_rate: Option<f64>,
    /// Output directory; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON manifest; its keys override the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with status 1 unless every verdict is a success.
    #[arg(long)]
    assert_success: bool,
}

#[derive(Args)]
struct GridArgs {
    /// Seeds per designated pair.
    #[arg(long, default_value_t = GridOptions::default().seeds)]
    seeds: u64,
    /// Horizon of the finite-horizon runs.
    #[arg(long, default_value_t = GridOptions::default().horizon)]
    horizon: usize,
    /// Output directory for grid.csv and grid-manifests.jsonl; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 if an observed cell differs from its expected verdict.
    #[arg(long)]
    assert_match: bool,
}

enum Failure {
    Usage(String),
    Protocol(String),
    Io(anyhow::Error),
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Manifest(m) => Failure::Usage(m.to_string()),
            RunError::Engine(e @ EngineError::ProtocolViolation { .. }) => Failure::Protocol(e.to_string()),
            RunError::Engine(e) => Failure::Io(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Grid(a) => cmd_grid(&a),
        Command::Trace(a) => cmd_trace(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Protocol(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_PROTOCOL)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Flags first, then config keys on top.
fn build_manifest(a: &RunArgs) -> Result<RunManifest, Failure> {
    let mut obj = Map::new();
    let mut put = |k: &str, v: Value| {
        obj.insert(k.to_string(), v);
    };
    if let Some(g) = &a.generator {
        put("generator", flag_value("generator", "id", g)?);
    }
    if let Some(x) = &a.adversary {
        put("adversary", flag_value("adversary", "id", x)?);
    }
    if let Some(c) = &a.class {
        put("class", flag_value("class", "id", c)?);
    }
    if let Some(t) = &a.target {
        put("target", flag_value("target", "mode", t)?);
    }
    if let Some(h) = a.horizon {
        put("horizon", h.into());
    }
    if let Some(s) = a.seed {
        put("seed", s.into());
    }
    if let Some(p) = a.inject_rate {
        put("inject_rate", p.into());
    }
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
        let cfg: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
        let Value::Object(cfg) = cfg else {
            return Err(Failure::Usage(format!("config {}: expected a JSON object", path.display())));
        };
        obj.extend(cfg);
    }
    obj.remove("out");
    // written into manifest.json; recomputed from the rest
    obj.remove("manifest_hash");
    let m = RunManifest::from_json(&Value::Object(obj).to_string())?;
    m.validate()?;
    Ok(m)
}

/// Flag text to a tagged JSON object; typed checks happen in `from_json`.
fn flag_value(field: &str, tag: &str, text: &str) -> Result<Value, Failure> {
    Ok(parse_flag::<Value>(field, tag, text)?)
}

/// Write through a sibling temp file so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Print to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> anyhow::Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn manifest_json(m: &RunManifest) -> String {
    let mut v = serde_json::to_value(m).expect("manifest serializes");
    v["manifest_hash"] = Value::String(m.hash());
    let mut s = serde_json::to_string_pretty(&v).expect("manifest serializes");
    s.push('\n');
    s
}

fn cmd_run(a: &RunArgs) -> Result<u8, Failure> {
    let m = build_manifest(a)?;
    let report = run_manifest(&m)?;
    match &a.out {
        Some(dir) => {
            ensure_dir(dir)?;
            write_atomic(&dir.join("manifest.json"), &manifest_json(&m))?;
            write_atomic(&dir.join("transcript.jsonl"), &report.transcript_jsonl())?;
            write_atomic(&dir.join("verdict.json"), &report.verdict_json())?;
        }
        None => emit(&report.verdict_json())?,
    }
    for v in &report.verdicts {
        eprintln!(
            "{}: {:?}, {} mistakes, last {:?}",
            v.verdict.target,
            v.verdict.classification,
            v.verdict.mistake_times.len(),
            v.verdict.last_mistake
        );
    }
    Ok(if a.assert_success && !report.all_success() { EXIT_FAILURE_VERDICT } else { 0 })
}

fn cmd_trace(a: &RunArgs) -> Result<u8, Failure> {
    let m = build_manifest(a)?;
    let (report, lines) = trace_manifest(&m)?;
    let mut body = String::new();
    for l in &lines {
        body.push_str(&serde_json::to_string(l).expect("trace line serializes"));
        body.push('\n');
    }
    match &a.out {
        Some(dir) => {
            ensure_dir(dir)?;
            write_atomic(&dir.join("manifest.json"), &manifest_json(&m))?;
            write_atomic(&dir.join("trace.jsonl"), &body)?;
            write_atomic(&dir.join("verdict.json"), &report.verdict_json())?;
        }
        None => emit(&body)?,
    }
    Ok(if a.assert_success && !report.all_success() { EXIT_FAILURE_VERDICT } else { 0 })
}

fn cmd_grid(a: &GridArgs) -> Result<u8, Failure> {
    if a.seeds == 0 || a.horizon == 0 {
        return Err(Failure::Usage("--seeds and --horizon must be positive".into()));
    }
    let grid = run_grid(&GridOptions { seeds: a.seeds, horizon: a.horizon })?;
    match &a.out {
        Some(dir) => {
            ensure_dir(dir)?;
            write_atomic(&dir.join("grid.csv"), &grid.to_csv())?;
            write_atomic(&dir.join("grid-manifests.jsonl"), &grid.manifests_jsonl())?;
        }
        None => emit(&grid.to_csv())?,
    }
    Ok(if a.assert_match && !grid.all_match() { EXIT_FAILURE_VERDICT } else { 0 })
}
