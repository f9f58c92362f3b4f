use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cubix_sim::engine::{self, decimation_stride, emit_csv, emit_plots, EngineError};
use cubix_sim::model::{apply_override, scenario_from_value, serialize_scenario, Scenario, ScenarioError};
use cubix_sim::planner::{builtin_scenario, BuiltinScenario};

#[derive(Parser)]
#[command(name = "cubix", version, about = "Simulate the wire-driven humanoid on its winch cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenarios and write CSV, plots, and a run manifest.
    Run(RunArgs),
    /// Check a scenario file and print every violation.
    Validate { file: PathBuf },
    /// Write a built-in scenario as an editable file.
    EmitScenario {
        name: BuiltinScenario,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario files.
    files: Vec<PathBuf>,
    /// Built-in scenario (pull_up, rising, kick); may be repeated.
    #[arg(long = "builtin", value_name = "NAME")]
    builtins: Vec<BuiltinScenario>,
    /// Output directory. With several scenarios each gets a subdirectory.
    #[arg(short, long, env = "CUBIX_OUT_DIR", default_value = "out")]
    output: PathBuf,
    /// Override a scenario value, e.g. `constants.total_mass=60`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write every tick to the CSV instead of 100 Hz.
    #[arg(long)]
    no_decimate: bool,
    /// Scenarios to run in parallel.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

/// Failure reported as a JSON record on stderr.
struct Failure {
    code: &'static str,
    message: String,
    details: Value,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), details: Value::Null }
    }

    fn report(&self, source: &str) {
        let mut rec = json!({ "error": self.code, "message": self.message, "source": source });
        if !self.details.is_null() {
            rec["details"] = self.details.clone();
        }
        eprintln!("{rec}");
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match &e {
            ScenarioError::Parse { path, line, column, .. } => Failure {
                code: "ParseError",
                message: e.to_string(),
                details: json!({ "path": path, "line": line, "column": column }),
            },
            ScenarioError::Invalid(v) => Failure {
                code: "InvalidScenario",
                message: e.to_string(),
                details: json!({
                    "violations": v.iter().map(|v| json!({ "code": v.code(), "message": v.to_string() })).collect::<Vec<_>>()
                }),
            },
            ScenarioError::Serialize(_) => Failure::new("SerializeError", e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new("IoError", format!("{}: {e}", path.display()))
}

enum Source {
    Builtin(BuiltinScenario),
    File(PathBuf),
}

impl Source {
    fn label(&self) -> String {
        match self {
            Source::Builtin(b) => b.name().to_string(),
            Source::File(p) => p.display().to_string(),
        }
    }

    fn tree(&self) -> Result<Value, Failure> {
        match self {
            Source::Builtin(b) => {
                serde_json::to_value(builtin_scenario(*b)).map_err(|e| Failure::new("SerializeError", e.to_string()))
            }
            Source::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
                // Parse through the loader first so syntax errors carry positions.
                let scenario = cubix_sim::model::load_scenario(&text).or_else(|e| match e {
                    ScenarioError::Invalid(_) => {
                        serde_json::from_str::<Scenario>(&text).map_err(|e| Failure::new("ParseError", e.to_string()))
                    }
                    other => Err(other.into()),
                })?;
                serde_json::to_value(scenario).map_err(|e| Failure::new("SerializeError", e.to_string()))
            }
        }
    }
}

fn load(source: &Source, overrides: &[String]) -> Result<Scenario, Failure> {
    let mut tree = source.tree()?;
    for o in overrides {
        apply_override(&mut tree, o).map_err(|e| Failure::new("BadOverride", e.to_string()))?;
    }
    scenario_from_value(tree).map_err(|e| match &e {
        ScenarioError::Parse { path, .. } if overrides.iter().any(|o| touches(o, path)) => {
            Failure::new("BadOverride", e.to_string())
        }
        _ => e.into(),
    })
}

/// Whether the override `key=value` sets `path` or one of its ancestors or descendants.
fn touches(spec: &str, path: &str) -> bool {
    let key = spec.split_once('=').map_or(spec, |(k, _)| k).trim();
    let within = |outer: &str, inner: &str| inner == outer || inner.starts_with(&format!("{outer}."));
    within(key, path) || within(path, key)
}

fn run_one(source: &Source, args: &RunArgs, dir: &Path) -> Result<(), Failure> {
    let scenario = load(source, &args.overrides)?;
    let canonical = serialize_scenario(&scenario)?;
    let started = Instant::now();
    let log = engine::run(&scenario)?;
    let wall = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let stride = if args.no_decimate { 1 } else { decimation_stride(scenario.sim.dt) };
    let csv = dir.join("trajectory.csv");
    emit_csv(&log, &csv, stride).map_err(|e| io_failure(&csv, e))?;
    let plots = emit_plots(&log, dir).map_err(|e| io_failure(dir, e))?;

    let hash = Sha256::digest(canonical.as_bytes());
    let hash: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let mut files = vec!["trajectory.csv".to_string()];
    files.extend(plots.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()));
    let manifest = json!({
        "scenario": scenario.name,
        "source": source.label(),
        "scenario_sha256": hash,
        "overrides": args.overrides,
        "version": env!("CARGO_PKG_VERSION"),
        "dt": scenario.sim.dt,
        "duration": scenario.duration(),
        "ticks": log.rows.len(),
        "csv_stride": stride,
        "events": log.events().map(|(_, e)| e.to_string()).collect::<Vec<_>>(),
        "wall_time_s": wall,
        "files": files,
    });
    let path = dir.join("run-manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| io_failure(&path, e))?;
    println!("{}: {} ticks in {wall:.2} s -> {}", source.label(), log.rows.len(), dir.display());
    Ok(())
}

fn run(args: &RunArgs) -> ExitCode {
    let mut sources: Vec<Source> = args.builtins.iter().map(|&b| Source::Builtin(b)).collect();
    sources.extend(args.files.iter().cloned().map(Source::File));
    if sources.is_empty() {
        Failure::new("Usage", "run needs --builtin NAME or a scenario file").report("run");
        return ExitCode::from(2);
    }
    let dirs: Vec<PathBuf> = if sources.len() == 1 {
        vec![args.output.clone()]
    } else {
        sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let stem = match s {
                    Source::Builtin(b) => b.name().to_string(),
                    Source::File(p) => p.file_stem().map_or(format!("scenario{i}"), |s| s.to_string_lossy().into()),
                };
                args.output.join(stem)
            })
            .collect()
    };

    let jobs = usize::from(args.jobs).min(sources.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(), Failure>>>> = Mutex::new((0..sources.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= sources.len() {
                    break;
                }
                let r = run_one(&sources[i], args, &dirs[i]);
                results.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("no poisoned workers");

    let mut ok = true;
    for (src, r) in sources.iter().zip(results) {
        if let Some(Err(f)) = r {
            f.report(&src.label());
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn validate(file: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            io_failure(file, e).report(&file.display().to_string());
            return ExitCode::FAILURE;
        }
    };
    match cubix_sim::model::load_scenario(&text) {
        Ok(_) => {
            println!("{}: ok", file.display());
            ExitCode::SUCCESS
        }
        Err(ScenarioError::Invalid(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            Failure::from(ScenarioError::Invalid(violations)).report(&file.display().to_string());
            ExitCode::FAILURE
        }
        Err(e) => {
            Failure::from(e).report(&file.display().to_string());
            ExitCode::FAILURE
        }
    }
}

fn emit_scenario(name: BuiltinScenario, output: Option<&Path>) -> ExitCode {
    let text = serialize_scenario(&builtin_scenario(name)).expect("built-in serializes") + "\n";
    match output {
        None => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Some(p) => match std::fs::write(p, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                io_failure(p, e).report(name.name());
                ExitCode::FAILURE
            }
        },
    }
}

fn list() -> ExitCode {
    for b in BuiltinScenario::ALL {
        let s = builtin_scenario(b);
        let phases: Vec<&str> = s.phases.iter().map(|p| p.name.as_str()).collect();
        println!("{:<8} {:>5.1} s  phases: {}", b.name(), s.duration(), phases.join(" -> "));
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => run(args),
        Command::Validate { file } => validate(file),
        Command::EmitScenario { name, output } => emit_scenario(*name, output.as_deref()),
        Command::List => list(),
    }
}
