//! Command-line surface. Parsing lives here so it can be tested without
//! spawning the binary; `main` only maps errors to exit codes.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::datastore::{Experiment, ExperimentLock, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::fusion::{MicPixelMap, RunMode};
use crate::workflow::{self, DetectorChoice, ExperimentConfig};

/// Stable exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Data(_)
        | Error::MissingFile(_)
        | Error::Json(_)
        | Error::Wav(_)
        | Error::Range { .. }
        | Error::Size { .. }
        | Error::Geometry(_) => EXIT_DATA,
        Error::Stream(_) | Error::NanLoss { .. } | Error::Io { .. } => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(name = "ivd", version, about = "Audio-visual idling vehicle detection")]
pub struct Cli {
    /// Experiment directory.
    #[arg(long, global = true, default_value = "experiment")]
    pub experiment: PathBuf,
    /// Master seed (simulate); other commands check it against the manifest.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file. Without it, commands reuse the config recorded by
    /// `simulate`, falling back to built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print a single JSON summary object on stdout.
    #[arg(long, global = true)]
    pub json_logs: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scenario: WAVs, ground truth, mic map and manifest.
    Simulate(SimulateArgs),
    /// Label audio windows and split them.
    BuildDataset(DatasetArgs),
    /// Train the encoder and latent classifier.
    Train(TrainArgs),
    /// Stream the scenario through the detection pipeline.
    Run(RunArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Print the table of the last evaluation.
    Report,
    /// Write the microphone pixel map.
    SetupMics(MicArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Seconds between labelled windows.
    #[arg(long)]
    pub stride: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Also train the end-to-end supervised baseline.
    #[arg(long)]
    pub baseline: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Pace ticks against the wall clock.
    #[arg(long, conflicts_with = "offline")]
    pub realtime: bool,
    /// Process ticks as fast as possible (default).
    #[arg(long)]
    pub offline: bool,
    /// Use ground-truth boxes as detections.
    #[arg(long)]
    pub oracle: bool,
    /// Recorded detections (JSON lines) instead of the simulator.
    #[arg(long, conflicts_with = "oracle")]
    pub detections: Option<PathBuf>,
    /// Experiment whose checkpoints to use (default: this one).
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Seconds between ticks.
    #[arg(long)]
    pub cadence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction stream (JSON lines) to score instead of the experiment's own.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MicArgs {
    /// Mic map JSON to install instead of projecting the scenario's microphones.
    #[arg(long, conflicts_with_all = ["pixel", "interactive"])]
    pub map: Option<PathBuf>,
    /// Pixel location `U,V` of each microphone in array order (repeat per mic).
    #[arg(long, value_parser = parse_pixel)]
    pub pixel: Vec<(f64, f64)>,
    /// Prompt for each microphone's pixel location on stdin.
    #[arg(long, conflicts_with = "pixel")]
    pub interactive: bool,
}

fn parse_pixel(s: &str) -> std::result::Result<(f64, f64), String> {
    let (u, v) = s.split_once(',').ok_or_else(|| format!("expected U,V, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(u)?, num(v)?))
}

fn prompt_pixels(n: usize) -> Result<Vec<(f64, f64)>> {
    use std::io::{BufRead, Write};
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        eprint!("mic {} pixel (U,V): ", out.len());
        let _ = std::io::stderr().flush();
        let line = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(Path::new("<stdin>"), e))?,
            None => return Err(Error::config(format!("stdin closed after {} of {n} mics", out.len()))),
        };
        match parse_pixel(&line) {
            Ok(p) => out.push(p),
            Err(e) => eprintln!("{e}"),
        }
    }
    Ok(out)
}

/// Config precedence: `--config` file, else the config `simulate` recorded in
/// the experiment, else defaults. Command flags are applied on top by the caller.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let from_file = |p: &Path| -> Result<ExperimentConfig> {
        if !p.exists() {
            return Err(Error::MissingFile(p.to_path_buf()));
        }
        let text = std::fs::read_to_string(p).map_err(|e| Error::config(format!("{}: {e}", p.display())))?;
        ExperimentConfig::from_json(&text).map_err(|e| Error::config(format!("{}: {e}", p.display())))
    };
    if let Some(p) = &cli.config {
        return from_file(p);
    }
    let recorded = cli.experiment.join("configs/simulate.json");
    if !matches!(cli.command, Command::Simulate(_)) && recorded.exists() {
        return from_file(&recorded);
    }
    Ok(ExperimentConfig::default())
}

fn check_seed(cli: &Cli) -> Result<()> {
    if let Some(seed) = cli.seed {
        let exp = Experiment::open(&cli.experiment)?;
        if exp.manifest.seed != seed {
            return Err(Error::config(format!(
                "--seed {seed} differs from the experiment's seed {}",
                exp.manifest.seed
            )));
        }
    }
    Ok(())
}

/// Executes one command and returns its machine-readable summary.
pub fn execute(cli: &Cli) -> Result<Value> {
    let mut cfg = resolve_config(cli)?;
    let root = cli.experiment.as_path();
    if !matches!(cli.command, Command::Simulate(_)) {
        let manifest = root.join(MANIFEST_FILE);
        if !manifest.exists() {
            return Err(Error::MissingFile(manifest));
        }
        check_seed(cli)?;
    }
    let _lock = ExperimentLock::acquire(root)?;
    let out = match &cli.command {
        Command::Simulate(a) => {
            if let Some(d) = a.duration {
                cfg.world.script.duration = d;
            }
            let seed = cli.seed.unwrap_or(cfg.seed);
            cfg.seed = seed;
            let s = workflow::simulate(root, &cfg, seed)?;
            json!({"command": "simulate", "experiment": root, "summary": s})
        }
        Command::BuildDataset(a) => {
            if let Some(s) = a.stride {
                cfg.dataset.stride = s;
            }
            let s = workflow::build_dataset(root, &cfg)?;
            json!({"command": "build-dataset", "summary": s})
        }
        Command::Train(a) => {
            if let Some(e) = a.epochs {
                cfg.train.epochs = e;
            }
            if let Some(lr) = a.lr {
                cfg.train.lr = lr;
            }
            let s = workflow::train(root, &cfg, a.baseline)?;
            json!({"command": "train", "summary": s})
        }
        Command::Run(a) => {
            if let Some(c) = a.cadence {
                cfg.tick.cadence = c;
            }
            let mode = if a.realtime { RunMode::Realtime } else { RunMode::Offline };
            let detector = if a.oracle || cfg.oracle_detector {
                DetectorChoice::Oracle
            } else {
                DetectorChoice::Noisy
            };
            let s = workflow::run(root, &cfg, mode, detector, a.models.as_deref(), a.detections.as_deref())?;
            json!({"command": "run", "summary": s})
        }
        Command::Eval(a) => {
            let (_, s) = workflow::eval(root, &cfg, a.predictions.as_deref())?;
            json!({"command": "eval", "summary": s})
        }
        Command::Report => {
            let table = workflow::report(root)?;
            json!({"command": "report", "table": table})
        }
        Command::SetupMics(a) => {
            let map = if let Some(p) = &a.map {
                Some(MicPixelMap::load(p)?)
            } else if a.interactive || !a.pixel.is_empty() {
                let pixels = if a.interactive {
                    let n = Experiment::open(root)?.read_json::<crate::scenesim::ScenarioSpec>(workflow::SCENARIO_FILE)?.mics.len();
                    prompt_pixels(n)?
                } else {
                    a.pixel.clone()
                };
                Some(workflow::mic_map_from_pixels(root, &pixels)?)
            } else {
                None
            };
            let m = workflow::setup_mics(root, map)?;
            json!({"command": "setup-mics", "mics": m.mics})
        }
    };
    Ok(out)
}

/// Human-readable rendering of a summary.
pub fn render_human(v: &Value) -> String {
    if let Some(t) = v.get("table").and_then(Value::as_str) {
        return t.to_string();
    }
    let cmd = v.get("command").and_then(Value::as_str).unwrap_or("?");
    let body = v.get("summary").or_else(|| v.get("mics")).cloned().unwrap_or(Value::Null);
    let mut parts = Vec::new();
    if let Value::Object(map) = &body {
        for (k, val) in map {
            parts.push(format!("{k}={val}"));
        }
    } else {
        parts.push(body.to_string());
    }
    format!("{cmd}: {}", parts.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_anywhere() {
        let cli = Cli::try_parse_from(["ivd", "run", "--experiment", "x", "--realtime", "--oracle", "--json-logs"]).unwrap();
        assert_eq!(cli.experiment, PathBuf::from("x"));
        assert!(cli.json_logs);
        assert!(matches!(cli.command, Command::Run(RunArgs { realtime: true, oracle: true, .. })));
        assert!(Cli::try_parse_from(["ivd", "run", "--realtime", "--offline"]).is_err());
        assert!(Cli::try_parse_from(["ivd"]).is_err());
        let cli = Cli::try_parse_from(["ivd", "setup-mics", "--pixel", "1,2", "--pixel", "3.5, 4"]).unwrap();
        let Command::SetupMics(a) = cli.command else { panic!() };
        assert_eq!(a.pixel, vec![(1.0, 2.0), (3.5, 4.0)]);
        assert!(Cli::try_parse_from(["ivd", "setup-mics", "--pixel", "1"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::config("x")), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::MissingFile("a".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::Stream("x".into())), EXIT_RUNTIME);
    }
}
