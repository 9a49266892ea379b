use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;
use surfflow::config::{document_from_value, parse_document, set_path, ConfigDocument, PhaseSpec, RunConfig};
use surfflow::manifest::{RunManifest, RunStatus};
use surfflow::ops::{format_table, operator_checks};
use surfflow::runner::{record_config_failure, run_to_dir};
use surfflow::IoError;

/// Exit code for unusable input: unreadable or invalid configuration.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "surfflow", version, about = "Two-phase flow on evolving surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write ledger, chart, snapshots and manifest.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "surfflow-out")]
        out: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        #[arg(long = "t-end", allow_negative_numbers = true)]
        t_end: Option<f64>,
        /// Seed of a random initial phase field.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the surface operators against analytic values.
    VerifyOps {
        #[arg(long, default_value_t = 3)]
        level: u32,
    },
    /// Run once per value of one configuration entry, e.g.
    /// `--param material.theta=0.6,0.7`.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, default_value = "surfflow-sweep")]
        out: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })
}

fn report(dir: &Path, m: &RunManifest) -> u8 {
    let msg = m.message.as_deref().unwrap_or("all invariant columns within bounds");
    println!("{}: {:?} after {} steps: {msg}", dir.display(), m.status, m.steps);
    m.status.exit_code() as u8
}

fn config_failure(dir: &Path, raw: Value, err: &IoError) -> u8 {
    eprintln!("error: {err}");
    if let Err(e) = record_config_failure(dir, raw, err) {
        eprintln!("error: {e}");
    }
    EXIT_CONFIG
}

fn run(config: &Path, out: &Path, dt: Option<f64>, t_end: Option<f64>, seed: Option<u64>) -> u8 {
    let text = match read_text(config) {
        Ok(t) => t,
        Err(e) => return config_failure(out, Value::Null, &e),
    };
    let raw = serde_json::from_str(&text).unwrap_or(Value::String(text.clone()));
    let mut doc: ConfigDocument = match parse_document(&text) {
        Ok(d) => d,
        Err(e) => return config_failure(out, raw, &e),
    };
    if let Some(dt) = dt {
        doc.stepping.dt = dt;
    }
    if let Some(t) = t_end {
        doc.stepping.t_end = t;
    }
    if let Some(s) = seed {
        match &mut doc.initial.phase {
            PhaseSpec::Random { seed, .. } => *seed = s,
            _ => eprintln!("warning: --seed ignored, the initial phase is not random"),
        }
    }
    let cfg = match RunConfig::from_document(&doc) {
        Ok(c) => c,
        Err(e) => return config_failure(out, serde_json::to_value(&doc).unwrap_or(raw), &e),
    };
    match run_to_dir(&cfg, out) {
        Ok(m) => report(out, &m),
        Err(e) => {
            eprintln!("error: {e}");
            RunStatus::Running.exit_code() as u8
        }
    }
}

fn verify_ops(level: u32) -> u8 {
    match operator_checks(level) {
        Ok(checks) => {
            print!("{}", format_table(level, &checks));
            u8::from(!checks.iter().all(|c| c.pass()))
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// `path=v1,v2,...`; each value is read as JSON, falling back to a string.
fn parse_param(param: &str) -> Result<(String, Vec<(String, Value)>), IoError> {
    let (path, values) = param
        .split_once('=')
        .ok_or_else(|| IoError::Config { path: "--param".into(), message: "expected path=v1,v2,...".into() })?;
    let values: Vec<(String, Value)> = values
        .split(',')
        .filter(|v| !v.is_empty())
        .map(|v| (v.to_string(), serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))))
        .collect();
    if values.is_empty() {
        return Err(IoError::Config { path: "--param".into(), message: "no values given".into() });
    }
    Ok((path.to_string(), values))
}

fn sweep(config: &Path, param: &str, out: &Path) -> u8 {
    let parsed = read_text(config).and_then(|t| {
        serde_json::from_str::<Value>(&t).map_err(|e| IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    });
    let base = match parsed {
        Ok(v) => v,
        Err(e) => return config_failure(out, Value::Null, &e),
    };
    let (path, values) = match parse_param(param) {
        Ok(p) => p,
        Err(e) => return config_failure(out, base, &e),
    };
    let mut worst = 0u8;
    for (label, value) in values {
        let dir = out.join(format!("{path}={label}").replace(['/', '\\'], "_"));
        let mut doc = base.clone();
        let code = match set_path(&mut doc, &path, value)
            .and_then(|()| document_from_value(doc.clone()))
            .and_then(|d| RunConfig::from_document(&d))
        {
            Ok(cfg) => match run_to_dir(&cfg, &dir) {
                Ok(m) => report(&dir, &m),
                Err(e) => {
                    eprintln!("error: {e}");
                    RunStatus::Running.exit_code() as u8
                }
            },
            Err(e) => config_failure(&dir, doc, &e),
        };
        if worst == 0 {
            worst = code;
        }
    }
    worst
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, dt, t_end, seed } => run(&config, &out, dt, t_end, seed),
        Command::VerifyOps { level } => verify_ops(level),
        Command::Sweep { config, param, out } => sweep(&config, &param, &out),
    };
    ExitCode::from(code)
}
