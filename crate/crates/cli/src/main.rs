//! `padic-tree`: JSON in, JSON out.

mod geometry;
mod hida;
mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use padic_tree::{Error, OrdNorm};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "padic-tree", version, about = "p-adic trees, integrals, periods and ordinary forms")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Residue characteristic (odd prime).
    #[arg(long, global = true, default_value_t = 3)]
    pub p: u64,
    /// Residue degree of K.
    #[arg(long, global = true, default_value_t = 1)]
    pub f: usize,
    /// Working precision N.
    #[arg(long, global = true, default_value_t = 12)]
    pub prec: i64,
    /// Tree depth D.
    #[arg(long, global = true, default_value_t = 8)]
    pub depth: i64,
    /// Stored moments M.
    #[arg(long, global = true, default_value_t = 4)]
    pub moments: usize,
    /// Order of the w-germs.
    #[arg(long, global = true, default_value_t = 2)]
    pub germ_order: usize,
    #[arg(long, global = true, value_enum, default_value_t = Norm::P)]
    pub norm: Norm,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write a DOT rendering of the relevant graph.
    #[arg(long, global = true)]
    pub dot: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// ord(p) = 1
    P,
    /// ord(π) = 1
    Pi,
}

impl Norm {
    pub fn ord_norm(self) -> OrdNorm {
        match self {
            Norm::P => OrdNorm::P,
            Norm::Pi => OrdNorm::Pi,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Neighbor, path and reduction queries, plus DOT export of a ball.
    Tree(geometry::TreeArgs),
    /// ×∫ of a degree-zero divisor against a measure.
    Integrate(geometry::IntegrateArgs),
    /// Period matrix of a Schottky group package.
    Periods(geometry::GroupArgs),
    /// ℒ-invariant of a Schottky group package.
    Linvariant(geometry::LinvArgs),
    /// Ordinary lift of weight-two eigendata.
    Lift(hida::LiftArgs),
    /// I_Φ(τ₁) − I_Φ(τ₂) and its decomposition.
    Indefinite(hida::IndefiniteArgs),
    /// Property suites with pass/fail per invariant.
    Check(hida::CheckArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Tree(_) => "tree",
            Command::Integrate(_) => "integrate",
            Command::Periods(_) => "periods",
            Command::Linvariant(_) => "linvariant",
            Command::Lift(_) => "lift",
            Command::Indefinite(_) => "indefinite",
            Command::Check(_) => "check",
        }
    }
}

/// Input errors exit with 2, computation errors with 1.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(Error),
    /// The command ran but reported failures (e.g. a failing suite).
    Failed(Value),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Tag errors raised while reading inputs as input errors.
pub trait InputContext<T> {
    fn input(self) -> CliResult<T>;
}

impl<T> InputContext<T> for padic_tree::Result<T> {
    fn input(self) -> CliResult<T> {
        self.map_err(|e| CliError::Input(e.to_string()))
    }
}

impl RunConfig {
    fn validate(&self) -> CliResult<()> {
        if self.depth < 2 {
            return Err(CliError::Input(format!("depth {} < 2", self.depth)));
        }
        if self.prec < self.depth {
            return Err(CliError::Input(format!("precision {} below depth {}", self.prec, self.depth)));
        }
        Ok(())
    }
}

fn run(cfg: &RunConfig, cmd: &Command) -> CliResult<Value> {
    cfg.validate()?;
    match cmd {
        Command::Tree(a) => geometry::cmd_tree(cfg, a),
        Command::Integrate(a) => geometry::cmd_integrate(cfg, a),
        Command::Periods(a) => geometry::cmd_periods(cfg, a),
        Command::Linvariant(a) => geometry::cmd_linvariant(cfg, a),
        Command::Lift(a) => hida::cmd_lift(cfg, a),
        Command::Indefinite(a) => hida::cmd_indefinite(cfg, a),
        Command::Check(a) => hida::cmd_check(cfg, a),
    }
}

fn emit(cfg: &RunConfig, v: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    match &cfg.out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = &cli.config;
    let (body, code) = match run(cfg, &cli.cmd) {
        Ok(v) => (json!({ "result": v }), 0),
        Err(CliError::Failed(v)) => (json!({ "result": v }), 1),
        Err(CliError::Input(m)) => (json!({ "error": { "kind": "input", "message": m } }), 2),
        Err(CliError::Compute(e)) => (json!({ "error": { "kind": "compute", "message": e.to_string() } }), 1),
    };
    let mut out = json!({ "command": cli.cmd.name(), "config": cfg });
    out.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
    if let Err(e) = emit(cfg, &out) {
        eprintln!("cannot write output: {e}");
        return ExitCode::from(2);
    }
    if code != 0 {
        if let Some(Value::Object(err)) = out.get("error") {
            eprintln!("error: {}", err["message"].as_str().unwrap_or(""));
        }
    }
    ExitCode::from(code)
}
