//! `cpm` command-line front end.
//!
//! Every subcommand prints one JSON report (or a CSV trace with
//! `--output csv`). Exit codes: 0 success, 1 a property was refuted (the
//! `--expect` checks, gated runs on certified non-CP families, failed
//! cross-checks and unreproduced witnesses), 2 invalid input, 3 a numerical
//! procedure did not converge.

pub mod commands;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpm_core::family::Budget;
use cpm_core::gate::CpGate;
use cpm_core::ToleranceConfig;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cpm", version, about = "Convergence analysis of infinite and continuous matrix products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transversality table, LCP/RCP/CP verdicts and JSR bounds of a family.
    Analyze(AnalyzeArgs),
    /// Product over a finite schedule or the limit over a refinement generator.
    Product(ProductArgs),
    /// Products under successive insertions, explicit or random.
    Insert(InsertArgs),
    /// Integrals of a driving function against the prefix product.
    Integrate(IntegrateArgs),
    /// Built-in families and the three-block cross-check.
    Gadget(GadgetArgs),
    /// Re-checks the witnesses of an earlier report.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Cp,
    Lcp,
    Rcp,
    Tr,
}

#[derive(Debug, Args, Serialize)]
pub struct ToleranceArgs {
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, default_value_t = 1e-9)]
    pub rank_tol: f64,
    /// Cauchy / limit detection threshold.
    #[arg(long, default_value_t = 1e-10)]
    pub conv_tol: f64,
    /// Width of the unit-circle band for eigenvalue classification.
    #[arg(long, default_value_t = 1e-8)]
    pub eig_tol: f64,
}

impl ToleranceArgs {
    pub fn config(&self) -> anyhow::Result<ToleranceConfig> {
        Ok(ToleranceConfig::new(self.rank_tol, self.conv_tol, self.eig_tol)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BudgetArgs {
    /// Maximum word length for product enumeration and JSR bounds.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Random switching sequences sampled when no rule decides.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub trial_length: usize,
    #[arg(long, default_value_t = 256)]
    pub max_closure: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub node_budget: usize,
}

impl BudgetArgs {
    pub fn budget(&self) -> Budget {
        Budget {
            depth: self.depth,
            trials: self.trials,
            trial_length: self.trial_length,
            max_closure: self.max_closure,
            seed: self.seed,
            node_budget: self.node_budget,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GateArgs {
    /// Run even when the family is certified not CP.
    #[arg(long)]
    pub allow_refuted: bool,
    /// Skip the CP precondition check entirely.
    #[arg(long)]
    pub skip_cp_check: bool,
}

impl GateArgs {
    pub fn gate(&self, budget: Budget) -> CpGate {
        CpGate { budget, allow_refuted: self.allow_refuted, enabled: !self.skip_cp_check }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Also write the CSV trace to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    pub family: PathBuf,
    /// Exit with status 1 if this property is certified false.
    #[arg(long, value_enum)]
    pub expect: Vec<Property>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ProductArgs {
    pub family: PathBuf,
    /// Finite schedule `{"points": [[num, den, "label"], ...]}`.
    #[arg(long, conflicts_with = "generator", required_unless_present = "generator")]
    pub schedule: Option<PathBuf>,
    /// Generator directive, e.g. `{"kind": "alternating", ...}`.
    #[arg(long)]
    pub generator: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub max_level: usize,
    #[arg(long, default_value_t = 1 << 20)]
    pub max_points: usize,
    #[command(flatten)]
    pub gate: GateArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InsertArgs {
    pub family: PathBuf,
    /// Steps file `{"steps": [[position, "label"], ...]}` or `{"batches": ...}`.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub steps: Option<PathBuf>,
    /// Number of random insertion sequences.
    #[arg(long, requires = "length")]
    pub random: Option<usize>,
    /// Length of each random sequence.
    #[arg(long)]
    pub length: Option<usize>,
    #[command(flatten)]
    pub gate: GateArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct IntegrateArgs {
    pub family: PathBuf,
    /// Driven schedule: `points` or `generator`, plus `f`.
    pub driven: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub max_level: usize,
    #[command(flatten)]
    pub gate: GateArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct GadgetArgs {
    /// Gadget spec, e.g. `{"kind": "three_block", "M1": ..., "M2": ..., "M3": ...}`.
    pub spec: PathBuf,
    /// Write the built family to this file in the family format.
    #[arg(long)]
    pub emit_family: Option<PathBuf>,
    /// Insertion sequences used by the three-block cross-check.
    #[arg(long, default_value_t = 20)]
    pub sequences: usize,
    #[arg(long, default_value_t = 200)]
    pub length: usize,
    /// Required distance of the reduced-pair radius bounds from 1.
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub family: PathBuf,
    /// Report produced by `analyze` or `gadget`.
    pub report: PathBuf,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Captured result of one invocation.
#[derive(Debug)]
pub struct Execution {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn execute<I, S>(args: I) -> Execution
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => commands::run(&cli.command),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Execution { stdout: text, stderr: String::new(), code }
            } else {
                Execution { stdout: String::new(), stderr: text, code }
            }
        }
    }
}
