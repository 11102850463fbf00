//! `hcopson`: characterization constants, best-constant estimates and
//! covering tables for the weighted iterated Copson-Hardy inequality.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure (the report is
//! still written, with the failures listed under `errors`).

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub use config::{Format, ProblemArgs, ProblemConfig, Sweep};
use output::{to_json, Rows};

pub const SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hardy_copson::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hcopson", version, about = "Weighted iterated Copson-Hardy inequality toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// All characterization constants and the regime's combined constant
    Conditions(ProblemArgs),
    /// Lower bound on the best constant by ratio maximization
    Estimate(ProblemArgs),
    /// Both sides of the inequality for one step function
    Evaluate(ProblemArgs),
    /// Dyadic covering sequence of u with its telescoping check
    Covering(ProblemArgs),
    /// Estimate against the combined constant, plus the block/supremum decomposition
    Verify(ProblemArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Conditions(_) => "conditions",
            Command::Estimate(_) => "estimate",
            Command::Evaluate(_) => "evaluate",
            Command::Covering(_) => "covering",
            Command::Verify(_) => "verify",
        }
    }

    fn args(&self) -> &ProblemArgs {
        match self {
            Command::Conditions(a)
            | Command::Estimate(a)
            | Command::Evaluate(a)
            | Command::Covering(a)
            | Command::Verify(a) => a,
        }
    }
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    schema: u32,
    command: &'a str,
    config: &'a ProblemConfig,
    result: Value,
    errors: Vec<String>,
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    schema: u32,
    command: &'a str,
    sweep: &'a Sweep,
    reports: Vec<Report<'a>>,
}

fn dispatch(name: &str, cfg: &ProblemConfig) -> Result<commands::Outcome, CliError> {
    cfg.validate()?;
    match name {
        "conditions" => commands::conditions(cfg),
        "estimate" => commands::estimate(cfg),
        "evaluate" => commands::evaluate(cfg),
        "covering" => commands::covering_table(cfg),
        _ => commands::verify(cfg),
    }
}

fn render(format: Format, json: String, rows: &Rows) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Json => {
            buf.extend_from_slice(json.as_bytes());
            buf.push(b'\n');
        }
        Format::Csv => rows.write_csv(&mut buf, true)?,
        Format::Table => rows.write_table(&mut buf)?,
    }
    Ok(buf)
}

/// Runs one parsed command; returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let name = cli.command.name();
    let args = cli.command.args();
    let base = ProblemConfig::from_args(args)?;

    let (bytes, failed) = if let Some(spec) = &args.sweep {
        let sweep = Sweep::parse(spec)?;
        let configs: Vec<ProblemConfig> = sweep.values.iter().map(|&x| sweep.apply(&base, x)).collect();
        let outcomes: Vec<commands::Outcome> =
            configs.par_iter().map(|c| dispatch(name, c)).collect::<Result<_, _>>()?;
        let failed = outcomes.iter().any(|o| o.numerical_failure);
        let mut all_rows = Rows::default();
        for (x, o) in sweep.values.iter().zip(&outcomes) {
            let rows = o.rows.clone().with_leading(&sweep.var, &output::num(*x));
            all_rows.header = rows.header;
            all_rows.rows.extend(rows.rows);
        }
        let reports = configs
            .iter()
            .zip(outcomes)
            .map(|(c, o)| Report { schema: SCHEMA, command: name, config: c, result: o.result, errors: o.errors })
            .collect();
        let json = to_json(&SweepReport { schema: SCHEMA, command: name, sweep: &sweep, reports });
        (render(base.output, json, &all_rows)?, failed)
    } else {
        let o = dispatch(name, &base)?;
        let failed = o.numerical_failure;
        let json = to_json(&Report { schema: SCHEMA, command: name, config: &base, result: o.result, errors: o.errors });
        (render(base.output, json, &o.rows)?, failed)
    };

    match &args.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => out.write_all(&bytes)?,
    }
    Ok(if failed { 3 } else { 0 })
}

/// Parses `argv` and runs; diagnostics go to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "hcopson: {e}");
            e.exit_code()
        }
    }
}
