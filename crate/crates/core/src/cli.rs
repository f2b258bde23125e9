//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classifier::analyze;
use crate::differential::build_presentation;
use crate::error::{Error, InStage, Stage, StageError};
use crate::report::{full_report, gr_k2_table, render_gr_table, render_omega, render_text, ReportOptions};
use crate::smith::module_structure;
use crate::tower::{Tower, TowerSpec};

#[derive(Debug, Parser)]
#[command(name = "cdvf", version, about = "Differentials, type and ramification bounds of complete discrete valuation fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Override the document's p-adic precision
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(16..))]
    pub precision: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type I / type II verdict with a witness
    Classify { file: PathBuf },
    /// Structure of the completed differential module
    Omega { file: PathBuf },
    /// Full report: thresholds, Miki, refinements, graded table
    Report {
        file: PathBuf,
        /// Milnor K-degree used in the rendered statements
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        m_max: Option<u32>,
    },
    /// gr_m K_2 table for the family pi^p = p*t
    GrTable {
        file: PathBuf,
        #[arg(long)]
        m_max: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code: 1, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let file = match &cli.command {
        Command::Classify { file }
        | Command::Omega { file }
        | Command::Report { file, .. }
        | Command::GrTable { file, .. } => file,
    };
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            return Outcome {
                code: 1,
                stdout: String::new(),
                stderr: format!("error: cannot read {}: {e}\n", file.display()),
            }
        }
    };
    match execute(cli, &text) {
        Ok(stdout) => Outcome::ok(stdout),
        Err(err) => {
            let mut stderr = format!("error: {err}\n");
            if matches!(err.error, Error::PrecisionExhausted(_)) {
                stderr.push_str("hint: rerun with a larger --precision\n");
            }
            Outcome { code: err.exit_code(), stdout: String::new(), stderr }
        }
    }
}

fn load(text: &str, precision: Option<u32>) -> Result<Tower, StageError> {
    let mut spec = TowerSpec::parse(text).in_stage(Stage::Tower)?;
    if let Some(n) = precision {
        spec = spec.with_precision(n);
    }
    spec.build().in_stage(Stage::Tower)
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) -> String {
    let mut out = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("report types serialize"),
        Format::Text => text(value),
    };
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

fn execute(cli: &Cli, text: &str) -> Result<String, StageError> {
    let tower = load(text, cli.precision)?;
    let out = match &cli.command {
        Command::Classify { .. } => {
            let verdict = analyze(&tower)?.verdict;
            emit(cli.format, &verdict, ToString::to_string)
        }
        Command::Omega { .. } => {
            let pres = build_presentation(&tower).in_stage(Stage::Differential)?;
            let omega = module_structure(&tower, &pres).in_stage(Stage::Smith)?;
            emit(cli.format, &omega, render_omega)
        }
        Command::Report { q, m_max, .. } => {
            let report = full_report(&tower, ReportOptions { q: *q, m_max: *m_max })?;
            emit(cli.format, &report, render_text)
        }
        Command::GrTable { m_max, .. } => {
            let m_max = m_max.unwrap_or(3 * tower.prime() as u32 + 1);
            let table = gr_k2_table(&tower, m_max).in_stage(Stage::Report)?;
            emit(cli.format, &table, render_gr_table)
        }
    };
    Ok(out)
}
