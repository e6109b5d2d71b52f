//! Library behind the `qslab` binary.
//!
//! Exit statuses: 0 success, 1 I/O failure, 2 invalid scenario or usage,
//! 3 blow-up guard, 4 failed certificate under `--strict`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod experiments;
pub mod run;
pub mod scenario;
pub mod settings;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{CertKind, Cli, Command};
use run::{run_all, OutputDir, RunOutcome};
use scenario::{from_settings, preset, Check};
use settings::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_CERT_FAILED: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Invalid(String),
    BlowUp(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::BlowUp(_) => EXIT_BLOW_UP,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid scenario: {m}"),
            CliError::BlowUp(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qslab_core::Error> for CliError {
    fn from(e: qslab_core::Error) -> Self {
        match e {
            qslab_core::Error::BlowUp { .. } => CliError::BlowUp(e.to_string()),
            qslab_core::Error::Csv(_) => CliError::Io(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// Parses `argv`, runs the command, prints the report to `out` and
/// diagnostics to `err`, and returns the process exit status.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    match execute(&cli, &OutputDir::from_env()) {
        Ok((outcome, strict)) => {
            for line in &outcome.lines {
                let _ = writeln!(out, "{line}");
            }
            for p in &outcome.csv {
                let _ = writeln!(out, "CSV {}", p.display());
            }
            if strict && outcome.failures > 0 {
                let _ = writeln!(err, "{} certificate(s) failed", outcome.failures);
                EXIT_CERT_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; the flag says whether `--strict` was in effect.
pub fn execute(cli: &Cli, out: &OutputDir) -> Result<(RunOutcome, bool), CliError> {
    let s = Settings::resolve(&cli.common)?;
    let outcome = match &cli.command {
        Command::Simulate { model } => {
            let name = format!("simulate_{}", format!("{model:?}").to_lowercase());
            run_all(&[from_settings(&name, *model, &s, vec![])?], out)?
        }
        Command::Certify { kind } => {
            let check = match kind {
                CertKind::Symmetric => Check::SymmetricCertificates,
                CertKind::Asymmetric => Check::AsymmetricCertificates { eta: s.eta },
                CertKind::Ratio => Check::RatioCertificate { eta: s.eta, cap: s.cap.unwrap_or(f64::INFINITY) },
            };
            let defaults = Settings { delta: s.delta.or(default_delta(*kind)), ..s.clone() };
            let name = format!("certify_{}", format!("{kind:?}").to_lowercase());
            run_all(&[from_settings(&name, args::ModelKind::Reduced, &defaults, vec![check])?], out)?
        }
        Command::ManifoldResidual => experiments::manifold_residual_scan(&s, out)?,
        Command::Perturb { action } => experiments::perturb(*action, &s, out)?,
        Command::Preset { name } => run_all(&preset(*name, &s)?, out)?,
    };
    Ok((outcome, s.strict))
}

/// `δ` used by `certify` when none is given.
fn default_delta(kind: CertKind) -> Option<f64> {
    match kind {
        CertKind::Symmetric => Some(1.0),
        CertKind::Asymmetric | CertKind::Ratio => Some(0.95),
    }
}
