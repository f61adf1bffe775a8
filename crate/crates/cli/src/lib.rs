//! Command-line front end: catalog lookup, input files, the analysis
//! pipeline and report emission.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod identities;
pub mod input;
pub mod json;
pub mod options;
pub mod sweep;

use std::io::Write;
use std::path::Path;

use geoflow_core::asymptotics;
use geoflow_core::catalog;
use geoflow_core::flag;
use geoflow_core::hamiltonian::PhasePoint;
use geoflow_core::ControlSystem;

use crate::analysis::{analyze, Depth};
use crate::cli::{Command, StructureArgs};
use crate::error::{CliError, Result};

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "GEOFLOW_THREADS";

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn structure(args: &StructureArgs) -> Result<ControlSystem> {
    let sys = input::load_structure(args.name.as_deref(), args.file.as_deref())?;
    let drift: Option<Vec<&str>> = args.drift.as_deref().map(|d| d.split(',').map(str::trim).collect());
    input::apply_overrides(sys, drift.as_deref(), args.potential.as_deref(), args.density.as_deref())
}

fn base_point(text: Option<&str>, n: usize) -> Result<Vec<f64>> {
    let base = match text {
        Some(t) => input::parse_point(t)?,
        None => vec![0.0; n],
    };
    input::expect_dim("base point", &base, n)?;
    Ok(base)
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

/// Run one command; the returned value is the process exit code.
pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Analyze { structure: s, point, tuning, thresholds, out } => {
            let sys = structure(&s)?;
            let base = base_point(point.base.as_deref(), sys.n())?;
            let covector = input::parse_point(&point.covector)?;
            input::expect_dim("covector", &covector, sys.n())?;
            let report = analyze(&sys, &base, &covector, &tuning, &thresholds, Depth::Full);
            let text = json::to_string(&report).map_err(|e| CliError::Numerical(format!("report: {e}")))?;
            emit(out.as_deref(), &text)?;
            for d in &report.diagnostics {
                eprintln!("diagnostic: {d}");
            }
            Ok(report.status.exit_code())
        }
        Command::Sweep { structure: s, base, covectors, tuning, out } => {
            let sys = structure(&s)?;
            let base = base_point(base.as_deref(), sys.n())?;
            let list = input::parse_covector_list(&std::fs::read_to_string(&covectors)?)?;
            for (i, p) in list.iter().enumerate() {
                input::expect_dim(&format!("covector on data line {}", i + 1), p, sys.n())?;
            }
            let pool = pool()?;
            if !list.is_empty() {
                // Build the symbolic caches once so the workers only read them.
                flag::warm_caches(&sys, tuning.order.unwrap_or(sys.n()), sys.n() - 1);
            }
            let rows = pool.install(|| sweep::sweep(&sys, &base, &list, &tuning));
            for (row, report) in &rows {
                for d in &report.diagnostics {
                    eprintln!("[{}] {d}", row.covector);
                }
            }
            let rows: Vec<_> = rows.into_iter().map(|(r, _)| r).collect();
            let text = sweep::to_csv(&rows).map_err(|e| CliError::Numerical(format!("csv: {e}")))?;
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Expansion { structure: s, point, tuning, out, report } => {
            let sys = structure(&s)?;
            let base = base_point(point.base.as_deref(), sys.n())?;
            let covector = input::parse_point(&point.covector)?;
            input::expect_dim("covector", &covector, sys.n())?;
            let lambda = PhasePoint::new(base, covector);
            let fit = asymptotics::fit_expansion(&sys, &lambda, &tuning.expansion())?;
            if let Some(d) = &fit.diagnostic {
                eprintln!("diagnostic: {d}");
            }
            let text = expansion::to_csv(&fit).map_err(|e| CliError::Numerical(format!("csv: {e}")))?;
            emit(out.as_deref(), &text)?;
            if let Some(path) = report {
                let summary = analysis::FitReport::from(&fit);
                let text = json::to_string(&summary).map_err(|e| CliError::Numerical(format!("report: {e}")))?;
                std::fs::write(path, text)?;
            }
            Ok(0)
        }
        Command::VerifyIdentities { nmax, json: as_json, out } => {
            let pool = pool()?;
            let rows = pool.install(|| identities::verify(nmax));
            let text = if as_json {
                json::to_string(&rows).map_err(|e| CliError::Numerical(format!("report: {e}")))?
            } else {
                identities::render_table(&rows)
            };
            emit(out.as_deref(), &text)?;
            Ok(if rows.iter().all(|r| r.passed) { 0 } else { 3 })
        }
        Command::ListBuiltins => {
            let width = catalog::BUILTINS.iter().map(|b| b.pattern.len()).max().unwrap_or(0);
            let text: String = catalog::BUILTINS.iter().map(|b| format!("{:<width$}  {}\n", b.pattern, b.summary)).collect();
            emit(None, &text)?;
            Ok(0)
        }
    }
}
