//! Structures, points and covector lists from the command line and files.

use std::path::Path;

use geoflow_core::catalog;
use geoflow_core::expr;
use geoflow_core::geometry::{chart_vars, ControlSystem, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A structure declared in JSON. Either `builtin` names a catalog entry
/// (the other fields then override parts of it) or `dim` and `frame`
/// describe it from scratch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub frame: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub drift: Option<Vec<String>>,
    #[serde(default)]
    pub potential: Option<String>,
    #[serde(default)]
    pub density: Option<String>,
}

impl StructureFile {
    pub fn build(&self) -> Result<ControlSystem> {
        let sys = match (&self.builtin, self.dim, &self.frame) {
            (Some(b), None, None) => catalog::builtin(b)?,
            (None, Some(n), Some(frame)) => {
                let frame: Vec<Vec<&str>> = frame.iter().map(|f| f.iter().map(String::as_str).collect()).collect();
                let name = self.name.as_deref().unwrap_or("custom");
                ControlSystem::parse(name, n, &[], &frame, "0", "1")?
            }
            _ => return Err(CliError::Input("structure file needs either `builtin` or both `dim` and `frame`".into())),
        };
        let sys = apply_overrides(sys, self.drift.as_deref(), self.potential.as_deref(), self.density.as_deref())?;
        Ok(match &self.name {
            Some(n) => sys.with_name(n),
            None => sys,
        })
    }
}

fn parse_expr(text: &str, n: usize) -> Result<geoflow_core::Expr> {
    let names = chart_vars(n);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    expr::parse(text, &refs).map_err(|e| CliError::Input(format!("`{text}`: {e}")))
}

pub fn apply_overrides<S: AsRef<str>>(
    mut sys: ControlSystem,
    drift: Option<&[S]>,
    potential: Option<&str>,
    density: Option<&str>,
) -> Result<ControlSystem> {
    let n = sys.n();
    if drift.is_some() || potential.is_some() || density.is_some() {
        // Closed-form oracles keyed on builtin names no longer apply.
        sys = sys.with_name(&format!("custom({})", sys.name()));
    }
    if let Some(d) = drift {
        if d.len() != n {
            return Err(CliError::Input(format!("drift has {} components, the chart has {n}", d.len())));
        }
        let comps = d.iter().map(|c| parse_expr(c.as_ref(), n)).collect::<Result<Vec<_>>>()?;
        sys = sys.with_drift(VectorField::new(comps))?;
    }
    if let Some(q) = potential {
        sys = sys.with_potential(parse_expr(q, n)?)?;
    }
    if let Some(m) = density {
        sys = sys.with_density(parse_expr(m, n)?)?;
    }
    Ok(sys)
}

/// Resolve a structure from a catalog name or a JSON file.
pub fn load_structure(name: Option<&str>, file: Option<&Path>) -> Result<ControlSystem> {
    match (name, file) {
        (Some(n), None) => Ok(catalog::builtin(n)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let decl: StructureFile =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            decl.build()
        }
        (Some(_), Some(_)) => Err(CliError::Usage("give a structure name or --file, not both".into())),
        (None, None) => Err(CliError::Usage("a structure name or --file is required".into())),
    }
}

/// Comma-separated floats.
pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Input(format!("`{s}` is not a finite number")))
        })
        .collect()
}

pub fn expect_dim(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(CliError::Input(format!("{what} has {} entries, the chart has {n}", v.len())))
    }
}

/// One covector per non-blank line; `#` starts a comment.
pub fn parse_covector_list(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then(|| parse_point(line).map_err(|e| CliError::Input(format!("line {}: {e}", i + 1))))
        })
        .collect()
}
