//! Builtin structures resolved by name.
//!
//! Names carry their parameters after colons: `euclidean:3:psi=x1+x2`,
//! `heisenberg5:1,2`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::ControlSystem;

pub struct Builtin {
    pub pattern: &'static str,
    pub summary: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin { pattern: "euclidean:n[:psi=<expr>]", summary: "X_i = d_i on R^n, density exp(psi)" },
    Builtin { pattern: "sphere2", summary: "round unit sphere in the stereographic chart, Riemannian volume" },
    Builtin { pattern: "heisenberg3", summary: "X1 = d1 - (x2/2)d3, X2 = d2 + (x1/2)d3, density 1" },
    Builtin { pattern: "heisenberg5:a1,a2", summary: "two rotation blocks with rates a1, a2 feeding d5, density 1" },
    Builtin { pattern: "engel", summary: "X1 = d1, X2 = d2 + x1 d3 + (x1^2/2) d4, density 1" },
];

/// Largest chart accepted for `euclidean:n`.
const MAX_EUCLIDEAN: usize = 12;

pub fn builtin(descriptor: &str) -> Result<ControlSystem> {
    let descriptor = descriptor.trim();
    let (head, rest) = match descriptor.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (descriptor, None),
    };
    match head {
        "euclidean" => euclidean(descriptor, rest),
        "sphere2" => {
            no_params(descriptor, rest)?;
            let c = "(1+x1^2+x2^2)/2";
            ControlSystem::parse(descriptor, 2, &[], &[vec![c, "0"], vec!["0", c]], "0", "4/(1+x1^2+x2^2)^2")
        }
        "heisenberg3" => {
            no_params(descriptor, rest)?;
            ControlSystem::parse(descriptor, 3, &[], &[vec!["1", "0", "-x2/2"], vec!["0", "1", "x1/2"]], "0", "1")
        }
        "heisenberg5" => {
            let params = rest.ok_or_else(|| Error::BadParams(format!("{descriptor}: expected heisenberg5:a1,a2")))?;
            let rates: Vec<f64> = params
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<core::result::Result<_, _>>()
                .map_err(|_| Error::BadParams(format!("{descriptor}: rates must be numbers")))?;
            if rates.len() != 2 || rates.iter().any(|a| !a.is_finite() || *a == 0.0) {
                return Err(Error::BadParams(format!("{descriptor}: expected two non-zero finite rates")));
            }
            heisenberg5(descriptor, rates[0], rates[1])
        }
        "engel" => {
            no_params(descriptor, rest)?;
            ControlSystem::parse(descriptor, 4, &[], &[vec!["1", "0", "0", "0"], vec!["0", "1", "x1", "x1^2/2"]], "0", "1")
        }
        _ => Err(Error::UnknownBuiltin(descriptor.to_string())),
    }
}

fn no_params(descriptor: &str, rest: Option<&str>) -> Result<()> {
    match rest {
        None => Ok(()),
        Some(_) => Err(Error::BadParams(format!("{descriptor}: takes no parameters"))),
    }
}

fn euclidean(descriptor: &str, rest: Option<&str>) -> Result<ControlSystem> {
    let rest = rest.ok_or_else(|| Error::BadParams(format!("{descriptor}: expected euclidean:n")))?;
    let (dim, psi) = match rest.split_once(':') {
        Some((d, p)) => {
            let p = p
                .strip_prefix("psi=")
                .ok_or_else(|| Error::BadParams(format!("{descriptor}: expected psi=<expr> after the dimension")))?;
            (d, Some(p))
        }
        None => (rest, None),
    };
    let n: usize = dim.trim().parse().map_err(|_| Error::BadParams(format!("{descriptor}: bad dimension {dim:?}")))?;
    if n == 0 || n > MAX_EUCLIDEAN {
        return Err(Error::BadParams(format!("{descriptor}: dimension must be in 1..={MAX_EUCLIDEAN}")));
    }
    let frame: Vec<Vec<&str>> = (0..n).map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect()).collect();
    let density = match psi {
        Some(p) => format!("exp({p})"),
        None => "1".into(),
    };
    ControlSystem::parse(descriptor, n, &[], &frame, "0", &density)
}

fn heisenberg5(descriptor: &str, a1: f64, a2: f64) -> Result<ControlSystem> {
    let h1 = format!("{:?}", a1 / 2.0);
    let h2 = format!("{:?}", a2 / 2.0);
    let f1 = ["1".to_string(), "0".into(), "0".into(), "0".into(), format!("-({h1})*x2")];
    let f2 = ["0".to_string(), "1".into(), "0".into(), "0".into(), format!("({h1})*x1")];
    let f3 = ["0".to_string(), "0".into(), "1".into(), "0".into(), format!("-({h2})*x4")];
    let f4 = ["0".to_string(), "0".into(), "0".into(), "1".into(), format!("({h2})*x3")];
    let frame: Vec<Vec<&str>> = [&f1, &f2, &f3, &f4].iter().map(|f| f.iter().map(String::as_str).collect()).collect();
    ControlSystem::parse(descriptor, 5, &[], &frame, "0", "1")
}
