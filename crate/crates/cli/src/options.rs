//! Numerical knobs shared by the subcommands. Defaults are the ones the
//! core modules use.

use clap::Args;
use geoflow_core::asymptotics::ExpansionOptions;
use geoflow_core::flag::FlagOptions;
use geoflow_core::rho::RhoOptions;

#[derive(Clone, Debug, Args)]
pub struct Tuning {
    /// Integration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Relative SVD threshold for flag ranks.
    #[arg(long, default_value_t = 1e-9)]
    pub rank_tol: f64,
    /// Taylor order of the admissible extension (default: chart dimension).
    #[arg(long)]
    pub order: Option<usize>,
    /// Finite-difference step for ρ.
    #[arg(long, default_value_t = 1e-3)]
    pub rho_step: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub flow_window_lo: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub flow_window_hi: f64,
    #[arg(long, default_value_t = 24)]
    pub flow_samples: usize,
    /// Polynomial degree of the flow-based ρ fit.
    #[arg(long, default_value_t = 8)]
    pub flow_degree: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub flow_max_residual: f64,
    /// Expansion fit window.
    #[arg(long, default_value_t = 1e-2)]
    pub window_lo: f64,
    #[arg(long, default_value_t = 2e-1)]
    pub window_hi: f64,
    #[arg(long, default_value_t = 24)]
    pub samples: usize,
    /// Simpson nodes for ∫ρ.
    #[arg(long, default_value_t = 33)]
    pub rho_nodes: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub residual_per_sample: f64,
    /// Sample count for the equiregularity scan over the fit window.
    #[arg(long, default_value_t = 5)]
    pub equiregular_samples: usize,
}

impl Default for Tuning {
    fn default() -> Tuning {
        let e = ExpansionOptions::default();
        Tuning {
            tol: e.rho.flag.tol,
            rank_tol: e.rho.flag.rank_tol,
            order: None,
            rho_step: e.rho.step,
            flow_window_lo: e.rho.flow_window.0,
            flow_window_hi: e.rho.flow_window.1,
            flow_samples: e.rho.flow_samples,
            flow_degree: e.rho.flow_degree,
            flow_max_residual: e.rho.flow_max_residual,
            window_lo: e.window.0,
            window_hi: e.window.1,
            samples: e.samples,
            rho_nodes: e.rho_nodes,
            residual_per_sample: e.residual_per_sample,
            equiregular_samples: 5,
        }
    }
}

impl Tuning {
    pub fn flag(&self) -> FlagOptions {
        FlagOptions { rank_tol: self.rank_tol, order: self.order, tol: self.tol, ..FlagOptions::default() }
    }

    pub fn rho(&self) -> RhoOptions {
        RhoOptions {
            step: self.rho_step,
            flag: self.flag(),
            flow_window: (self.flow_window_lo, self.flow_window_hi),
            flow_samples: self.flow_samples,
            flow_degree: self.flow_degree,
            flow_max_residual: self.flow_max_residual,
        }
    }

    pub fn expansion(&self) -> ExpansionOptions {
        ExpansionOptions {
            window: (self.window_lo, self.window_hi),
            samples: self.samples,
            rho_nodes: self.rho_nodes,
            residual_per_sample: self.residual_per_sample,
            rho: self.rho(),
        }
    }
}

/// Pass/fail thresholds for the oracle comparisons in `analyze`.
#[derive(Clone, Debug, Args)]
pub struct Thresholds {
    /// Relative tolerance of fitted C against the exact constant.
    #[arg(long, default_value_t = 1e-3)]
    pub c_tol: f64,
    /// Absolute tolerance between the two ρ paths.
    #[arg(long, default_value_t = 1e-5)]
    pub rho_tol: f64,
    /// Relative tolerance of the exponent probe against 𝒩.
    #[arg(long, default_value_t = 1e-2)]
    pub probe_tol: f64,
    /// Absolute tolerance of fitted tr ℛ against a closed-form Ricci value.
    #[arg(long, default_value_t = 1e-2)]
    pub ricci_tol: f64,
    /// Absolute tolerance of the contact-volume oracle.
    #[arg(long, default_value_t = 1e-6)]
    pub contact_tol: f64,
    /// Absolute tolerance of the Riemannian divergence formula.
    #[arg(long, default_value_t = 1e-5)]
    pub divergence_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds { c_tol: 1e-3, rho_tol: 1e-5, probe_tol: 1e-2, ricci_tol: 1e-2, contact_tol: 1e-6, divergence_tol: 1e-5 }
    }
}
