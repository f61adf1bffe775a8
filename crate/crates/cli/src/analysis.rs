//! The analysis pipeline behind `analyze` and `sweep`.

use geoflow_core::asymptotics;
use geoflow_core::exact;
use geoflow_core::flag;
use geoflow_core::hamiltonian::{self, PhasePoint};
use geoflow_core::rho;
use geoflow_core::{ControlSystem, Error as CoreError};
use serde::{Deserialize, Serialize};

use crate::error::is_structural;
use crate::options::{Thresholds, Tuning};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    NonAmple,
    NonEquiregular,
    NumericalFailure,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NonAmple | Status::NonEquiregular => 2,
            Status::NumericalFailure | Status::CheckFailed => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NonAmple => "non-ample",
            Status::NonEquiregular => "non-equiregular",
            Status::NumericalFailure => "numerical-failure",
            Status::CheckFailed => "check-failed",
        }
    }
}

/// An exact rational with its nearest float alongside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalValue {
    pub exact: String,
    pub float: f64,
}

impl RationalValue {
    pub fn new(r: &exact::Rational) -> RationalValue {
        RationalValue { exact: exact::render(r), float: exact::to_f64(r) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoFlowReport {
    pub rho: f64,
    pub log_c: f64,
    pub residual: f64,
    pub degree: usize,
    pub window: [f64; 2],
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub c: f64,
    pub log_c: f64,
    pub c_relative_error: f64,
    pub tr_r: f64,
    pub cubic: f64,
    pub residual: f64,
    pub window: [f64; 2],
    pub samples: usize,
    /// `|tr ℛ(full window) − tr ℛ(half window)|`.
    pub tr_r_window_change: Option<f64>,
}

impl From<&asymptotics::ExpansionFit> for FitReport {
    fn from(fit: &asymptotics::ExpansionFit) -> FitReport {
        FitReport::new(fit, None)
    }
}

impl FitReport {
    fn new(fit: &asymptotics::ExpansionFit, change: Option<f64>) -> FitReport {
        FitReport {
            c: fit.c,
            log_c: fit.log_c,
            c_relative_error: fit.c_relative_error(),
            tr_r: fit.tr_r,
            cubic: fit.cubic,
            residual: fit.residual,
            window: [fit.window.0, fit.window.1],
            samples: fit.samples,
            tr_r_window_change: change,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: &str, expected: f64, actual: f64, error: f64, tolerance: f64) -> OracleCheck {
        OracleCheck { name: name.into(), expected, actual, error, tolerance, passed: error <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub structure: String,
    pub dimension: usize,
    pub rank: usize,
    pub base: Vec<f64>,
    pub covector: Vec<f64>,
    pub energy: f64,
    pub growth: Vec<usize>,
    /// Growth vectors at a tenth of, at, and ten times the rank tolerance.
    pub growth_decades: Vec<Vec<usize>>,
    pub increments: Vec<usize>,
    pub ample: bool,
    pub equiregular: Option<bool>,
    pub young_rows: Option<Vec<usize>>,
    pub geodesic_dimension: Option<usize>,
    pub homogeneous_weight: Option<usize>,
    pub c_exact: Option<RationalValue>,
    pub rho: Option<f64>,
    pub rho_flow: Option<RhoFlowReport>,
    pub exponent_probe: Option<f64>,
    pub fit: Option<FitReport>,
    pub oracles: Vec<OracleCheck>,
    pub diagnostics: Vec<String>,
    pub status: Status,
    pub passed: bool,
}

/// `analyze` runs every applicable oracle; `sweep` only what fills its row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Full,
    Row,
}

struct Run<'a> {
    sys: &'a ControlSystem,
    lambda: PhasePoint,
    tuning: &'a Tuning,
    thresholds: &'a Thresholds,
    report: AnalysisReport,
}

/// Stops the pipeline; the status is already recorded.
struct Halt;

impl Run<'_> {
    fn fail(&mut self, stage: &str, e: CoreError) -> Halt {
        self.report.status = match e {
            CoreError::NotAmple(_) | CoreError::ZeroTangent => Status::NonAmple,
            ref e if is_structural(e) => Status::NonEquiregular,
            _ => Status::NumericalFailure,
        };
        self.report.diagnostics.push(format!("{stage}: {e}"));
        Halt
    }

    fn check(&mut self, c: OracleCheck) {
        self.report.oracles.push(c);
    }

    fn stages(&mut self, depth: Depth) -> Result<(), Halt> {
        let flag_opts = self.tuning.flag();
        let f = flag::flag_at_point(self.sys, &self.lambda, &flag_opts).map_err(|e| self.fail("flag", e))?;
        let r = &mut self.report;
        r.growth = f.growth.clone();
        r.growth_decades = f.decades.to_vec();
        r.increments = f.increments.clone();
        r.ample = f.ample;
        if f.decades.iter().any(|g| g != &f.growth) {
            r.diagnostics.push(format!("flag rank depends on the tolerance decade: {:?}", f.decades));
        }
        if !f.ample {
            r.status = Status::NonAmple;
            r.diagnostics.push(format!("geodesic is not ample; growth vector {:?}", f.growth));
            return Err(Halt);
        }
        if !f.increments_decrease() {
            r.diagnostics.push(format!("increments {:?} are not non-increasing", f.increments));
        }
        let window = self.tuning.window_hi;
        let eq = flag::equiregular_on(self.sys, &self.lambda, window, self.tuning.equiregular_samples, &flag_opts)
            .map_err(|e| self.fail("equiregularity", e))?;
        let r = &mut self.report;
        r.equiregular = Some(eq.equiregular);
        if !eq.equiregular {
            r.status = Status::NonEquiregular;
            r.diagnostics.push(format!("growth changes on [0, {window}]: {:?} at t = {:?}", eq.growths, eq.times));
            return Err(Halt);
        }
        let young = flag::young_diagram(&f).map_err(|e| self.fail("young diagram", e))?;
        let c_exact = flag::leading_constant(&young);
        let r = &mut self.report;
        r.young_rows = Some(young.rows.clone());
        r.geodesic_dimension = Some(f.geodesic_dimension());
        r.homogeneous_weight = Some(f.homogeneous_weight());
        r.c_exact = Some(RationalValue::new(&c_exact));

        let rho_opts = self.tuning.rho();
        let rho = rho::rho(self.sys, &self.lambda, &rho_opts).map_err(|e| self.fail("rho", e))?;
        self.report.rho = Some(rho);

        let exp_opts = self.tuning.expansion();
        let fit = if depth == Depth::Full {
            let w = asymptotics::window_check(self.sys, &self.lambda, &exp_opts).map_err(|e| self.fail("expansion fit", e))?;
            if !w.passed {
                self.report.diagnostics.push(format!(
                    "halving the fit window moves tr R by {:e} (from {} to {})",
                    w.tr_r_change, w.full.tr_r, w.half.tr_r
                ));
            }
            self.report.fit = Some(FitReport::new(&w.full, Some(w.tr_r_change)));
            w.full
        } else {
            let fit = asymptotics::fit_expansion(self.sys, &self.lambda, &exp_opts).map_err(|e| self.fail("expansion fit", e))?;
            self.report.fit = Some(FitReport::new(&fit, None));
            fit
        };
        if let Some(d) = &fit.diagnostic {
            self.report.diagnostics.push(format!("expansion fit: {d}"));
        }
        if depth == Depth::Row {
            return Ok(());
        }

        let c_exact_f = exact::to_f64(&c_exact);
        self.check(OracleCheck::new("leading_constant", c_exact_f, fit.c, fit.c_relative_error(), self.thresholds.c_tol));

        match rho::rho_flow(self.sys, &self.lambda, &rho_opts) {
            Ok(flow) => {
                self.report.rho_flow = Some(RhoFlowReport {
                    rho: flow.rho,
                    log_c: flow.log_c,
                    residual: flow.residual,
                    degree: rho_opts.flow_degree,
                    window: [flow.window.0, flow.window.1],
                    samples: flow.samples,
                });
                self.check(OracleCheck::new("rho_two_paths", rho, flow.rho, (rho - flow.rho).abs(), self.thresholds.rho_tol));
            }
            Err(e) => return Err(self.fail("rho_flow", e)),
        }

        let nn = f.geodesic_dimension() as f64;
        let probe = asymptotics::exponent_probe(self.sys, &self.lambda, self.tuning.tol).map_err(|e| self.fail("exponent probe", e))?;
        self.report.exponent_probe = Some(probe);
        self.check(OracleCheck::new("exponent_probe", nn, probe, (probe - nn).abs(), self.thresholds.probe_tol * nn));

        if let Some(ric) = asymptotics::ricci_oracle(self.sys.name(), self.sys, &self.lambda) {
            self.check(OracleCheck::new("ricci", ric, fit.tr_r, (fit.tr_r - ric).abs(), self.thresholds.ricci_tol));
        }

        if self.sys.k() == self.sys.n() {
            let d = rho::riemannian_divergence_check(self.sys, &self.lambda, &rho_opts).map_err(|e| self.fail("divergence", e))?;
            self.check(OracleCheck::new("riemannian_divergence", d.difference, d.rho, d.error, self.thresholds.divergence_tol));
        }

        if self.sys.is_sub_riemannian() && rho::contact_data(self.sys, &self.lambda.x).is_ok() {
            let times: Vec<f64> = (0..=30).map(|i| 0.01 * i as f64).collect();
            let samples = rho::contact_check(self.sys, &self.lambda, &times, &flag_opts).map_err(|e| self.fail("contact oracle", e))?;
            let worst = samples.iter().max_by(|a, b| (a.g_rel - a.oracle).abs().total_cmp(&(b.g_rel - b.oracle).abs())).expect("samples");
            self.check(OracleCheck::new("contact_volume", worst.oracle, worst.g_rel, (worst.g_rel - worst.oracle).abs(), self.thresholds.contact_tol));
        }

        if self.sys.is_sub_riemannian() {
            let s = rho::scaling_checks(self.sys, &self.lambda, 2.0, &[0.05, 0.1], &rho_opts).map_err(|e| self.fail("dilation", e))?;
            self.check(OracleCheck::new("dilation_rho", 2.0 * s.rho, s.rho_scaled, s.rho_error, s.rho_tol));
            let worst = s.g_pairs.iter().max_by(|a, b| (a.1 - a.2).abs().total_cmp(&(b.1 - b.2).abs())).expect("pairs");
            self.check(OracleCheck::new("dilation_g", worst.2, worst.1, s.g_error, s.g_tol));
        }
        Ok(())
    }
}

/// Run the pipeline for one covector. Never fails: problems are recorded in
/// the report's status and diagnostics.
pub fn analyze(
    sys: &ControlSystem,
    base: &[f64],
    covector: &[f64],
    tuning: &Tuning,
    thresholds: &Thresholds,
    depth: Depth,
) -> AnalysisReport {
    let lambda = PhasePoint::new(base.to_vec(), covector.to_vec());
    let report = AnalysisReport {
        structure: sys.name().to_string(),
        dimension: sys.n(),
        rank: sys.k(),
        base: base.to_vec(),
        covector: covector.to_vec(),
        energy: hamiltonian::energy(sys, &lambda),
        growth: Vec::new(),
        growth_decades: Vec::new(),
        increments: Vec::new(),
        ample: false,
        equiregular: None,
        young_rows: None,
        geodesic_dimension: None,
        homogeneous_weight: None,
        c_exact: None,
        rho: None,
        rho_flow: None,
        exponent_probe: None,
        fit: None,
        oracles: Vec::new(),
        diagnostics: Vec::new(),
        status: Status::Ok,
        passed: false,
    };
    let mut run = Run { sys, lambda, tuning, thresholds, report };
    if run.stages(depth).is_ok() && run.report.oracles.iter().any(|c| !c.passed) {
        run.report.status = Status::CheckFailed;
    }
    run.report.passed = run.report.status == Status::Ok;
    run.report
}
