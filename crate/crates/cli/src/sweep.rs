//! Batch analysis over a covector list, one CSV row per input line.

use geoflow_core::ControlSystem;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{analyze, AnalysisReport, Depth};
use crate::options::{Thresholds, Tuning};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub covector: String,
    pub growth: String,
    #[serde(rename = "N")]
    pub geodesic_dimension: Option<usize>,
    pub rho: Option<f64>,
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
    #[serde(rename = "trR_fit")]
    pub tr_r_fit: Option<f64>,
    pub residual: Option<f64>,
    pub status: String,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

impl SweepRow {
    fn from_report(r: &AnalysisReport) -> SweepRow {
        SweepRow {
            covector: join(&r.covector),
            growth: join(&r.growth),
            geodesic_dimension: r.geodesic_dimension,
            rho: r.rho,
            c_fit: r.fit.as_ref().map(|f| f.c),
            tr_r_fit: r.fit.as_ref().map(|f| f.tr_r),
            residual: r.fit.as_ref().map(|f| f.residual),
            status: r.status.label().to_string(),
        }
    }
}

pub const HEADER: [&str; 8] = ["covector", "growth", "N", "rho", "C_fit", "trR_fit", "residual", "status"];

/// Rows in input order; the work runs on the current rayon pool.
pub fn sweep(sys: &ControlSystem, base: &[f64], covectors: &[Vec<f64>], tuning: &Tuning) -> Vec<(SweepRow, AnalysisReport)> {
    let thresholds = Thresholds::default();
    covectors
        .par_iter()
        .map(|p| {
            let report = analyze(sys, base, p, tuning, &thresholds, Depth::Row);
            (SweepRow::from_report(&report), report)
        })
        .collect()
}

pub fn to_csv(rows: &[SweepRow]) -> csv::Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}
