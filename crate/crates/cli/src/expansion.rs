//! The `(t, r, h, model)` table of an expansion fit.

use geoflow_core::asymptotics::ExpansionFit;
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    t: f64,
    r: f64,
    h: f64,
    model: f64,
}

pub fn to_csv(fit: &ExpansionFit) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &fit.rows {
        w.serialize(Row { t: row.t, r: row.r, h: row.h, model: row.model })?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}
