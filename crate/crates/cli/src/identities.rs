//! The exact binomial and Hilbert identities as a pass/fail table.

use geoflow_core::exact::{self, rat, Rational};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRow {
    pub identity: &'static str,
    pub range: String,
    pub passed: bool,
    /// First failing parameter, if any.
    pub failure: Option<String>,
}

fn row(identity: &'static str, range: String, params: Vec<Vec<usize>>, holds: impl Fn(&[usize]) -> bool + Sync) -> IdentityRow {
    let failure = params.par_iter().find_first(|p| !holds(p)).map(|p| format!("{p:?}"));
    IdentityRow { identity, range, passed: failure.is_none(), failure }
}

fn span(lo: usize, hi: usize) -> Vec<Vec<usize>> {
    (lo..=hi).map(|n| vec![n]).collect()
}

fn factorial_ratio(n: usize) -> Rational {
    let f = exact::factorial(n as u64 - 1);
    Rational::new(&f * &f, exact::factorial(2 * n as u64 - 2) * exact::factorial(2 * n as u64 - 1))
}

/// Every identity for `n` up to `nmax`.
pub fn verify(nmax: usize) -> Vec<IdentityRow> {
    let nmax = nmax.max(2);
    let mut rows = vec![
        row("det N = prod j!/prod j!", format!("1..={nmax}"), span(1, nmax), |p| exact::det_nhat(p[0]) == exact::det_formula(p[0])),
        row("det N(n)/det N(n-1)", format!("2..={nmax}"), span(2, nmax), |p| {
            exact::det_nhat(p[0]) / exact::det_nhat(p[0] - 1) == factorial_ratio(p[0])
        }),
        row("N^-1 closed form = elimination", format!("1..={nmax}"), span(1, nmax), |p| {
            Some(exact::nhat_inverse_closed(p[0])) == exact::nhat(p[0]).inverse_gauss_jordan()
        }),
        row("tr(N^-1 G) = n/(2(4n^2-1))", format!("1..={nmax}"), span(1, nmax), |p| {
            let (lhs, rhs) = exact::trace_identity(p[0]);
            lhs == rhs
        }),
        row("first alternating binomial sum = 1/2", format!("2..={nmax}"), span(2, nmax), |p| exact::comb_identity_a(p[0]) == rat(1, 2)),
        row("second alternating binomial sum = 1/2", format!("2..={nmax}"), span(2, nmax), |p| exact::comb_identity_b(p[0]) == rat(1, 2)),
    ];
    let grid: Vec<Vec<usize>> = (1..=nmax).flat_map(|n| (1..=nmax).map(move |k| vec![n, k])).collect();
    rows.push(row("b0 alternating sum", format!("n, k in 1..={nmax}"), grid, |p| {
        let (lhs, rhs) = exact::b0_identity(p[0], p[1]);
        lhs == rhs
    }));
    rows.push(row("Hilbert inverse closed form = elimination", format!("1..={nmax}"), span(1, nmax), |p| {
        let (a, b) = exact::classical_hilbert_params(p[0]);
        let (Ok(h), Ok(closed)) = (exact::hilbert(&a, &b), exact::hilbert_inverse(&a, &b)) else { return false };
        match h.inverse_gauss_jordan() {
            Some(inv) => inv.row_sums() == closed.row_sums && inv == closed.inverse,
            None => false,
        }
    }));
    rows
}

pub fn render_table(rows: &[IdentityRow]) -> String {
    let width = rows.iter().map(|r| r.identity.len()).max().unwrap_or(8).max(8);
    let rw = rows.iter().map(|r| r.range.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:<rw$}  status\n", "identity", "range");
    for r in rows {
        let status = match &r.failure {
            None => "PASS".to_string(),
            Some(p) => format!("FAIL at {p}"),
        };
        out += &format!("{:<width$}  {:<rw$}  {status}\n", r.identity, r.range);
    }
    out
}
