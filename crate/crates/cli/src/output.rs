use hermfd::convergence::{ConvergenceReport, Field, PointwiseRate};
use hermfd::DiscreteSolution;
use serde::Serialize;

use crate::config::Format;
use crate::CliError;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>, summary: &[(&str, String)]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mut out = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    for (k, v) in summary {
        out.extend_from_slice(format!("# {k} = {v}\n").as_bytes());
    }
    Ok(out)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct SolveSummary {
    d4_norm_h: f64,
    rcond: f64,
}

#[derive(Serialize)]
struct SolveJson<'a> {
    problem: &'a str,
    n: usize,
    x: Vec<f64>,
    u: &'a [f64],
    p: &'a [f64],
    d2: &'a [f64],
    d3: &'a [f64],
    d4: &'a [f64],
    summary: SolveSummary,
}

pub fn solution(problem: &str, sol: &DiscreteSolution, format: Format) -> Result<Vec<u8>, CliError> {
    let grid = *sol.u.grid();
    let n = grid.n();
    let d4_norm_h = sol.d4.norm_h();
    match format {
        Format::Csv => {
            let rows = (0..=n).map(|j| {
                std::iter::once(grid.x(j)).chain((0..5).map(|k| sol.field(k)[j])).map(num).collect()
            });
            let summary = [
                ("problem", problem.to_string()),
                ("n", n.to_string()),
                ("d4_norm_h", num(d4_norm_h)),
                ("rcond", num(sol.rcond)),
            ];
            csv_table(&["x", "u", "p", "d2", "d3", "d4"], rows, &summary)
        }
        Format::Json => json(&SolveJson {
            problem,
            n,
            x: (0..=n).map(|j| grid.x(j)).collect(),
            u: sol.u.values(),
            p: sol.p.values(),
            d2: sol.d2.values(),
            d3: sol.d3.values(),
            d4: sol.d4.values(),
            summary: SolveSummary { d4_norm_h, rcond: sol.rcond },
        }),
    }
}

/// Long-format error table: one row per field, norm and mesh, with the rate
/// from the previous mesh.
pub fn report(report: &ConvergenceReport, format: Format) -> Result<Vec<u8>, CliError> {
    if format == Format::Json {
        return json(report);
    }
    let ns = report.ns();
    let mut rows = Vec::new();
    for field in Field::ALL {
        for norm in ["h", "sup"] {
            for (i, &n) in ns.iter().enumerate() {
                let Some(e) = report.error(field, n) else { continue };
                let rate = (i > 0)
                    .then(|| report.rate(field, ns[i - 1], n))
                    .flatten()
                    .and_then(|r| if norm == "h" { r.rate_h } else { r.rate_sup });
                let err = if norm == "h" { e.norm_h } else { e.norm_sup };
                rows.push(vec![field.to_string(), norm.to_string(), n.to_string(), num(err), opt(rate)]);
            }
        }
    }
    let kind = serde_json::to_value(report.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    let span = format!("{:?}", report.span).to_lowercase();
    let summary = [("problem", report.problem.clone()), ("kind", kind), ("span", span)];
    csv_table(&["field", "norm", "n", "error", "rate"], rows, &summary)
}

pub fn pointwise(rates: &[PointwiseRate], format: Format) -> Result<Vec<u8>, CliError> {
    if format == Format::Json {
        return json(&rates);
    }
    let rows = rates.iter().map(|r| {
        vec![r.n_coarse.to_string(), r.n_fine.to_string(), r.j.to_string(), num(r.x), r.field.to_string(), opt(r.slope)]
    });
    csv_table(&["n_coarse", "n_fine", "j", "x", "field", "slope"], rows, &[])
}
