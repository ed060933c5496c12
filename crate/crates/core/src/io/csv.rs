//! Energy-record CSV with exact round trips (`{:.16e}`, LF endings).

use std::fmt::Write as _;
use std::path::Path;

use crate::audit::{Comparison, DiagnosticTag, EnergyRecord};
use crate::error::{Error, Result};
use crate::harness::OrderEstimate;

pub const ENERGY_HEADER: &str = "step,t,E_original,E_modified,R,diagnostic_tag,diagnostic_value,dissipation_residual";

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

pub fn format_energy_csv(records: &[EnergyRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(ENERGY_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},", r.step);
        for v in [r.t, r.e_original, r.e_modified, r.r] {
            num(&mut out, v);
            out.push(',');
        }
        out.push_str(r.tag.name());
        out.push(',');
        num(&mut out, r.diagnostic);
        out.push(',');
        num(&mut out, r.dissipation_residual);
        out.push('\n');
    }
    out
}

pub fn write_energy_csv(records: &[EnergyRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Config("no records to write".into()));
    }
    std::fs::write(path, format_energy_csv(records)).map_err(|e| Error::io(path, e))
}

fn bad(message: String) -> Error {
    Error::Format { what: "energy csv", message }
}

pub fn parse_energy_csv(text: &str) -> Result<Vec<EnergyRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ENERGY_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(bad(format!("row {} has {} columns", i + 1, cols.len())));
            }
            let f = |j: usize| -> Result<f64> {
                cols[j].parse::<f64>().map_err(|_| bad(format!("row {}: bad number {:?}", i + 1, cols[j])))
            };
            let tag = DiagnosticTag::parse(cols[5])
                .ok_or_else(|| bad(format!("row {}: unknown tag {:?}", i + 1, cols[5])))?;
            let diagnostic = f(6)?;
            Ok(EnergyRecord {
                step: cols[0].parse().map_err(|_| bad(format!("row {}: bad step {:?}", i + 1, cols[0])))?,
                t: f(1)?,
                e_original: f(2)?,
                e_modified: f(3)?,
                r: f(4)?,
                tag,
                diagnostic,
                dissipation_residual: f(7)?,
                branch: if i == 0 { None } else { tag.implied_branch(diagnostic) },
            })
        })
        .collect()
}

pub fn read_energy_csv(path: &Path) -> Result<Vec<EnergyRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_energy_csv(&text)
}

/// `t` followed by one diagnostic column per run.
pub fn format_comparison_csv(c: &Comparison) -> String {
    let mut out = String::from("t");
    for (label, tag) in c.labels.iter().zip(&c.tags) {
        let _ = write!(out, ",{label}:{tag}");
    }
    out.push('\n');
    for (i, t) in c.t.iter().enumerate() {
        num(&mut out, *t);
        for col in &c.diagnostics {
            out.push(',');
            num(&mut out, col[i]);
        }
        out.push('\n');
    }
    out
}

/// `t` followed by one modified-energy column per run.
pub fn format_comparison_energy_csv(c: &Comparison) -> String {
    let mut out = String::from("t");
    for label in &c.labels {
        let _ = write!(out, ",{label}:E_modified");
    }
    out.push('\n');
    for (i, t) in c.t.iter().enumerate() {
        num(&mut out, *t);
        for col in &c.energies {
            out.push(',');
            num(&mut out, col[i]);
        }
        out.push('\n');
    }
    out
}

/// `dt,error,pairwise_order`; the last row has an empty order.
pub fn format_convergence_csv(o: &OrderEstimate) -> String {
    let mut out = String::from("dt,error,pairwise_order\n");
    for (i, (dt, e)) in o.dt.iter().zip(&o.errors).enumerate() {
        num(&mut out, *dt);
        out.push(',');
        num(&mut out, *e);
        out.push(',');
        if let Some(p) = o.pairwise.get(i) {
            num(&mut out, *p);
        }
        out.push('\n');
    }
    out
}
