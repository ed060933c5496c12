//! Per-step energy records and the dissipation checks run over them.

use std::fmt;

use crate::error::{Error, Result};
use crate::integrators::{sav_energy, Branch, Integrator, SchemeKind, SchemeState};

/// What the `diagnostic` column of a record holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticTag {
    /// RSAV / R-GSAV relaxation parameter `λ₀`.
    Lambda0,
    /// EOP-SAV `ℰ₁(φ^{n+1}) − |s^{n+1}|²`.
    E1MinusS2,
    /// EOP-GSAV `ℰ(φ^{n+1}) − Rⁿ`.
    EMinusRPrev,
    /// `ξ^{n+1} − 1`.
    XiMinusOne,
}

impl DiagnosticTag {
    pub const ALL: [DiagnosticTag; 4] =
        [DiagnosticTag::Lambda0, DiagnosticTag::E1MinusS2, DiagnosticTag::EMinusRPrev, DiagnosticTag::XiMinusOne];

    pub fn for_scheme(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::Sav | SchemeKind::Gsav => DiagnosticTag::XiMinusOne,
            SchemeKind::RsavCn | SchemeKind::Rgsav => DiagnosticTag::Lambda0,
            SchemeKind::EopSavCn => DiagnosticTag::E1MinusS2,
            SchemeKind::EopGsav | SchemeKind::NsEopGsav => DiagnosticTag::EMinusRPrev,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DiagnosticTag::Lambda0 => "lambda0",
            DiagnosticTag::E1MinusS2 => "e1_minus_s2",
            DiagnosticTag::EMinusRPrev => "e_minus_r_prev",
            DiagnosticTag::XiMinusOne => "xi_minus_one",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Branch implied by the sign of an EOP diagnostic.
    pub fn implied_branch(self, value: f64) -> Option<Branch> {
        match self {
            DiagnosticTag::E1MinusS2 => Some(if value < 0.0 { Branch::Original } else { Branch::Modified }),
            DiagnosticTag::EMinusRPrev => Some(if value <= 0.0 { Branch::Original } else { Branch::Modified }),
            _ => None,
        }
    }
}

impl fmt::Display for DiagnosticTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One audited step.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyRecord {
    pub step: usize,
    pub t: f64,
    pub e_original: f64,
    pub e_modified: f64,
    pub r: f64,
    pub tag: DiagnosticTag,
    pub diagnostic: f64,
    pub dissipation_residual: f64,
    /// Min-rule branch of EOP schemes. Not serialized; rebuilt from the
    /// diagnostic sign when reading CSV.
    pub branch: Option<Branch>,
}

/// Modified energy the scheme dissipates, evaluated on the current state.
///
/// When an EOP min rule took the original-energy branch this is the
/// original energy itself, computed by the same expression.
pub fn modified_energy(integrator: &Integrator, st: &SchemeState) -> f64 {
    let model = integrator.model();
    let kind = integrator.kind();
    let original_branch = st.last().and_then(|d| d.branch) == Some(Branch::Original);
    if kind.is_eop() && original_branch {
        return integrator.original_energy(st);
    }
    match kind {
        SchemeKind::Sav => sav_energy(model, integrator.config().k, st.phi_history(), st.r_history()) - model.c_shift(),
        SchemeKind::RsavCn | SchemeKind::EopSavCn => {
            let phi = &st.phi_history()[0];
            model.quadratic_energy(phi) + st.r() * st.r() - model.c_shift()
        }
        _ => st.r() - st.c0(),
    }
}

/// Record for the state before any step.
pub fn initial_record(integrator: &Integrator, st: &SchemeState) -> EnergyRecord {
    EnergyRecord {
        step: st.step_index(),
        t: st.t(),
        e_original: integrator.original_energy(st),
        e_modified: modified_energy(integrator, st),
        r: st.r(),
        tag: DiagnosticTag::for_scheme(integrator.kind()),
        diagnostic: 0.0,
        dissipation_residual: 0.0,
        branch: None,
    }
}

/// Record for the step that produced `st`.
pub fn audit_step(integrator: &Integrator, st: &SchemeState) -> EnergyRecord {
    let mut rec = initial_record(integrator, st);
    let Some(d) = st.last() else {
        return rec;
    };
    rec.diagnostic = match rec.tag {
        DiagnosticTag::Lambda0 => d.lambda0.unwrap_or(f64::NAN),
        DiagnosticTag::E1MinusS2 => {
            let s = d.s.unwrap_or(f64::NAN);
            integrator.shifted_nonlinear(&st.phi_history()[0]) - s * s
        }
        DiagnosticTag::EMinusRPrev => d.e_cap.unwrap_or(f64::NAN) - d.r_prev,
        DiagnosticTag::XiMinusOne => d.xi.unwrap_or(f64::NAN) - 1.0,
    };
    rec.dissipation_residual = d.residual;
    rec.branch = d.branch;
    rec
}

/// A failed check.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub step: usize,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {} ({})", self.step, self.check, self.detail)
    }
}

/// Relative tolerance with the absolute floor `1e−12`.
pub fn allowance(tol: f64, scale: f64) -> f64 {
    (tol * scale.abs()).max(1e-12)
}

/// `E_modified` non-increasing along the stream.
pub fn check_monotone(records: &[EnergyRecord], tol: f64) -> Vec<Violation> {
    records
        .windows(2)
        .filter_map(|w| {
            let rise = w[1].e_modified - w[0].e_modified;
            (rise > allowance(tol, w[0].e_modified)).then(|| Violation {
                step: w[1].step,
                check: "modified energy increased",
                detail: format!("{:e} -> {:e} (+{rise:e})", w[0].e_modified, w[1].e_modified),
            })
        })
        .collect()
}

/// `E_modified ≤ E_original` on every record.
pub fn check_cap(records: &[EnergyRecord], tol: f64) -> Vec<Violation> {
    records
        .iter()
        .filter_map(|r| {
            let excess = r.e_modified - r.e_original;
            (excess > tol * (1.0 + r.e_original.abs())).then(|| Violation {
                step: r.step,
                check: "modified energy above original",
                detail: format!("excess {excess:e}"),
            })
        })
        .collect()
}

/// Branch flags agree with the sign of the EOP diagnostic, and the
/// original branch makes both energies identical.
pub fn check_branches(records: &[EnergyRecord]) -> Vec<Violation> {
    let mut out = Vec::new();
    for r in records {
        let Some(branch) = r.branch else { continue };
        if let Some(implied) = r.tag.implied_branch(r.diagnostic) {
            if implied != branch {
                out.push(Violation {
                    step: r.step,
                    check: "branch disagrees with diagnostic",
                    detail: format!("{} with {} = {:e}", branch.name(), r.tag, r.diagnostic),
                });
            }
        }
        if branch == Branch::Original && r.e_modified != r.e_original {
            out.push(Violation {
                step: r.step,
                check: "original branch with distinct energies",
                detail: format!("{:e} vs {:e}", r.e_modified, r.e_original),
            });
        }
    }
    out
}

/// Monotone plus, for EOP schemes, cap and branch checks.
pub fn check_run(kind: SchemeKind, records: &[EnergyRecord], tol: f64) -> Vec<Violation> {
    let mut out = check_monotone(records, tol);
    if kind.is_eop() {
        out.extend(check_cap(records, tol));
        out.extend(check_branches(records));
    }
    out.sort_by_key(|v| v.step);
    out
}

/// Side-by-side view of several runs on the same step grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub t: Vec<f64>,
    /// Diagnostic value per run (outer) and step (inner).
    pub diagnostics: Vec<Vec<f64>>,
    pub tags: Vec<DiagnosticTag>,
    /// `E_modified` per run and step.
    pub energies: Vec<Vec<f64>>,
    /// `max |E_modified − E_modified(run 0)|` per run.
    pub max_energy_diff: Vec<f64>,
    /// `max |diagnostic − diagnostic(run 0)|` per run.
    pub max_diagnostic_diff: Vec<f64>,
}

pub fn compare_runs(runs: &[(String, Vec<EnergyRecord>)]) -> Result<Comparison> {
    let Some((_, first)) = runs.first() else {
        return Err(Error::Config("nothing to compare".into()));
    };
    for (label, recs) in runs {
        if recs.len() != first.len() {
            return Err(Error::Config(format!("run {label} has {} records, expected {}", recs.len(), first.len())));
        }
        for (a, b) in recs.iter().zip(first) {
            if (a.t - b.t).abs() > 1e-12 * (1.0 + b.t.abs()) {
                return Err(Error::Config(format!("run {label} is on a different step grid at step {}", a.step)));
            }
        }
    }
    let col = |f: fn(&EnergyRecord) -> f64| -> Vec<Vec<f64>> {
        runs.iter().map(|(_, recs)| recs.iter().map(f).collect()).collect()
    };
    let diagnostics = col(|r| r.diagnostic);
    let energies = col(|r| r.e_modified);
    let max_diff = |cols: &[Vec<f64>]| -> Vec<f64> {
        cols.iter().map(|c| c.iter().zip(&cols[0]).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))).collect()
    };
    Ok(Comparison {
        labels: runs.iter().map(|(l, _)| l.clone()).collect(),
        t: first.iter().map(|r| r.t).collect(),
        tags: runs.iter().map(|(_, recs)| recs.first().map_or(DiagnosticTag::XiMinusOne, |r| r.tag)).collect(),
        max_energy_diff: max_diff(&energies),
        max_diagnostic_diff: max_diff(&diagnostics),
        diagnostics,
        energies,
    })
}
