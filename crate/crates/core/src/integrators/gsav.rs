//! GSAV/BDFk, R-GSAV and EOP-GSAV for gradient flows.

use super::sav::{weighted_field, weighted_spectrum};
use super::{check_positive, BdfTable, Branch, Integrator, Relaxation, SchemeKind, SchemeState, StepDiagnostics};
use crate::error::{Error, Result};
use crate::spectral::ShiftedSystem;

/// `R^{n+1} = min{Rⁿ, ℰ(φ^{n+1})}`.
pub fn eop_gsav_update(r_prev: f64, e_next: f64) -> (f64, Branch) {
    if e_next <= r_prev {
        (e_next, Branch::Original)
    } else {
        (r_prev, Branch::Modified)
    }
}

/// Relaxed GSAV: smallest `λ ∈ [0, 1]` with `R − R̃ ≤ budget` for
/// `R = λR̃ + (1 − λ)ℰ(φ^{n+1})`, where `budget = ηΔt ξ (Gμ, μ)`.
pub fn rgsav_relax(r_tilde: f64, e_next: f64, budget: f64) -> Relaxation {
    let gap = e_next - r_tilde;
    let lambda0 = if gap <= budget { 0.0 } else { (1.0 - budget / gap).clamp(0.0, 1.0) };
    Relaxation { r: lambda0 * r_tilde + (1.0 - lambda0) * e_next, lambda0, fallback: false }
}

/// `R̃^{n+1} = Rⁿ / (1 + Δt((Gμ, μ) − (μ, f))/ℰ̄)`, the closed form of
/// `(R̃ − Rⁿ)/Δt = −(R̃/ℰ̄)((Gμ, μ) − (μ, f))`.
pub(crate) fn gsav_scalar(step: usize, r_prev: f64, e_bar: f64, dt_dissipation: f64, dt_work: f64) -> Result<f64> {
    let den = 1.0 + (dt_dissipation - dt_work) / e_bar;
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::numerical(step, format!("nonpositive GSAV denominator {den:e}")));
    }
    Ok(r_prev / den)
}

/// `1 − (1 − ξ)^p`.
pub(crate) fn correction(xi: f64, p: i32) -> f64 {
    1.0 - (1.0 - xi).powi(p)
}

impl Integrator {
    pub(super) fn gsav_step(&self, st: &mut SchemeState, dt: f64, order: usize) -> Result<StepDiagnostics> {
        let step = st.step_index + 1;
        let m = &self.model;
        let tab = BdfTable::new(order)?;
        let hist = &st.phi[..order];
        let phi_hat = weighted_field(&tab.hat, hist);
        let fp = m.f_prime_field(&phi_hat);
        let g = m.g().symbol();
        let l = m.l().symbol();

        let mut rhs = weighted_spectrum(&tab.a, hist);
        rhs.axpy(-dt, &fp.spectrum().with_symbol(g));
        let f = self.scalar_forcing(st.t + dt)?;
        if let Some(f) = &f {
            rhs.axpy(dt, f.spectrum());
        }
        let sys = ShiftedSystem::new(tab.alpha, dt, m.g(), m.l())?;
        let bar = sys.solve_spectrum(&rhs)?;
        let mut mu = bar.with_symbol(l);
        mu.axpy(1.0, fp.spectrum());
        let dissipation = dt * mu.quadratic_form(g);
        let work = f.as_ref().map_or(0.0, |f| dt * mu.inner(f.spectrum()));
        let phi_bar = bar.into_field();
        let e_bar = m.total_energy(&phi_bar) + st.c0;
        check_positive(step, "E(φ̄) + C₀", e_bar)?;

        let r_prev = st.r[0];
        let r_tilde = gsav_scalar(step, r_prev, e_bar, dissipation, work)?;
        let xi = r_tilde / e_bar;
        let p = self.config.exponent_override.unwrap_or(order as i32 + 1);
        let phi_next = phi_bar.scaled(correction(xi, p));
        let e_next = m.total_energy(&phi_next) + st.c0;

        let mut diag = StepDiagnostics {
            r_prev,
            r_tilde,
            xi: Some(xi),
            dissipation,
            work,
            residual: r_tilde - r_prev + xi * (dissipation - work),
            e_cap: Some(e_next),
            ..Default::default()
        };
        let r_next = match self.kind() {
            SchemeKind::Gsav => r_tilde,
            SchemeKind::Rgsav => {
                let rel = rgsav_relax(r_tilde, e_next, self.config.eta * xi * dissipation);
                diag.lambda0 = Some(rel.lambda0);
                rel.r
            }
            _ => {
                let (r, branch) = eop_gsav_update(r_prev, e_next);
                diag.branch = Some(branch);
                r
            }
        };
        st.push_scalar(phi_next, r_next, self.depth());
        Ok(diag)
    }
}
