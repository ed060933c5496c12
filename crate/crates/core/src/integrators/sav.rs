//! SAV/BDFk, k = 1, 2.

use super::{check_positive, BdfTable, Integrator, SchemeState, StepDiagnostics};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::spectral::{ScalarField, ShiftedSystem, Spectrum};

/// `Σ w_i φ^{n−i}` in spectral space.
pub(crate) fn weighted_spectrum(weights: &[f64], hist: &[ScalarField]) -> Spectrum {
    let terms: Vec<(f64, &Spectrum)> = weights.iter().zip(hist).map(|(w, f)| (*w, f.spectrum())).collect();
    Spectrum::combination(&terms)
}

/// `Σ w_i φ^{n−i}` in real space.
pub(crate) fn weighted_field(weights: &[f64], hist: &[ScalarField]) -> ScalarField {
    let terms: Vec<(f64, &ScalarField)> = weights.iter().zip(hist).map(|(w, f)| (*w, f)).collect();
    ScalarField::combination(&terms)
}

/// Modified energy of SAV/BDFk before subtracting `C`.
///
/// k = 1: `½(Lφⁿ, φⁿ) + Rⁿ²`.
/// k = 2: `¼[(Lφⁿ, φⁿ) + (L(2φⁿ − φⁿ⁻¹), 2φⁿ − φⁿ⁻¹)] + ½[Rⁿ² + (2Rⁿ − Rⁿ⁻¹)²]`.
/// With one history entry the k = 2 form reduces to the k = 1 form.
pub(crate) fn sav_energy(model: &ModelSpec, k: usize, phi: &[ScalarField], r: &[f64]) -> f64 {
    let l = model.l().symbol();
    if k < 2 || phi.len() < 2 {
        return 0.5 * phi[0].spectrum().quadratic_form(l) + r[0] * r[0];
    }
    let ext = Spectrum::combination(&[(2.0, phi[0].spectrum()), (-1.0, phi[1].spectrum())]);
    let re = 2.0 * r[0] - r[1];
    0.25 * (phi[0].spectrum().quadratic_form(l) + ext.quadratic_form(l)) + 0.5 * (r[0] * r[0] + re * re)
}

impl Integrator {
    pub(super) fn sav_step(&self, st: &mut SchemeState, dt: f64, order: usize) -> Result<StepDiagnostics> {
        let step = st.step_index + 1;
        let m = &self.model;
        let tab = BdfTable::new(order)?;
        let hist = &st.phi[..order];
        let phi_hat = weighted_field(&tab.hat, hist);
        let e1_hat = self.shifted_nonlinear(&phi_hat);
        check_positive(step, "E₁(φ̂) + C", e1_hat)?;
        let b = m.f_prime_field(&phi_hat).scaled(1.0 / e1_hat.sqrt());
        let bs = b.spectrum();

        let sys = ShiftedSystem::new(tab.alpha, dt, m.g(), m.l())?;
        let a_phi = weighted_spectrum(&tab.a, hist);
        let f = self.scalar_forcing(st.t + dt)?;
        let mut rhs = a_phi.clone();
        if let Some(f) = &f {
            rhs.axpy(dt, f.spectrum());
        }
        let phi_a = sys.solve_spectrum(&rhs)?;
        let mut gb = bs.with_symbol(m.g().symbol());
        gb.scale(-dt);
        let phi_b = sys.solve_spectrum(&gb)?;

        // αR − A(R) = ½(b, αφ^{n+1} − A(φ)) with φ^{n+1} = φ_a + R φ_b.
        let coef = tab.alpha * (1.0 - 0.5 * bs.inner(&phi_b));
        if !(coef.abs() >= 1e-14 * tab.alpha) {
            return Err(Error::numerical(step, format!("singular scalar closure (coefficient {coef:e})")));
        }
        let drift = Spectrum::combination(&[(tab.alpha, &phi_a), (-1.0, &a_phi)]);
        let r_next = (tab.a_scalar(&st.r) + 0.5 * bs.inner(&drift)) / coef;
        let mut next = phi_a;
        next.axpy(r_next, &phi_b);

        let mut mu = next.with_symbol(m.l().symbol());
        mu.axpy(r_next, bs);
        let dissipation = dt * mu.quadratic_form(m.g().symbol());
        let work = f.as_ref().map_or(0.0, |f| dt * mu.inner(f.spectrum()));

        let l = m.l().symbol();
        let numerical = if order == 1 {
            let d = Spectrum::combination(&[(1.0, &next), (-1.0, st.phi[0].spectrum())]);
            let dr = r_next - st.r[0];
            0.5 * d.quadratic_form(l) + dr * dr
        } else {
            let d = Spectrum::combination(&[(1.0, &next), (-2.0, st.phi[0].spectrum()), (1.0, st.phi[1].spectrum())]);
            let dr = r_next - 2.0 * st.r[0] + st.r[1];
            0.25 * d.quadratic_form(l) + 0.5 * dr * dr
        };
        let before = sav_energy(m, order, &st.phi, &st.r);
        let r_prev = st.r[0];
        st.push_scalar(next.into_field(), r_next, self.depth());
        let after = sav_energy(m, order, &st.phi, &st.r);
        let e1 = self.shifted_nonlinear(&st.phi[0]);
        Ok(StepDiagnostics {
            r_prev,
            r_tilde: r_next,
            xi: (e1 > 0.0).then(|| r_next / e1.sqrt()),
            e_cap: (e1 >= 0.0).then(|| e1.sqrt()),
            dissipation,
            work,
            residual: after - before + numerical + dissipation - work,
            ..Default::default()
        })
    }
}
