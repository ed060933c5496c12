//! EOP-GSAV/BDFk for incompressible Navier–Stokes on a periodic box.
//!
//! The pressure is eliminated by the Leray projector, so the velocity solve
//! is a componentwise diagonal system `(α + Δt ν|k|²)ū = rhs`.

use super::gsav::{correction, eop_gsav_update, gsav_scalar};
use super::{check_positive, BdfTable, Integrator, SchemeState, StepDiagnostics};
use crate::error::Result;
use crate::models::ModelSpec;
use crate::spectral::{
    divergence, inverse_laplacian, leray_project_spectra, ScalarField, ShiftedSystem, Spectrum, VectorField,
};

/// `(u·∇)u` per component, dealiased by the model rule.
pub fn advection(model: &ModelSpec, u: &VectorField) -> Vec<Spectrum> {
    let dim = u.components().len();
    (0..dim)
        .map(|i| {
            let ui = u.component(i).spectrum();
            let mut acc = ScalarField::zeros(u.grid());
            for j in 0..dim {
                let d = ui.derivative(j).to_field();
                let uj = u.component(j).values();
                for ((a, dv), w) in acc.values_mut().iter_mut().zip(d.values()).zip(uj) {
                    *a += w * dv;
                }
            }
            let mut s = acc.spectrum().clone();
            s.dealias(model.dealias());
            s
        })
        .collect()
}

/// Zero-mean `p` with `Δp = −∇·((u·∇)u)`.
pub fn recover_pressure(model: &ModelSpec, u: &VectorField) -> Result<ScalarField> {
    let n = advection(model, u);
    let mut p = inverse_laplacian(&divergence(&n)?);
    p.scale(-1.0);
    Ok(p.into_field())
}

/// Spectral L² norm of `∇·u`.
pub fn divergence_norm(u: &VectorField) -> Result<f64> {
    let spectra: Vec<Spectrum> = u.components().iter().map(|c| c.spectrum().clone()).collect();
    Ok(divergence(&spectra)?.norm_sqr().sqrt())
}

impl Integrator {
    pub(super) fn ns_step(&self, st: &mut SchemeState, dt: f64, order: usize) -> Result<StepDiagnostics> {
        let step = st.step_index + 1;
        let m = &self.model;
        let tab = BdfTable::new(order)?;
        let hist = &st.velocity[..order];
        let dim = m.grid().dim();
        let terms: Vec<(f64, &VectorField)> = tab.hat.iter().zip(hist).map(|(w, u)| (*w, u)).collect();
        let b = VectorField::combination(&terms);

        let mut explicit = advection(m, &b);
        for s in &mut explicit {
            s.scale(-1.0);
        }
        let f = self.vector_forcing(st.t + dt)?;
        if let Some(f) = &f {
            for (s, fc) in explicit.iter_mut().zip(f.components()) {
                s.axpy(1.0, fc.spectrum());
            }
        }
        let projected = leray_project_spectra(&explicit)?;
        let pf = match &f {
            Some(f) => {
                let spectra: Vec<Spectrum> = f.components().iter().map(|c| c.spectrum().clone()).collect();
                Some(leray_project_spectra(&spectra)?)
            }
            None => None,
        };

        let sys = ShiftedSystem::new(tab.alpha, dt, m.g(), m.l())?;
        let l = m.l().symbol();
        let mut bar = Vec::with_capacity(dim);
        for (i, proj) in projected.iter().enumerate() {
            let comp: Vec<&ScalarField> = hist.iter().map(|u| u.component(i)).collect();
            let ts: Vec<(f64, &Spectrum)> = tab.a.iter().zip(&comp).map(|(w, c)| (*w, c.spectrum())).collect();
            let mut rhs = Spectrum::combination(&ts);
            rhs.axpy(dt, proj);
            bar.push(sys.solve_spectrum(&rhs)?);
        }
        let dissipation = dt * bar.iter().map(|s| s.quadratic_form(l)).sum::<f64>();
        let work = pf.as_ref().map_or(0.0, |pf| dt * bar.iter().zip(pf).map(|(a, b)| a.inner(b)).sum::<f64>());
        let u_bar = VectorField::new(bar.into_iter().map(Spectrum::into_field).collect())?;
        let e_bar = m.kinetic_energy(&u_bar) + st.c0;
        check_positive(step, "½‖ū‖² + C₀", e_bar)?;

        let r_prev = st.r[0];
        let r_tilde = gsav_scalar(step, r_prev, e_bar, dissipation, work)?;
        let xi = r_tilde / e_bar;
        let p = self.config.exponent_override.unwrap_or(order as i32);
        let u = u_bar.scaled(correction(xi, p));
        let e_next = m.kinetic_energy(&u) + st.c0;
        let (r_next, branch) = eop_gsav_update(r_prev, e_next);
        let div = divergence_norm(&u)?;
        st.pressure = Some(recover_pressure(m, &u)?);
        st.push_vector(u, r_next, self.depth());
        Ok(StepDiagnostics {
            r_prev,
            r_tilde,
            xi: Some(xi),
            e_cap: Some(e_next),
            branch: Some(branch),
            dissipation,
            work,
            residual: r_tilde - r_prev + xi * (dissipation - work),
            divergence: Some(div),
            ..Default::default()
        })
    }
}
