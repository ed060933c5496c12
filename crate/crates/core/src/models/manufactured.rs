//! Closed-form exact solutions and the forcing that makes them exact.
//!
//! Phase-field models use `φ = exp(g) sin t` with `g = sin πx sin πy`.
//! With `P = |∇g|²` and `Q = Δg = −2π²g`:
//!
//! - `Δ e^{cg} = e^{cg} h_c`, `h_c = c²P + cQ`
//! - `Δ² e^{g} = e^{g} (h₁² + 2∇g·∇h₁ + Δh₁)`
//! - `P = (π²/2)(1 − cos2πx cos2πy)`, `∇g·∇h_c = c²∇g·∇P − 2π²cP`
//! - `Δh_c = 4π⁴c² cos2πx cos2πy − 2π²cQ`
//!
//! Navier–Stokes uses `u = π e^{sin πx + sin πy} (cos πy, −cos πx) sin²t` and
//! `p = e^{cos πx sin πy} sin²t`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::spectral::{PeriodicGrid, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactSolution {
    /// `exp(sin πx sin πy) sin t` for Allen–Cahn and Cahn–Hilliard.
    PhaseField,
    /// The velocity/pressure pair for Navier–Stokes.
    NavierStokes,
}

struct Geometry {
    g: f64,
    p: f64,
    q: f64,
    grad_g_dot_grad_p: f64,
    c2c2: f64,
}

impl Geometry {
    fn at(x: &[f64]) -> Self {
        let (a, b) = (PI * x[0], PI * x[1]);
        let (sx, cx, sy, cy) = (a.sin(), a.cos(), b.sin(), b.cos());
        let c2c2 = (2.0 * a).cos() * (2.0 * b).cos();
        let g = sx * sy;
        let pi2 = PI * PI;
        Geometry {
            g,
            p: 0.5 * pi2 * (1.0 - c2c2),
            q: -2.0 * pi2 * g,
            grad_g_dot_grad_p: pi2
                * pi2
                * (cx * sy * (2.0 * a).sin() * (2.0 * b).cos() + sx * cy * (2.0 * a).cos() * (2.0 * b).sin()),
            c2c2,
        }
    }

    fn h(&self, c: f64) -> f64 {
        c * c * self.p + c * self.q
    }

    /// `Δ e^{cg}`.
    fn lap_exp(&self, c: f64) -> f64 {
        (c * self.g).exp() * self.h(c)
    }

    /// `Δ² e^{g}`.
    fn bilap_exp(&self) -> f64 {
        let h = self.h(1.0);
        let grad_g_dot_grad_h = self.grad_g_dot_grad_p - 2.0 * PI * PI * self.p;
        let lap_h = 4.0 * PI.powi(4) * self.c2c2 - 2.0 * PI * PI * self.q;
        self.g.exp() * (h * h + 2.0 * grad_g_dot_grad_h + lap_h)
    }
}

fn ns_velocity_at(x: &[f64], t: f64) -> [f64; 2] {
    let (a, b) = (PI * x[0], PI * x[1]);
    let e = (a.sin() + b.sin()).exp();
    let s = t.sin().powi(2);
    [PI * e * b.cos() * s, -PI * e * a.cos() * s]
}

fn ns_pressure_at(x: &[f64], t: f64) -> f64 {
    ((PI * x[0]).cos() * (PI * x[1]).sin()).exp() * t.sin().powi(2)
}

impl ExactSolution {
    pub fn for_model(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::AllenCahn | ModelKind::CahnHilliard => Ok(ExactSolution::PhaseField),
            ModelKind::NavierStokes => Ok(ExactSolution::NavierStokes),
            ModelKind::Pfc => Err(Error::Unsupported("no manufactured solution for pfc".into())),
        }
    }

    fn check_grid(grid: &PeriodicGrid) -> Result<()> {
        if grid.dim() != 2 {
            return Err(Error::Unsupported("manufactured solutions are two-dimensional".into()));
        }
        Ok(())
    }

    /// Exact `φ(·, t)`.
    pub fn phi(&self, grid: &Arc<PeriodicGrid>, t: f64) -> Result<ScalarField> {
        Self::check_grid(grid)?;
        if *self != ExactSolution::PhaseField {
            return Err(Error::Unsupported("scalar exact solution requested for navier_stokes".into()));
        }
        let s = t.sin();
        Ok(ScalarField::from_fn(grid, move |x| ((PI * x[0]).sin() * (PI * x[1]).sin()).exp() * s))
    }

    /// Exact `u(·, t)`.
    pub fn velocity(&self, grid: &Arc<PeriodicGrid>, t: f64) -> Result<VectorField> {
        Self::check_grid(grid)?;
        if *self != ExactSolution::NavierStokes {
            return Err(Error::Unsupported("velocity requested for a phase-field solution".into()));
        }
        let u1 = ScalarField::from_fn(grid, move |x| ns_velocity_at(x, t)[0]);
        let u2 = ScalarField::from_fn(grid, move |x| ns_velocity_at(x, t)[1]);
        VectorField::new(vec![u1, u2])
    }

    /// Exact `p(·, t)` (not mean-free).
    pub fn pressure(&self, grid: &Arc<PeriodicGrid>, t: f64) -> Result<ScalarField> {
        Self::check_grid(grid)?;
        Ok(ScalarField::from_fn(grid, move |x| ns_pressure_at(x, t)))
    }

    /// `f = φ_t + Gμ(φ)` evaluated analytically.
    pub fn scalar_forcing(&self, model: &ModelSpec, t: f64) -> Result<ScalarField> {
        Self::check_grid(model.grid())?;
        let p = *model.params();
        let (s, ct) = (t.sin(), t.cos());
        match model.kind() {
            ModelKind::AllenCahn => Ok(ScalarField::from_fn(model.grid(), move |x| {
                let geo = Geometry::at(x);
                let e = geo.g.exp();
                let phi = e * s;
                let mu = -p.alpha0 * s * geo.lap_exp(1.0) + phi * phi * phi - phi;
                e * ct + p.mobility * mu
            })),
            ModelKind::CahnHilliard => Ok(ScalarField::from_fn(model.grid(), move |x| {
                let geo = Geometry::at(x);
                let lap_cubic = s * s * s * geo.lap_exp(3.0);
                let lap_phi = s * geo.lap_exp(1.0);
                let bilap_phi = s * geo.bilap_exp();
                let eps2 = p.epsilon * p.epsilon;
                geo.g.exp() * ct + p.mobility * p.alpha0 * bilap_phi - p.mobility / eps2 * (lap_cubic - lap_phi)
            })),
            other => Err(Error::Unsupported(format!("no scalar manufactured forcing for {}", other.name()))),
        }
    }

    /// `f = u_t − νΔu + (u·∇)u + ∇p` evaluated analytically.
    pub fn vector_forcing(&self, model: &ModelSpec, t: f64) -> Result<VectorField> {
        Self::check_grid(model.grid())?;
        if model.kind() != ModelKind::NavierStokes {
            return Err(Error::Unsupported("vector forcing needs navier_stokes".into()));
        }
        let nu = model.params().nu;
        let (s2, ds2) = (t.sin().powi(2), (2.0 * t).sin());
        let pi2 = PI * PI;
        let pi3 = pi2 * PI;
        let comp = move |x: &[f64]| -> [f64; 2] {
            let (a, b) = (PI * x[0], PI * x[1]);
            let (sx, cx, sy, cy) = (a.sin(), a.cos(), b.sin(), b.cos());
            let e = (sx + sy).exp();
            let u1 = PI * e * cy * s2;
            let u2 = -PI * e * cx * s2;
            let lap_u1 = pi3 * cy * (cx * cx - sx + cy * cy - 3.0 * sy - 1.0) * e * s2;
            let lap_u2 = -pi3 * cx * (cy * cy - sy + cx * cx - 3.0 * sx - 1.0) * e * s2;
            let du1_dx = pi2 * e * cx * cy * s2;
            let du1_dy = pi2 * e * (cy * cy - sy) * s2;
            let du2_dx = -pi2 * e * (cx * cx - sx) * s2;
            let du2_dy = -pi2 * e * cx * cy * s2;
            let ep = (cx * sy).exp();
            let dp_dx = -PI * sx * sy * ep * s2;
            let dp_dy = PI * cx * cy * ep * s2;
            [
                PI * e * cy * ds2 - nu * lap_u1 + u1 * du1_dx + u2 * du1_dy + dp_dx,
                -PI * e * cx * ds2 - nu * lap_u2 + u1 * du2_dx + u2 * du2_dy + dp_dy,
            ]
        };
        let f1 = ScalarField::from_fn(model.grid(), move |x| comp(x)[0]);
        let f2 = ScalarField::from_fn(model.grid(), move |x| comp(x)[1]);
        VectorField::new(vec![f1, f2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelParams;
    use crate::spectral::{DiagonalOperator, Spectrum};

    fn grid(n: usize) -> Arc<PeriodicGrid> {
        PeriodicGrid::new(2, &[2.0, 2.0], &[n, n]).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn allen_cahn_forcing_at_time_zero_is_time_derivative() {
        let g = grid(32);
        let m = ModelSpec::new(ModelKind::AllenCahn, &g, ModelParams::default()).unwrap();
        let f = ExactSolution::PhaseField.scalar_forcing(&m, 0.0).unwrap();
        let expect = ScalarField::from_fn(&g, |x| ((PI * x[0]).sin() * (PI * x[1]).sin()).exp());
        assert!(max_diff(&f, &expect) < 1e-14);
    }

    #[test]
    fn navier_stokes_forcing_vanishes_at_time_zero() {
        let g = grid(32);
        let m = ModelSpec::new(ModelKind::NavierStokes, &g, ModelParams::default()).unwrap();
        let f = ExactSolution::NavierStokes.vector_forcing(&m, 0.0).unwrap();
        assert!(f.components().iter().all(|c| c.max_abs() == 0.0));
    }

    // Spectral oracle: the exact solution is entire, so 64² modes resolve its
    // derivatives to near machine precision.
    fn spectral_forcing(m: &ModelSpec, t: f64, dt: f64) -> ScalarField {
        let exact = ExactSolution::PhaseField;
        let g = m.grid();
        let phi = exact.phi(g, t).unwrap();
        let phi_t = ScalarField::combination(&[
            (0.5 / dt, &exact.phi(g, t + dt).unwrap()),
            (-0.5 / dt, &exact.phi(g, t - dt).unwrap()),
        ]);
        let mu = m.chemical_potential(&phi);
        let gmu = m.g().apply(&mu).unwrap();
        ScalarField::combination(&[(1.0, &phi_t), (1.0, &gmu)])
    }

    #[test]
    fn allen_cahn_forcing_matches_spectral_oracle() {
        let g = grid(64);
        let p = ModelParams { alpha0: 0.3, mobility: 0.7, ..Default::default() };
        let m = ModelSpec::new(ModelKind::AllenCahn, &g, p).unwrap();
        let t = 0.8;
        let f = ExactSolution::PhaseField.scalar_forcing(&m, t).unwrap();
        let oracle = spectral_forcing(&m, t, 1e-4);
        assert!(max_diff(&f, &oracle) < 1e-6, "{}", max_diff(&f, &oracle));
    }

    #[test]
    fn cahn_hilliard_forcing_matches_spectral_oracle() {
        let g = grid(64);
        let p = ModelParams { alpha0: 0.04, mobility: 0.005, epsilon: 1.0, ..Default::default() };
        let m = ModelSpec::new(ModelKind::CahnHilliard, &g, p).unwrap();
        let t = 1.3;
        let f = ExactSolution::PhaseField.scalar_forcing(&m, t).unwrap();
        let oracle = spectral_forcing(&m, t, 1e-4);
        assert!(max_diff(&f, &oracle) < 1e-6, "{}", max_diff(&f, &oracle));
    }

    #[test]
    fn navier_stokes_forcing_matches_spectral_oracle() {
        let g = grid(64);
        let p = ModelParams { nu: 0.6, ..Default::default() };
        let m = ModelSpec::new(ModelKind::NavierStokes, &g, p).unwrap();
        let exact = ExactSolution::NavierStokes;
        let t = 2.4;
        let dt = 1e-4;
        let u = exact.velocity(&g, t).unwrap();
        let up = exact.velocity(&g, t + dt).unwrap();
        let um = exact.velocity(&g, t - dt).unwrap();
        let pr = exact.pressure(&g, t).unwrap();
        let lap = DiagonalOperator::laplacian(&g);
        let f = exact.vector_forcing(&m, t).unwrap();
        for i in 0..2 {
            let ut = ScalarField::combination(&[(0.5 / dt, up.component(i)), (-0.5 / dt, um.component(i))]);
            let visc = lap.apply(u.component(i)).unwrap();
            let ui = u.component(i).spectrum();
            let adv_terms: Vec<ScalarField> = (0..2)
                .map(|j| {
                    let d: Spectrum = ui.derivative(j);
                    let dfield = d.to_field();
                    let vals = u.component(j).values().iter().zip(dfield.values()).map(|(a, b)| a * b).collect();
                    ScalarField::from_values(&g, vals).unwrap()
                })
                .collect();
            let dp = pr.spectrum().derivative(i).to_field();
            let oracle = ScalarField::combination(&[
                (1.0, &ut),
                (-0.6, &visc),
                (1.0, &adv_terms[0]),
                (1.0, &adv_terms[1]),
                (1.0, &dp),
            ]);
            let err = max_diff(f.component(i), &oracle);
            assert!(err < 1e-6 * oracle.max_abs().max(1.0), "component {i}: {err}");
        }
    }

    #[test]
    fn exact_velocity_is_divergence_free() {
        let g = grid(32);
        let u = ExactSolution::NavierStokes.velocity(&g, 2.0).unwrap();
        let div = Spectrum::combination(&[
            (1.0, &u.component(0).spectrum().derivative(0)),
            (1.0, &u.component(1).spectrum().derivative(1)),
        ]);
        assert!(div.to_field().max_abs() < 1e-10);
    }

    #[test]
    fn pfc_has_no_manufactured_solution() {
        assert!(ExactSolution::for_model(ModelKind::Pfc).is_err());
    }
}
