//! Crank–Nicolson Step I shared by RSAV/CN and EOP-SAV/CN, and the two
//! Step-II rules.

use super::{check_positive, Branch, CnDenominator, Integrator, SchemeKind, SchemeState, StepDiagnostics};
use crate::error::{Error, Result};
use crate::spectral::{ScalarField, ShiftedSystem, Spectrum};

/// Output of the CN Step I.
#[derive(Clone, Debug)]
pub struct CnStepOne {
    pub phi_next: ScalarField,
    pub r_tilde: f64,
    /// `s̄ = (R̃ + Rⁿ)/2`, the multiplier of `b` in `μ^{n+½}`.
    pub r_half: f64,
    /// `μ^{n+½} = ½L(φ^{n+1} + φⁿ) + s̄ b`.
    pub mu_half: Spectrum,
    /// `½(Lφⁿ, φⁿ)`.
    pub quad_prev: f64,
    /// `½(Lφ^{n+1}, φ^{n+1})`.
    pub quad_next: f64,
    /// `Δt(Gμ, μ)`.
    pub dissipation: f64,
    /// `Δt(μ, f)`.
    pub work: f64,
    /// `[quad + R̃²]^{n+1} − [quad + R²]ⁿ + Δt(Gμ, μ) − Δt(μ, f)`.
    pub residual: f64,
}

/// Result of the RSAV relaxation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Relaxation {
    pub r: f64,
    pub lambda0: f64,
    /// The discriminant was negative and `λ₀ = 1` was used.
    pub fallback: bool,
}

/// Smallest `λ ∈ [0, 1]` with `R² − R̃² ≤ η·D` for `R = λR̃ + (1 − λ)S`,
/// `S = √ℰ₁(φ^{n+1})` and `D = Δt(Gμ, μ)`.
///
/// Written as `aλ² + bλ + c ≤ 0` with `a = (R̃ − S)²`, `b = 2(R̃ − S)S`,
/// `c = S² − R̃² − ηD`. `λ = 1` gives `−ηD ≤ 0` and is always feasible.
pub fn rsav_relax(r_tilde: f64, e1_next: f64, dissipation: f64, eta: f64) -> Relaxation {
    let s = e1_next.max(0.0).sqrt();
    let d = r_tilde - s;
    let a = d * d;
    let b = 2.0 * d * s;
    let c = s * s - r_tilde * r_tilde - eta * dissipation;
    let blend = |lambda: f64| lambda * r_tilde + (1.0 - lambda) * s;
    // λ = 0 feasible; this also covers a = 0, where c = −ηD ≤ 0.
    if c <= 0.0 {
        return Relaxation { r: s, lambda0: 0.0, fallback: false };
    }
    let disc = b * b - 4.0 * a * c;
    if !(disc >= 0.0) || a == 0.0 {
        return Relaxation { r: r_tilde, lambda0: 1.0, fallback: true };
    }
    // Smaller root (a > 0), computed without cancellation.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (x1, x2) = (q / a, if q != 0.0 { c / q } else { f64::INFINITY });
    let lambda0 = x1.min(x2).clamp(0.0, 1.0);
    Relaxation { r: blend(lambda0), lambda0, fallback: false }
}

/// Result of the EOP-SAV min rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EopSavUpdate {
    pub r: f64,
    pub s: f64,
    pub cap: f64,
    pub branch: Branch,
}

/// `R^{n+1} = min{s^{n+1}, √ℰ₁(φ^{n+1})}` with
/// `s² = ½(Lφⁿ, φⁿ) − ½(Lφ^{n+1}, φ^{n+1}) + Rⁿ²`.
///
/// `quad_*` are the halved quadratic energies. Radicands in `[−1e−12, 0)`
/// are clamped to zero; anything below is an error.
pub fn eop_sav_update(quad_prev: f64, quad_next: f64, r_prev: f64, e1_next: f64) -> Result<EopSavUpdate> {
    let s2 = quad_prev - quad_next + r_prev * r_prev;
    if s2 < -1e-12 || s2.is_nan() {
        return Err(Error::numerical(0, format!("negative s² radicand {s2:e}")));
    }
    let s = s2.max(0.0).sqrt();
    let cap = e1_next.max(0.0).sqrt();
    let (r, branch) = if s <= cap { (s, Branch::Modified) } else { (cap, Branch::Original) };
    Ok(EopSavUpdate { r, s, cap, branch })
}

impl Integrator {
    /// Step I of the CN schemes from the current state, with step `dt`.
    /// On a one-entry history `φ̂^{n+½} = φⁿ`.
    pub fn cn_step_one(&self, st: &SchemeState, dt: f64) -> Result<CnStepOne> {
        let step = st.step_index + 1;
        let m = &self.model;
        let cur = &st.phi[0];
        let (phi_half, phi_full) = match st.phi.get(1) {
            Some(prev) => (
                ScalarField::combination(&[(1.5, cur), (-0.5, prev)]),
                ScalarField::combination(&[(2.0, cur), (-1.0, prev)]),
            ),
            None => (cur.clone(), cur.clone()),
        };
        let den_arg = match self.config.cn_denominator {
            CnDenominator::Half => &phi_half,
            CnDenominator::Full => &phi_full,
        };
        let e1_hat = self.shifted_nonlinear(den_arg);
        check_positive(step, "E₁(φ̂) + C", e1_hat)?;
        let b = m.f_prime_field(&phi_half).scaled(1.0 / e1_hat.sqrt());
        let bs = b.spectrum();

        let g = m.g().symbol();
        let l = m.l().symbol();
        let sys = ShiftedSystem::new(1.0, 0.5 * dt, m.g(), m.l())?;
        let explicit: Vec<f64> = g.iter().zip(l).map(|(g, l)| 1.0 - 0.5 * dt * g * l).collect();
        let mut rhs = cur.spectrum().with_symbol(&explicit);
        let f = self.scalar_forcing(st.t + 0.5 * dt)?;
        if let Some(f) = &f {
            rhs.axpy(dt, f.spectrum());
        }
        let phi_a = sys.solve_spectrum(&rhs)?;
        let mut gb = bs.with_symbol(g);
        gb.scale(-dt);
        let phi_b = sys.solve_spectrum(&gb)?;

        // R̃ − Rⁿ = ½(b, φ^{n+1} − φⁿ) with s̄ = (R̃ + Rⁿ)/2.
        let r_n = st.r[0];
        let coef = 2.0 - 0.5 * bs.inner(&phi_b);
        if !(coef.abs() >= 1e-14) {
            return Err(Error::numerical(step, format!("singular scalar closure (coefficient {coef:e})")));
        }
        let drift = Spectrum::combination(&[(1.0, &phi_a), (-1.0, cur.spectrum())]);
        let r_half = (2.0 * r_n + 0.5 * bs.inner(&drift)) / coef;
        let mut next = phi_a;
        next.axpy(r_half, &phi_b);
        let r_tilde = 2.0 * r_half - r_n;

        let sum = Spectrum::combination(&[(0.5, &next), (0.5, cur.spectrum())]);
        let mut mu_half = sum.with_symbol(l);
        mu_half.axpy(r_half, bs);
        let dissipation = dt * mu_half.quadratic_form(g);
        let work = f.as_ref().map_or(0.0, |f| dt * mu_half.inner(f.spectrum()));
        let quad_prev = 0.5 * cur.spectrum().quadratic_form(l);
        let quad_next = 0.5 * next.quadratic_form(l);
        let residual = (quad_next + r_tilde * r_tilde) - (quad_prev + r_n * r_n) + dissipation - work;
        Ok(CnStepOne {
            phi_next: next.into_field(),
            r_tilde,
            r_half,
            mu_half,
            quad_prev,
            quad_next,
            dissipation,
            work,
            residual,
        })
    }

    pub(super) fn cn_step(&self, st: &mut SchemeState, dt: f64) -> Result<StepDiagnostics> {
        let step = st.step_index + 1;
        let one = self.cn_step_one(st, dt)?;
        let r_prev = st.r[0];
        let e1 = self.shifted_nonlinear(&one.phi_next);
        let mut diag = StepDiagnostics {
            r_prev,
            r_tilde: one.r_tilde,
            dissipation: one.dissipation,
            work: one.work,
            residual: one.residual,
            e_cap: Some(e1.max(0.0).sqrt()),
            ..Default::default()
        };
        let r_next = match self.kind() {
            SchemeKind::RsavCn => {
                let rel = rsav_relax(one.r_tilde, e1, one.dissipation, self.config.eta);
                diag.lambda0 = Some(rel.lambda0);
                diag.fallback = rel.fallback;
                rel.r
            }
            _ => {
                let up = eop_sav_update(one.quad_prev, one.quad_next, r_prev, e1).map_err(|e| match e {
                    Error::Numerical { message, .. } => Error::numerical(step, message),
                    other => other,
                })?;
                diag.s = Some(up.s);
                diag.branch = Some(up.branch);
                up.r
            }
        };
        st.push_scalar(one.phi_next, r_next, self.depth());
        Ok(diag)
    }
}
