use crate::spectral::{ScalarField, VectorField};

use super::SchemeKind;

/// Which side of a min rule produced `R^{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// The dissipation-law candidate (`s^{n+1}` or `Rⁿ`) was kept.
    Modified,
    /// The original-energy cap fired.
    Original,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Modified => "modified",
            Branch::Original => "original",
        }
    }
}

/// Everything a step computed besides the new fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    /// `Rⁿ` going into the step.
    pub r_prev: f64,
    /// Step-I auxiliary value `R̃^{n+1}` (or `R^{n+1}` for plain SAV).
    pub r_tilde: f64,
    /// `ξ^{n+1}`: `R̃/ℰ(φ̄)` for GSAV-type schemes, `R/√ℰ₁` for SAV.
    pub xi: Option<f64>,
    pub lambda0: Option<f64>,
    /// `s^{n+1}` of EOP-SAV.
    pub s: Option<f64>,
    /// The cap of the min rule: `√ℰ₁(φ^{n+1})` or `ℰ(φ^{n+1})`.
    pub e_cap: Option<f64>,
    pub branch: Option<Branch>,
    /// `Δt(Gμ, μ)` (summed over substeps).
    pub dissipation: f64,
    /// `Δt(μ, f)` (summed over substeps).
    pub work: f64,
    /// Discrete energy-identity residual of Step I.
    pub residual: f64,
    /// Set when the RSAV discriminant went negative.
    pub fallback: bool,
    /// Substeps taken; 1 outside cold startup.
    pub substeps: usize,
    /// Startup step run with the order-1 member.
    pub startup: bool,
    /// Spectral norm of `∇·u^{n+1}` (Navier–Stokes only).
    pub divergence: Option<f64>,
}

/// Time-stepper state. Histories are newest first.
#[derive(Clone, Debug)]
pub struct SchemeState {
    pub(crate) kind: SchemeKind,
    pub(crate) phi: Vec<ScalarField>,
    pub(crate) velocity: Vec<VectorField>,
    pub(crate) r: Vec<f64>,
    pub(crate) t: f64,
    pub(crate) step_index: usize,
    pub(crate) dt: f64,
    pub(crate) c0: f64,
    pub(crate) last: Option<StepDiagnostics>,
    pub(crate) pressure: Option<ScalarField>,
}

impl SchemeState {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Current scalar solution, absent for Navier–Stokes.
    pub fn phi(&self) -> Option<&ScalarField> {
        self.phi.first()
    }

    pub fn phi_history(&self) -> &[ScalarField] {
        &self.phi
    }

    pub fn velocity(&self) -> Option<&VectorField> {
        self.velocity.first()
    }

    pub fn velocity_history(&self) -> &[VectorField] {
        &self.velocity
    }

    pub fn r(&self) -> f64 {
        self.r[0]
    }

    pub fn r_history(&self) -> &[f64] {
        &self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Energy shift `C₀` of GSAV-type schemes (0 otherwise).
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn last(&self) -> Option<&StepDiagnostics> {
        self.last.as_ref()
    }

    /// Pressure recovered after the last Navier–Stokes step.
    pub fn pressure(&self) -> Option<&ScalarField> {
        self.pressure.as_ref()
    }

    pub fn history_len(&self) -> usize {
        self.r.len()
    }

    pub(crate) fn push_scalar(&mut self, phi: ScalarField, r: f64, depth: usize) {
        self.phi.insert(0, phi);
        self.phi.truncate(depth);
        self.r.insert(0, r);
        self.r.truncate(depth);
    }

    pub(crate) fn push_vector(&mut self, u: VectorField, r: f64, depth: usize) {
        self.velocity.insert(0, u);
        self.velocity.truncate(depth);
        self.r.insert(0, r);
        self.r.truncate(depth);
    }
}
