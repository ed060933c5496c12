//! Gradient-flow instances and the Navier–Stokes system.
//!
//! A gradient flow is `φ_t = −G μ + f` with `μ = Lφ + F′(φ)` and energy
//! `E(φ) = ½(φ, Lφ) + (F(φ), 1)`. `L` and `G` are diagonal in Fourier space.

mod initial;
mod manufactured;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub(crate) use initial::default_patches;
pub use initial::{make_initial, CrystalPatch, InitialCondition, InitialData};
pub use manufactured::ExactSolution;

use crate::error::{Error, Result};
use crate::spectral::{Dealias, DiagonalOperator, PeriodicGrid, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    AllenCahn,
    CahnHilliard,
    Pfc,
    NavierStokes,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::AllenCahn => "allen_cahn",
            ModelKind::CahnHilliard => "cahn_hilliard",
            ModelKind::Pfc => "pfc",
            ModelKind::NavierStokes => "navier_stokes",
        }
    }

    pub fn is_fluid(self) -> bool {
        self == ModelKind::NavierStokes
    }
}

/// Physical parameters. Unused entries are ignored by the model kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Mobility `M`.
    pub mobility: f64,
    /// Interface coefficient `α₀`.
    pub alpha0: f64,
    /// `ε`: interface width for CH, undercooling for PFC.
    pub epsilon: f64,
    /// PFC shift `β`.
    pub beta: f64,
    /// Viscosity `ν`.
    pub nu: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { mobility: 1.0, alpha0: 1e-4, epsilon: 1.0, beta: 1.0, nu: 1.0 }
    }
}

/// A concrete model on a grid: operators, nonlinearity and energy shifts.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    kind: ModelKind,
    params: ModelParams,
    l: DiagonalOperator,
    g: DiagonalOperator,
    c_shift: f64,
    c0_shift: Option<f64>,
    dealias: Dealias,
}

impl ModelSpec {
    /// Builds the operator splitting for `kind`.
    ///
    /// For Navier–Stokes `L` is the viscous operator `−νΔ` acting on each
    /// velocity component and `G = I`; the energy is kinetic only.
    pub fn new(kind: ModelKind, grid: &Arc<PeriodicGrid>, params: ModelParams) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let neg_lap = DiagonalOperator::laplacian(grid).scaled(-1.0);
        let (l, g) = match kind {
            ModelKind::AllenCahn => {
                positive("mobility", params.mobility)?;
                positive("alpha0", params.alpha0)?;
                (neg_lap.scaled(params.alpha0), DiagonalOperator::scalar(grid, params.mobility))
            }
            ModelKind::CahnHilliard => {
                positive("mobility", params.mobility)?;
                positive("alpha0", params.alpha0)?;
                positive("epsilon", params.epsilon)?;
                (neg_lap.scaled(params.alpha0), neg_lap.scaled(params.mobility))
            }
            ModelKind::Pfc => {
                positive("mobility", params.mobility)?;
                let beta = params.beta;
                let l = DiagonalOperator::from_fn(grid, |k| {
                    let k2: f64 = k.iter().map(|v| v * v).sum();
                    (beta - k2) * (beta - k2)
                });
                (l, neg_lap.scaled(params.mobility))
            }
            ModelKind::NavierStokes => {
                positive("nu", params.nu)?;
                if grid.dim() < 2 {
                    return Err(Error::Config("navier_stokes needs a 2D or 3D grid".into()));
                }
                (neg_lap.scaled(params.nu), DiagonalOperator::identity(grid))
            }
        };
        let c_shift = Self::default_c_shift(kind, &params, grid);
        Ok(ModelSpec { kind, params, l, g, c_shift, c0_shift: None, dealias: Dealias::None })
    }

    /// `1` for double-well models; `(ε²/4)|Ω| + 1` for PFC, whose `E₁` is
    /// bounded below by `−(ε²/4)|Ω|`.
    pub fn default_c_shift(kind: ModelKind, params: &ModelParams, grid: &PeriodicGrid) -> f64 {
        match kind {
            ModelKind::Pfc => params.epsilon * params.epsilon / 4.0 * grid.volume() + 1.0,
            _ => 1.0,
        }
    }

    pub fn with_c_shift(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Config(format!("C must be finite and >= 0, got {c}")));
        }
        self.c_shift = c;
        Ok(self)
    }

    pub fn with_c0_shift(mut self, c0: Option<f64>) -> Result<Self> {
        if let Some(c) = c0 {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Config(format!("C0 must be finite and >= 0, got {c}")));
            }
        }
        self.c0_shift = c0;
        Ok(self)
    }

    pub fn with_dealias(mut self, rule: Dealias) -> Self {
        self.dealias = rule;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        self.l.grid()
    }

    pub fn l(&self) -> &DiagonalOperator {
        &self.l
    }

    pub fn g(&self) -> &DiagonalOperator {
        &self.g
    }

    pub fn c_shift(&self) -> f64 {
        self.c_shift
    }

    pub fn c0_override(&self) -> Option<f64> {
        self.c0_shift
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    /// `C₀` for an initial total energy `e0`: the configured value, or the
    /// smallest shift making `E(φ⁰) + C₀ ≥ 1` (raised for PFC so that the
    /// shifted energy stays positive along the whole run).
    pub fn resolve_c0(&self, e0: f64) -> f64 {
        if let Some(c) = self.c0_shift {
            return c;
        }
        let floor = match self.kind {
            ModelKind::Pfc => self.c_shift,
            _ => 0.0,
        };
        (1.0 - e0).max(floor).max(0.0)
    }

    /// Pointwise free-energy density `F`.
    pub fn f(&self, v: f64) -> f64 {
        Self::pointwise_f(self.kind, self.params.epsilon)(v)
    }

    fn pointwise_f(kind: ModelKind, eps: f64) -> impl Fn(f64) -> f64 + Send + Sync {
        move |v| match kind {
            ModelKind::AllenCahn => 0.25 * (v * v - 1.0) * (v * v - 1.0),
            ModelKind::CahnHilliard => 0.25 * (v * v - 1.0) * (v * v - 1.0) / (eps * eps),
            ModelKind::Pfc => 0.25 * v * v * v * v - 0.5 * eps * v * v,
            ModelKind::NavierStokes => 0.0,
        }
    }

    /// `F′`.
    pub fn f_prime(&self, v: f64) -> f64 {
        Self::pointwise_f_prime(self.kind, self.params.epsilon)(v)
    }

    /// `F′(φ)` sampled on the grid, with the model's dealiasing rule.
    pub fn f_prime_field(&self, phi: &ScalarField) -> ScalarField {
        phi.map(Self::pointwise_f_prime(self.kind, self.params.epsilon)).dealiased(self.dealias)
    }

    fn pointwise_f_prime(kind: ModelKind, eps: f64) -> impl Fn(f64) -> f64 + Send + Sync {
        move |v| match kind {
            ModelKind::AllenCahn => v * v * v - v,
            ModelKind::CahnHilliard => (v * v * v - v) / (eps * eps),
            ModelKind::Pfc => v * v * v - eps * v,
            ModelKind::NavierStokes => 0.0,
        }
    }

    /// `E₁(φ) = (F(φ), 1)`.
    pub fn nonlinear_energy(&self, phi: &ScalarField) -> f64 {
        phi.integral_of(Self::pointwise_f(self.kind, self.params.epsilon))
    }

    /// `½(Lφ, φ)`.
    pub fn quadratic_energy(&self, phi: &ScalarField) -> f64 {
        0.5 * phi.spectrum().quadratic_form(self.l.symbol())
    }

    /// `E(φ) = ½(Lφ, φ) + E₁(φ)`.
    pub fn total_energy(&self, phi: &ScalarField) -> f64 {
        self.quadratic_energy(phi) + self.nonlinear_energy(phi)
    }

    /// `½‖u‖²`.
    pub fn kinetic_energy(&self, u: &VectorField) -> f64 {
        0.5 * u.components().iter().map(|c| c.spectrum().norm_sqr()).sum::<f64>()
    }

    /// `μ = Lφ + F′(φ)`.
    pub fn chemical_potential(&self, phi: &ScalarField) -> ScalarField {
        let lphi = phi.spectrum().with_symbol(self.l.symbol()).to_field();
        let fp = self.f_prime_field(phi);
        ScalarField::combination(&[(1.0, &lphi), (1.0, &fp)])
    }

    /// `(Gμ, μ)`.
    pub fn dissipation(&self, mu: &ScalarField) -> f64 {
        mu.spectrum().quadratic_form(self.g.symbol())
    }
}
