//! Time integrators.
//!
//! Every scheme solves the implicit linear part `(a·I + b·G∘L)` diagonally in
//! spectral space and treats `F′` explicitly. The families differ in how the
//! auxiliary scalar `R` is defined and updated:
//!
//! - SAV/BDFk (k = 1, 2): `R ≈ √(E₁ + C)`, coupled to `φ` through one scalar
//!   closure.
//! - RSAV/CN and EOP-SAV/CN: shared Crank–Nicolson Step I, then a relaxation
//!   or a min rule for `R`.
//! - GSAV/BDFk, R-GSAV and EOP-GSAV (k = 1..4): `R ≈ E + C₀`, with the
//!   correction factor `1 − (1 − ξ)^{k+1}`.
//! - Navier–Stokes EOP-GSAV: the same on a Leray-projected momentum equation.

mod bdf;
mod cn;
mod gsav;
mod ns;
mod sav;
mod state;

use serde::{Deserialize, Serialize};

pub use bdf::BdfTable;
pub use cn::{eop_sav_update, rsav_relax, CnStepOne, EopSavUpdate, Relaxation};
pub use gsav::{eop_gsav_update, rgsav_relax};
pub use ns::{advection, divergence_norm, recover_pressure};
pub(crate) use sav::sav_energy;
pub use state::{Branch, SchemeState, StepDiagnostics};

use crate::audit::{self, EnergyRecord};
use crate::error::{Error, Result};
use crate::models::{ExactSolution, InitialData, ModelKind, ModelSpec};
use crate::spectral::{leray_project, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Sav,
    RsavCn,
    EopSavCn,
    Gsav,
    #[serde(rename = "r_gsav")]
    Rgsav,
    EopGsav,
    NsEopGsav,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::Sav,
        SchemeKind::RsavCn,
        SchemeKind::EopSavCn,
        SchemeKind::Gsav,
        SchemeKind::Rgsav,
        SchemeKind::EopGsav,
        SchemeKind::NsEopGsav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Sav => "sav",
            SchemeKind::RsavCn => "rsav_cn",
            SchemeKind::EopSavCn => "eop_sav_cn",
            SchemeKind::Gsav => "gsav",
            SchemeKind::Rgsav => "r_gsav",
            SchemeKind::EopGsav => "eop_gsav",
            SchemeKind::NsEopGsav => "ns_eop_gsav",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }

    pub fn is_cn(self) -> bool {
        matches!(self, SchemeKind::RsavCn | SchemeKind::EopSavCn)
    }

    /// `R` tracks the shifted total energy rather than `√(E₁ + C)`.
    pub fn tracks_total_energy(self) -> bool {
        matches!(self, SchemeKind::Gsav | SchemeKind::Rgsav | SchemeKind::EopGsav | SchemeKind::NsEopGsav)
    }

    /// Uses a min rule capped by the original energy.
    pub fn is_eop(self) -> bool {
        matches!(self, SchemeKind::EopSavCn | SchemeKind::EopGsav | SchemeKind::NsEopGsav)
    }

    pub fn is_fluid(self) -> bool {
        self == SchemeKind::NsEopGsav
    }

    /// Admissible BDF orders.
    pub fn orders(self) -> std::ops::RangeInclusive<usize> {
        match self {
            SchemeKind::Sav => 1..=2,
            SchemeKind::RsavCn | SchemeKind::EopSavCn => 2..=2,
            _ => 1..=4,
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Argument of `ℰ₁` in the CN Step-I denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnDenominator {
    /// `φ̂^{n+½} = 3/2 φⁿ − 1/2 φⁿ⁻¹`, the same point as `F′`.
    #[default]
    Half,
    /// `φ̂^{n+1} = 2φⁿ − φⁿ⁻¹`.
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Startup {
    /// Fill the history with the order-1 member of the same family.
    #[default]
    #[serde(rename = "cold_bdf1_substeps")]
    Cold,
    /// Fill the history from the manufactured solution.
    ExactHistory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AutoLevel {
    Auto,
}

/// Cold-start substep level `j` (startup steps use `Δt/2^j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubstepLevel {
    Fixed(u32),
    /// Smallest `j` with `Δt²/2^j ≤ Δt^k`, capped at 16.
    #[allow(private_interfaces)]
    Auto(AutoLevel),
}

impl Default for SubstepLevel {
    fn default() -> Self {
        SubstepLevel::Fixed(0)
    }
}

impl SubstepLevel {
    pub const AUTO: SubstepLevel = SubstepLevel::Auto(AutoLevel::Auto);

    pub fn resolve(self, k: usize, dt: f64) -> u32 {
        match self {
            SubstepLevel::Fixed(j) => j.min(16),
            SubstepLevel::Auto(_) => {
                if k <= 2 || dt >= 1.0 {
                    return 0;
                }
                let j = ((k as f64 - 2.0) * (1.0 / dt).log2()).ceil();
                j.clamp(0.0, 16.0) as u32
            }
        }
    }
}

fn default_eta() -> f64 {
    0.95
}

/// Scheme selection and step parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub k: usize,
    pub dt: f64,
    /// RSAV / R-GSAV residual fraction.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Replaces the exponent of the GSAV correction factor.
    #[serde(default)]
    pub exponent_override: Option<i32>,
    #[serde(default)]
    pub cn_denominator: CnDenominator,
    #[serde(default)]
    pub startup: Startup,
    #[serde(default)]
    pub substep_level: SubstepLevel,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, k: usize, dt: f64) -> Self {
        SchemeConfig {
            kind,
            k,
            dt,
            eta: default_eta(),
            exponent_override: None,
            cn_denominator: CnDenominator::Half,
            startup: Startup::Cold,
            substep_level: SubstepLevel::Fixed(0),
        }
    }

    pub fn with_startup(mut self, startup: Startup) -> Self {
        self.startup = startup;
        self
    }

    pub fn validate(&self, model: ModelKind) -> Result<()> {
        BdfTable::new(self.k)?;
        if !self.kind.orders().contains(&self.k) {
            let r = self.kind.orders();
            return Err(Error::Config(format!(
                "k out of range {}..{} for {} (got {})",
                r.start(),
                r.end(),
                self.kind,
                self.k
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive (got {})", self.dt)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Config(format!("eta must lie in [0, 1] (got {})", self.eta)));
        }
        if let Some(p) = self.exponent_override {
            if p < 1 {
                return Err(Error::Config(format!("exponent_override must be ≥ 1 (got {p})")));
            }
        }
        if self.kind.is_fluid() != model.is_fluid() {
            return Err(Error::Config(format!("scheme {} cannot run model {}", self.kind, model.name())));
        }
        Ok(())
    }
}

/// External force added to the right-hand side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Forcing {
    #[default]
    None,
    Manufactured(ExactSolution),
}

impl Forcing {
    pub fn exact(&self) -> Option<ExactSolution> {
        match self {
            Forcing::None => None,
            Forcing::Manufactured(e) => Some(*e),
        }
    }
}

/// Hook called after every step of [`Integrator::advance`].
pub trait Observer {
    fn observe(&mut self, state: &SchemeState, record: &EnergyRecord) -> Result<()>;
}

impl<F: FnMut(&SchemeState, &EnergyRecord) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &SchemeState, record: &EnergyRecord) -> Result<()> {
        self(state, record)
    }
}

/// A scheme bound to a model.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub(crate) model: ModelSpec,
    pub(crate) config: SchemeConfig,
    pub(crate) forcing: Forcing,
}

impl Integrator {
    pub fn new(model: ModelSpec, config: SchemeConfig, forcing: Forcing) -> Result<Self> {
        config.validate(model.kind())?;
        if let Some(exact) = forcing.exact() {
            let want = ExactSolution::for_model(model.kind())?;
            if want != exact {
                return Err(Error::Config(format!(
                    "manufactured solution does not match model {}",
                    model.kind().name()
                )));
            }
        }
        Ok(Integrator { model, config, forcing })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn forcing(&self) -> Forcing {
        self.forcing
    }

    pub fn kind(&self) -> SchemeKind {
        self.config.kind
    }

    /// History length the scheme needs after startup.
    pub fn depth(&self) -> usize {
        self.config.k
    }

    /// `ℰ₁(φ) = E₁(φ) + C`.
    pub fn shifted_nonlinear(&self, phi: &ScalarField) -> f64 {
        self.model.nonlinear_energy(phi) + self.model.c_shift()
    }

    /// Original energy: `E(φ)` or `½‖u‖²`.
    pub fn original_energy(&self, state: &SchemeState) -> f64 {
        match (state.phi(), state.velocity()) {
            (Some(phi), _) => self.model.total_energy(phi),
            (None, Some(u)) => self.model.kinetic_energy(u),
            (None, None) => f64::NAN,
        }
    }

    /// `R` consistent with the given solution.
    fn exact_r(&self, phi: Option<&ScalarField>, u: Option<&VectorField>, c0: f64) -> f64 {
        match (phi, u) {
            (Some(p), _) if self.kind().tracks_total_energy() => self.model.total_energy(p) + c0,
            (Some(p), _) => self.shifted_nonlinear(p).max(0.0).sqrt(),
            (None, Some(v)) => self.model.kinetic_energy(v) + c0,
            (None, None) => f64::NAN,
        }
    }

    pub fn init_state(&self, data: InitialData, t0: f64) -> Result<SchemeState> {
        let mut st = SchemeState {
            kind: self.kind(),
            phi: Vec::new(),
            velocity: Vec::new(),
            r: Vec::new(),
            t: t0,
            step_index: 0,
            dt: self.config.dt,
            c0: 0.0,
            last: None,
            pressure: None,
        };
        if self.kind().is_fluid() {
            let u = data.into_vector()?;
            if !u.grid().same_shape(self.model.grid()) {
                return Err(Error::GridMismatch);
            }
            let u = leray_project(&u)?;
            st.c0 = self.model.resolve_c0(self.model.kinetic_energy(&u));
            let r = self.exact_r(None, Some(&u), st.c0);
            if !(r > 0.0) {
                return Err(Error::Config(format!("initial shifted energy must be positive (got {r:e})")));
            }
            st.velocity.push(u);
            st.r.push(r);
        } else {
            let phi = data.into_scalar()?;
            if !phi.grid().same_shape(self.model.grid()) {
                return Err(Error::GridMismatch);
            }
            if self.kind().tracks_total_energy() {
                st.c0 = self.model.resolve_c0(self.model.total_energy(&phi));
                let r = self.exact_r(Some(&phi), None, st.c0);
                if !(r > 0.0) {
                    return Err(Error::Config(format!("E(φ⁰) + C₀ must be positive (got {r:e})")));
                }
                st.r.push(r);
            } else {
                let e1 = self.shifted_nonlinear(&phi);
                if !(e1 > 0.0) {
                    return Err(Error::Config(format!("E₁(φ⁰) + C must be positive (got {e1:e})")));
                }
                st.r.push(e1.sqrt());
            }
            st.phi.push(phi);
        }
        Ok(st)
    }

    /// Replaces the cold startup: the history is filled with the manufactured
    /// solution at `t0, t0 + Δt, …` and the state is moved to step `k − 1`.
    pub fn exact_history(&self, st: &mut SchemeState) -> Result<()> {
        let exact = self
            .forcing
            .exact()
            .ok_or_else(|| Error::Config("exact_history requires a manufactured solution".into()))?;
        if st.step_index != 0 {
            return Err(Error::Config("exact_history must be applied before the first step".into()));
        }
        let depth = self.depth();
        let t0 = st.t;
        let grid = self.model.grid();
        for i in 1..depth {
            let t = t0 + i as f64 * st.dt;
            if self.kind().is_fluid() {
                let u = exact.velocity(grid, t)?;
                let r = self.exact_r(None, Some(&u), st.c0);
                st.push_vector(u, r, depth);
            } else {
                let phi = exact.phi(grid, t)?;
                let r = self.exact_r(Some(&phi), None, st.c0);
                st.push_scalar(phi, r, depth);
            }
        }
        st.step_index = depth - 1;
        st.t = t0 + (depth - 1) as f64 * st.dt;
        Ok(())
    }

    /// Advances one step of size `Δt`, running the cold startup when the
    /// history is still short.
    pub fn step(&self, st: &mut SchemeState) -> Result<()> {
        let depth = self.depth();
        let dt = st.dt;
        let n = st.step_index + 1;
        let diag = if self.kind().is_cn() || st.history_len() >= depth {
            self.step_once(st, dt, depth)?
        } else {
            self.startup_step(st, dt)?
        };
        st.t += dt;
        st.step_index = n;
        st.last = Some(diag);
        Ok(())
    }

    fn startup_step(&self, st: &mut SchemeState, dt: f64) -> Result<StepDiagnostics> {
        let j = self.config.substep_level.resolve(self.config.k, dt);
        let m = 1usize << j;
        let h = dt / m as f64;
        let mut sub = st.clone();
        sub.phi.truncate(1);
        sub.velocity.truncate(1);
        sub.r.truncate(1);
        let mut acc = StepDiagnostics { r_prev: st.r(), ..Default::default() };
        for i in 0..m {
            let d = self.step_once(&mut sub, h, 1)?;
            sub.t += h;
            acc.dissipation += d.dissipation;
            acc.work += d.work;
            acc.residual += d.residual;
            acc.fallback |= d.fallback;
            if i + 1 == m {
                acc = StepDiagnostics {
                    r_prev: acc.r_prev,
                    dissipation: acc.dissipation,
                    work: acc.work,
                    residual: acc.residual,
                    fallback: acc.fallback,
                    ..d
                };
            }
        }
        acc.substeps = m;
        acc.startup = true;
        let depth = self.depth();
        let r = sub.r();
        if self.kind().is_fluid() {
            st.push_vector(sub.velocity.swap_remove(0), r, depth);
            st.pressure = sub.pressure;
        } else {
            st.push_scalar(sub.phi.swap_remove(0), r, depth);
        }
        Ok(acc)
    }

    /// One step of the given order with step `dt`; pushes the new solution.
    fn step_once(&self, st: &mut SchemeState, dt: f64, order: usize) -> Result<StepDiagnostics> {
        let mut d = match self.kind() {
            SchemeKind::Sav => self.sav_step(st, dt, order)?,
            SchemeKind::RsavCn | SchemeKind::EopSavCn => self.cn_step(st, dt)?,
            SchemeKind::Gsav | SchemeKind::Rgsav | SchemeKind::EopGsav => self.gsav_step(st, dt, order)?,
            SchemeKind::NsEopGsav => self.ns_step(st, dt, order)?,
        };
        d.substeps = 1;
        Ok(d)
    }

    /// Scalar forcing at time `t`, if any.
    pub(crate) fn scalar_forcing(&self, t: f64) -> Result<Option<ScalarField>> {
        match self.forcing {
            Forcing::None => Ok(None),
            Forcing::Manufactured(e) => e.scalar_forcing(&self.model, t).map(Some),
        }
    }

    pub(crate) fn vector_forcing(&self, t: f64) -> Result<Option<VectorField>> {
        match self.forcing {
            Forcing::None => Ok(None),
            Forcing::Manufactured(e) => e.vector_forcing(&self.model, t).map(Some),
        }
    }

    /// Runs `n` steps, auditing each and handing the record to every observer.
    pub fn advance(
        &self,
        st: &mut SchemeState,
        n: usize,
        observers: &mut [&mut dyn Observer],
    ) -> Result<Vec<EnergyRecord>> {
        let mut records = Vec::with_capacity(n);
        for _ in 0..n {
            self.step(st).map_err(|e| match e {
                Error::Numerical { message, .. } => Error::numerical(st.step_index + 1, message),
                other => other,
            })?;
            let rec = audit::audit_step(self, st);
            for obs in observers.iter_mut() {
                obs.observe(st, &rec)?;
            }
            records.push(rec);
        }
        Ok(records)
    }
}

pub(crate) fn check_positive(step: usize, what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::numerical(step, format!("{what} must be positive (got {v:e})")))
    }
}
