use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExactSolution, ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::spectral::{leray_project, PeriodicGrid, ScalarField, VectorField};

/// One square crystallite seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalPatch {
    pub center: [f64; 2],
    pub angle: f64,
    pub side: f64,
}

pub(crate) fn default_patches() -> Vec<CrystalPatch> {
    [([350.0, 400.0], -PI / 4.0), ([200.0, 200.0], 0.0), ([600.0, 300.0], PI / 4.0)]
        .into_iter()
        .map(|(center, angle)| CrystalPatch { center, angle, side: 40.0 })
        .collect()
}

fn d_count() -> usize {
    9
}
fn d_spacing() -> f64 {
    0.2
}
fn d_r0() -> f64 {
    0.085
}
fn d_phi_bar() -> f64 {
    0.285
}
fn d_c1() -> f64 {
    0.446
}
fn d_c2() -> f64 {
    0.66
}
fn d_rho() -> f64 {
    30.0
}
fn d_perturbation() -> f64 {
    0.05
}
fn d_amplitude() -> f64 {
    0.01
}
fn d_smooth_amplitude() -> f64 {
    0.5
}
fn d_max_mode() -> usize {
    4
}

/// Initial data recipes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// The model's exact solution at `t0`.
    Manufactured {
        #[serde(default)]
        t0: f64,
    },
    /// Six-fold star `tanh((1.5 + 1.2 cos 6θ − 2πr)/√(2α))` about the box
    /// centre; `alpha` defaults to the model's `α₀`.
    Star {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
    /// `(n² − 1) − Σ tanh((|x − x_mn| − r₀)/(√2 ε))` over an `n × n` array of
    /// circles at multiples of `spacing`; `epsilon` defaults to the model's.
    CircleArray {
        #[serde(default = "d_count")]
        count: usize,
        #[serde(default = "d_spacing")]
        spacing: f64,
        #[serde(default = "d_r0")]
        r0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    /// Rotated hexagonal lattice inside square patches, `phi_bar` elsewhere.
    Crystallites {
        #[serde(default = "d_phi_bar")]
        phi_bar: f64,
        #[serde(default = "d_c1")]
        c1: f64,
        #[serde(default = "d_c2")]
        c2: f64,
        #[serde(default = "default_patches")]
        patches: Vec<CrystalPatch>,
    },
    /// Double shear layer: `u₁ = tanh(ρ(y − ¼))` below `y = ½`,
    /// `tanh(ρ(¾ − y))` above, `u₂ = δ sin 2πx`.
    ShearLayer {
        #[serde(default = "d_rho")]
        rho: f64,
        #[serde(default = "d_perturbation")]
        perturbation: f64,
    },
    /// `mean + amplitude·U[−1, 1]` per grid point.
    UniformRandom {
        mean: f64,
        #[serde(default = "d_amplitude")]
        amplitude: f64,
        seed: u64,
    },
    /// Random data low-pass filtered to `|m| ≤ max_mode` on every axis and
    /// rescaled to `max |φ − mean| = amplitude`. Velocity fields are
    /// additionally projected onto divergence-free fields.
    SmoothRandom {
        #[serde(default)]
        mean: f64,
        #[serde(default = "d_smooth_amplitude")]
        amplitude: f64,
        #[serde(default = "d_max_mode")]
        max_mode: usize,
        seed: u64,
    },
    Constant {
        value: f64,
    },
}

/// Scalar or velocity initial state.
#[derive(Clone, Debug)]
pub enum InitialData {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl InitialData {
    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            InitialData::Scalar(s) => Ok(s),
            InitialData::Vector(_) => Err(Error::Config("expected scalar initial data".into())),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            InitialData::Vector(v) => Ok(v),
            InitialData::Scalar(_) => Err(Error::Config("expected velocity initial data".into())),
        }
    }
}

fn need_2d(grid: &PeriodicGrid, what: &str) -> Result<()> {
    if grid.dim() == 2 {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} initial condition needs a 2D grid")))
    }
}

fn uniform(grid: &Arc<PeriodicGrid>, rng: &mut ChaCha8Rng) -> ScalarField {
    let values = (0..grid.len()).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
    ScalarField::from_values_unchecked(grid, values)
}

fn low_pass(field: &ScalarField, max_mode: usize) -> ScalarField {
    let grid = field.grid().clone();
    let mut s = field.spectrum().clone();
    for (flat, z) in s.coeffs_mut().iter_mut().enumerate() {
        if grid.mode_of(flat).iter().any(|m| m.unsigned_abs() as usize > max_mode) {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    s.to_field()
}

fn rescale(field: &ScalarField, mean: f64, amplitude: f64) -> ScalarField {
    let peak = field.max_abs();
    let s = if peak > 0.0 { amplitude / peak } else { 0.0 };
    field.map(move |v| mean + s * v)
}

/// Samples an initial condition for `model` on the model's grid.
pub fn make_initial(ic: &InitialCondition, model: &ModelSpec) -> Result<InitialData> {
    let grid = model.grid();
    let fluid = model.kind().is_fluid();
    let scalar = |f: ScalarField| -> Result<InitialData> {
        if fluid {
            Err(Error::Config("navier_stokes needs velocity initial data".into()))
        } else {
            Ok(InitialData::Scalar(f))
        }
    };
    match ic {
        InitialCondition::Manufactured { t0 } => {
            let exact = ExactSolution::for_model(model.kind())?;
            if fluid {
                Ok(InitialData::Vector(exact.velocity(grid, *t0)?))
            } else {
                Ok(InitialData::Scalar(exact.phi(grid, *t0)?))
            }
        }
        InitialCondition::Star { alpha } => {
            need_2d(grid, "star")?;
            let alpha = alpha.unwrap_or(model.params().alpha0);
            if alpha <= 0.0 {
                return Err(Error::Config("star alpha must be positive".into()));
            }
            let (lx, ly) = (grid.extents()[0], grid.extents()[1]);
            let width = (2.0 * alpha).sqrt();
            scalar(ScalarField::from_fn(grid, move |x| {
                let (dx, dy) = (x[0] - 0.5 * lx, x[1] - 0.5 * ly);
                let theta = dy.atan2(dx);
                let r = dx.hypot(dy);
                ((1.5 + 1.2 * (6.0 * theta).cos() - 2.0 * PI * r) / width).tanh()
            }))
        }
        InitialCondition::CircleArray { count, spacing, r0, epsilon } => {
            need_2d(grid, "circle_array")?;
            let eps = epsilon.unwrap_or(model.params().epsilon);
            let (n, h, r0) = (*count, *spacing, *r0);
            let width = 2f64.sqrt() * eps;
            let base = (n * n) as f64 - 1.0;
            scalar(ScalarField::from_fn(grid, move |x| {
                let mut sum = 0.0;
                for m in 1..=n {
                    for k in 1..=n {
                        let d = (x[0] - h * m as f64).hypot(x[1] - h * k as f64);
                        sum += ((d - r0) / width).tanh();
                    }
                }
                base - sum
            }))
        }
        InitialCondition::Crystallites { phi_bar, c1, c2, patches } => {
            need_2d(grid, "crystallites")?;
            let ext = grid.extents();
            for p in patches {
                let h = 0.5 * p.side;
                let inside = (0..2).all(|a| p.center[a] - h >= 0.0 && p.center[a] + h <= ext[a]);
                if !inside || p.side <= 0.0 {
                    return Err(Error::Config(format!(
                        "crystallite patch at ({}, {}) with side {} is outside the domain",
                        p.center[0], p.center[1], p.side
                    )));
                }
            }
            let (phi_bar, c1, c2) = (*phi_bar, *c1, *c2);
            let patches = patches.clone();
            let sqrt3 = 3f64.sqrt();
            scalar(ScalarField::from_fn(grid, move |x| {
                for p in &patches {
                    let h = 0.5 * p.side;
                    if (x[0] - p.center[0]).abs() <= h && (x[1] - p.center[1]).abs() <= h {
                        let (s, c) = p.angle.sin_cos();
                        let xl = x[0] * s + x[1] * c;
                        let yl = -x[0] * c + x[1] * s;
                        return phi_bar
                            + c1 * ((c2 / sqrt3 * yl).cos() * (c2 * xl).cos() - 0.5 * (2.0 * c2 / sqrt3 * yl).cos());
                    }
                }
                phi_bar
            }))
        }
        InitialCondition::ShearLayer { rho, perturbation } => {
            need_2d(grid, "shear_layer")?;
            if !fluid {
                return Err(Error::Config("shear_layer is a velocity initial condition".into()));
            }
            let (rho, d) = (*rho, *perturbation);
            let u1 = ScalarField::from_fn(grid, move |x| {
                if x[1] <= 0.5 {
                    (rho * (x[1] - 0.25)).tanh()
                } else {
                    (rho * (0.75 - x[1])).tanh()
                }
            });
            let u2 = ScalarField::from_fn(grid, move |x| d * (2.0 * PI * x[0]).sin());
            Ok(InitialData::Vector(VectorField::new(vec![u1, u2])?))
        }
        InitialCondition::UniformRandom { mean, amplitude, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let noise = uniform(grid, &mut rng);
            let (m, a) = (*mean, *amplitude);
            scalar(noise.map(move |v| m + a * v))
        }
        InitialCondition::SmoothRandom { mean, amplitude, max_mode, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            if fluid {
                let comps: Vec<ScalarField> =
                    (0..grid.dim()).map(|_| low_pass(&uniform(grid, &mut rng), *max_mode)).collect();
                let projected = leray_project(&VectorField::new(comps)?)?;
                let peak = projected.components().iter().fold(0.0_f64, |m, c| m.max(c.max_abs()));
                let s = if peak > 0.0 { amplitude / peak } else { 0.0 };
                Ok(InitialData::Vector(projected.scaled(s)))
            } else {
                let smooth = low_pass(&uniform(grid, &mut rng), *max_mode);
                let centred = smooth.map({
                    let avg = smooth.integral() / grid.volume();
                    move |v| v - avg
                });
                Ok(InitialData::Scalar(rescale(&centred, *mean, *amplitude)))
            }
        }
        InitialCondition::Constant { value } => {
            if fluid {
                let c = *value;
                let comps = (0..grid.dim()).map(|_| ScalarField::constant(grid, c)).collect();
                Ok(InitialData::Vector(VectorField::new(comps)?))
            } else {
                Ok(InitialData::Scalar(ScalarField::constant(grid, *value)))
            }
        }
    }
}

impl InitialCondition {
    /// Whether the recipe draws random numbers.
    pub fn is_random(&self) -> bool {
        matches!(self, InitialCondition::UniformRandom { .. } | InitialCondition::SmoothRandom { .. })
    }

    /// Checks that a recipe fits a model kind before sampling.
    pub fn check_kind(&self, kind: ModelKind) -> Result<()> {
        let vector_only = matches!(self, InitialCondition::ShearLayer { .. });
        let scalar_only = matches!(
            self,
            InitialCondition::Star { .. }
                | InitialCondition::CircleArray { .. }
                | InitialCondition::Crystallites { .. }
                | InitialCondition::UniformRandom { .. }
        );
        if (kind.is_fluid() && scalar_only) || (!kind.is_fluid() && vector_only) {
            return Err(Error::Config(format!("initial condition does not fit model {}", kind.name())));
        }
        Ok(())
    }
}
