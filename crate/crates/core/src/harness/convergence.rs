//! Time-step ladders and observed orders.

use crate::error::{Error, Result};
use crate::exec::map_items;
use crate::integrators::{Forcing, Integrator, SchemeConfig, SchemeState, Startup};
use crate::models::{make_initial, InitialCondition, ModelSpec};
use crate::spectral::{ScalarField, VectorField};

/// What the numerical solution at `T` is compared with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    /// The closed-form solution behind the forcing.
    Manufactured,
    /// A run of the same scheme with this much smaller step.
    FineDt(f64),
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub model: ModelSpec,
    /// Scheme to test; its `dt` is replaced on every rung.
    pub scheme: SchemeConfig,
    pub initial: InitialCondition,
    pub forcing: Forcing,
    pub t0: f64,
    pub t_final: f64,
    /// Strictly decreasing.
    pub dt_ladder: Vec<f64>,
    pub reference: Reference,
}

impl ConvergenceStudy {
    /// Manufactured study from `t0` with exact history.
    pub fn manufactured(
        model: ModelSpec,
        scheme: SchemeConfig,
        t0: f64,
        t_final: f64,
        dt_ladder: Vec<f64>,
    ) -> Result<Self> {
        let exact = crate::models::ExactSolution::for_model(model.kind())?;
        Ok(ConvergenceStudy {
            model,
            scheme: scheme.with_startup(Startup::ExactHistory),
            initial: InitialCondition::Manufactured { t0 },
            forcing: Forcing::Manufactured(exact),
            t0,
            t_final,
            dt_ladder,
            reference: Reference::Manufactured,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt_ladder.len() < 2 {
            return Err(Error::Config("dt ladder needs at least two rungs".into()));
        }
        if self.dt_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("dt ladder must be strictly decreasing".into()));
        }
        for &dt in &self.dt_ladder {
            steps_for(self.t0, self.t_final, dt)?;
        }
        match self.reference {
            Reference::Manufactured if self.forcing == Forcing::None => {
                Err(Error::Config("manufactured reference needs manufactured forcing".into()))
            }
            Reference::FineDt(dt) => steps_for(self.t0, self.t_final, dt).map(|_| ()),
            _ => Ok(()),
        }
    }
}

/// `dt0, dt0/2, …` with `rungs` entries.
pub fn halving_ladder(dt0: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|i| dt0 / (1u64 << i) as f64).collect()
}

/// Number of steps of size `dt` covering `[t0, t_final]`; the interval must be
/// an integer multiple of `dt`.
pub fn steps_for(t0: f64, t_final: f64, dt: f64) -> Result<usize> {
    let span = t_final - t0;
    if !(dt > 0.0) || span < dt * (1.0 - 1e-12) {
        return Err(Error::Config(format!("need T - t0 ≥ dt > 0 (T - t0 = {span}, dt = {dt})")));
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::Config(format!("T - t0 = {span} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Fitted and pairwise orders.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    pub dt: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log e` against `log Δt`.
    pub slope: f64,
    /// `log₂(e_i/e_{i+1})` scaled by the actual step ratio.
    pub pairwise: Vec<f64>,
}

pub fn fit_order(dt: &[f64], errors: &[f64]) -> Result<OrderEstimate> {
    if dt.len() != errors.len() || dt.len() < 2 {
        return Err(Error::Config("need matching dt and error lists of length ≥ 2".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::numerical(0, format!("nonpositive or non-finite error {e:e}")));
    }
    let x: Vec<f64> = dt.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let pairwise = (0..dt.len() - 1).map(|i| (errors[i] / errors[i + 1]).ln() / (dt[i] / dt[i + 1]).ln()).collect();
    Ok(OrderEstimate { dt: dt.to_vec(), errors: errors.to_vec(), slope: sxy / sxx, pairwise })
}

/// Final state of a run with step `dt` from `t0` to `t_final`.
pub fn simulate(
    model: &ModelSpec,
    scheme: &SchemeConfig,
    initial: &InitialCondition,
    forcing: Forcing,
    t0: f64,
    t_final: f64,
) -> Result<SchemeState> {
    let n = steps_for(t0, t_final, scheme.dt)?;
    let it = Integrator::new(model.clone(), scheme.clone(), forcing)?;
    let mut st = it.init_state(make_initial(initial, model)?, t0)?;
    if scheme.startup == Startup::ExactHistory {
        it.exact_history(&mut st)?;
    }
    let remaining = n.saturating_sub(st.step_index());
    for _ in 0..remaining {
        it.step(&mut st)?;
    }
    Ok(st)
}

fn difference(a: &SchemeState, b: &SchemeState) -> f64 {
    match (a.phi(), b.phi(), a.velocity(), b.velocity()) {
        (Some(x), Some(y), _, _) => ScalarField::combination(&[(1.0, x), (-1.0, y)]).norm(),
        (_, _, Some(u), Some(v)) => VectorField::combination(&[(1.0, u), (-1.0, v)]).norm(),
        _ => f64::NAN,
    }
}

/// Discrete L² error of one run against the study's reference solution.
fn rung_error(study: &ConvergenceStudy, dt: f64, reference: Option<&SchemeState>) -> Result<f64> {
    let mut scheme = study.scheme.clone();
    scheme.dt = dt;
    let st = simulate(&study.model, &scheme, &study.initial, study.forcing, study.t0, study.t_final)?;
    match reference {
        Some(r) => Ok(difference(&st, r)),
        None => {
            let exact = study.forcing.exact().ok_or_else(|| Error::Config("no manufactured solution".into()))?;
            let grid = study.model.grid();
            Ok(match st.phi() {
                Some(phi) => {
                    let e = exact.phi(grid, study.t_final)?;
                    ScalarField::combination(&[(1.0, phi), (-1.0, &e)]).norm()
                }
                None => {
                    let e = exact.velocity(grid, study.t_final)?;
                    let u = st.velocity().expect("fluid state");
                    VectorField::combination(&[(1.0, u), (-1.0, &e)]).norm()
                }
            })
        }
    }
}

/// Runs every rung (in parallel under a parallel grid policy) and fits the
/// order. A failing rung aborts with its index.
pub fn run_convergence(study: &ConvergenceStudy) -> Result<OrderEstimate> {
    study.validate()?;
    let reference = match study.reference {
        Reference::Manufactured => None,
        Reference::FineDt(dt) => {
            let mut scheme = study.scheme.clone();
            scheme.dt = dt;
            Some(simulate(&study.model, &scheme, &study.initial, study.forcing, study.t0, study.t_final)?)
        }
    };
    let rungs: Vec<(usize, f64)> = study.dt_ladder.iter().copied().enumerate().collect();
    let errors = map_items(study.model.grid().execution(), &rungs, |&(i, dt)| {
        rung_error(study, dt, reference.as_ref()).map_err(|e| match e {
            Error::Numerical { step, message } => Error::numerical(step, format!("rung {i} (dt = {dt}): {message}")),
            other => other,
        })
    });
    let errors = errors.into_iter().collect::<Result<Vec<f64>>>()?;
    fit_order(&study.dt_ladder, &errors)
}
