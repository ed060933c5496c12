//! Named scenarios and config-driven runs.
//!
//! Defaults follow the experiments they are named after. Where those are too
//! expensive for a workstation the grid or final time shrinks, never the
//! scheme parameters:
//!
//! | name        | grid        | dt     | T   | note                         |
//! |-------------|-------------|--------|-----|------------------------------|
//! | `ac_caseA`  | 64² on [0,2]² | 0.01 | 0.5 | manufactured                 |
//! | `ac_caseB`  | 128² on [0,1]² | 1e-3 | 200 | star                        |
//! | `ch_caseA`  | 64² on [0,2]² | 0.01 | 0.5 | manufactured                 |
//! | `ch_caseB`  | 256² (512²)  | 1e-3  | 2   | 9×9 circles                  |
//! | `pfc_2d`    | 256² (1024²) | 0.02  | 300 (2000) | three crystallites    |
//! | `pfc_3d`    | 48³ (64³)    | 0.1   | 500 (3000) | uniform noise         |
//! | `ns_caseA`  | 40² on [0,2]² | 0.01 | 2 → 3 | manufactured, `C0 = 100`   |
//! | `ns_shear`  | 128² on [0,1]² | 6e-4 | 1.2 | double shear layer          |

use std::path::{Path, PathBuf};

use crate::audit::{self, check_run, EnergyRecord, Violation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::integrators::{CnDenominator, Integrator, Observer, SchemeKind, SchemeState, Startup, SubstepLevel};
use crate::io::{
    emit_plot_script, write_energy_csv, ForcingKind, GridSection, ModelSection, OutputSection, PlotKind, RunConfig,
    SchemeSection, Snapshot, SnapshotFormat,
};
use crate::models::{default_patches, make_initial, InitialCondition, ModelKind, ModelParams};
use crate::spectral::Dealias;

use super::steps_for;

pub const SCENARIOS: [&str; 8] =
    ["ac_caseA", "ac_caseB", "ch_caseA", "ch_caseB", "pfc_2d", "pfc_3d", "ns_caseA", "ns_shear"];

/// Relative tolerance of the energy audit run after every scenario.
pub const AUDIT_TOL: f64 = 1e-9;

fn scheme(name: SchemeKind, k: usize, dt: f64, t0: f64, t_final: f64) -> SchemeSection {
    SchemeSection {
        name,
        k,
        dt,
        t_final,
        t0,
        c: None,
        c0: None,
        eta: 0.95,
        exponent_override: None,
        dealias: Dealias::None,
        startup: Startup::Cold,
        substep_level: SubstepLevel::default(),
        cn_denominator: CnDenominator::default(),
    }
}

fn grid(dim: usize, side: f64, modes: usize) -> GridSection {
    GridSection { dim, extents: vec![side; dim], modes: vec![modes; dim] }
}

fn model(kind: ModelKind, params: ModelParams) -> ModelSection {
    ModelSection { kind, forcing: ForcingKind::None, delta: None, params }
}

fn manufactured(mut cfg: RunConfig) -> RunConfig {
    cfg.model.forcing = ForcingKind::Manufactured;
    cfg.scheme.startup = Startup::ExactHistory;
    cfg.initial = InitialCondition::Manufactured { t0: cfg.scheme.t0 };
    cfg
}

/// Default configuration of a named scenario.
pub fn scenario_config(name: &str) -> Result<RunConfig> {
    let base = |model, grid, scheme, initial, snapshot_times: Vec<f64>| RunConfig {
        scenario: Some(name.to_string()),
        model,
        grid,
        scheme,
        initial,
        output: OutputSection { snapshot_times, ..OutputSection::default() },
    };
    let p = ModelParams::default();
    let placeholder = InitialCondition::Constant { value: 0.0 };
    let cfg = match name {
        "ac_caseA" => manufactured(base(
            model(ModelKind::AllenCahn, ModelParams { alpha0: 1e-4, mobility: 1.0, ..p }),
            grid(2, 2.0, 64),
            scheme(SchemeKind::EopSavCn, 2, 0.01, 0.0, 0.5),
            placeholder,
            vec![0.5],
        )),
        "ac_caseB" => base(
            model(ModelKind::AllenCahn, ModelParams { alpha0: 1e-4, mobility: 1.0, ..p }),
            grid(2, 1.0, 128),
            scheme(SchemeKind::EopGsav, 2, 1e-3, 0.0, 200.0),
            InitialCondition::Star { alpha: None },
            vec![10.0, 50.0, 100.0, 200.0],
        ),
        "ch_caseA" => manufactured(base(
            model(ModelKind::CahnHilliard, ModelParams { alpha0: 0.04, mobility: 0.005, epsilon: 1.0, ..p }),
            grid(2, 2.0, 64),
            scheme(SchemeKind::EopSavCn, 2, 0.01, 0.0, 0.5),
            placeholder,
            vec![0.5],
        )),
        "ch_caseB" => base(
            model(ModelKind::CahnHilliard, ModelParams { alpha0: 1.0, mobility: 1e-6, epsilon: 0.01, ..p }),
            grid(2, 2.0, 256),
            scheme(SchemeKind::EopGsav, 2, 1e-3, 0.0, 2.0),
            InitialCondition::CircleArray { count: 9, spacing: 0.2, r0: 0.085, epsilon: None },
            vec![0.0, 1.0, 2.0],
        ),
        "pfc_2d" => base(
            model(ModelKind::Pfc, ModelParams { epsilon: 0.25, mobility: 1.0, beta: 1.0, ..p }),
            grid(2, 800.0, 256),
            scheme(SchemeKind::EopGsav, 2, 0.02, 0.0, 300.0),
            InitialCondition::Crystallites { phi_bar: 0.285, c1: 0.446, c2: 0.66, patches: default_patches() },
            vec![0.0, 100.0, 200.0, 300.0],
        ),
        "pfc_3d" => {
            let mut cfg = base(
                model(ModelKind::Pfc, ModelParams { epsilon: 0.56, mobility: 1.0, beta: 1.0, ..p }),
                grid(3, 50.0, 48),
                scheme(SchemeKind::EopGsav, 2, 0.1, 0.0, 500.0),
                InitialCondition::UniformRandom { mean: 0.2, amplitude: 0.01, seed: 1 },
                vec![500.0],
            );
            cfg.model.delta = Some(0.02);
            cfg
        }
        "ns_caseA" => {
            let mut cfg = manufactured(base(
                model(ModelKind::NavierStokes, ModelParams { nu: 1.0, ..p }),
                grid(2, 2.0, 40),
                scheme(SchemeKind::NsEopGsav, 2, 0.01, 2.0, 3.0),
                placeholder,
                vec![3.0],
            ));
            cfg.scheme.c0 = Some(100.0);
            cfg
        }
        "ns_shear" => base(
            model(ModelKind::NavierStokes, ModelParams { nu: 1e-4, ..p }),
            grid(2, 1.0, 128),
            scheme(SchemeKind::NsEopGsav, 2, 6e-4, 0.0, 1.2),
            InitialCondition::ShearLayer { rho: 30.0, perturbation: 0.05 },
            vec![0.0, 0.6, 1.2],
        ),
        other => {
            return Err(Error::Config(format!("unknown scenario {other:?}; known: {}", SCENARIOS.join(", "))));
        }
    };
    Ok(cfg)
}

/// Records, snapshots and audit results of one run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    /// Initial record first.
    pub records: Vec<EnergyRecord>,
    pub snapshots: Vec<Snapshot>,
    pub violations: Vec<Violation>,
    pub final_state: SchemeState,
}

struct SnapshotTaker {
    pending: Vec<f64>,
    dt: f64,
    name: &'static str,
    taken: Vec<Snapshot>,
}

impl SnapshotTaker {
    fn take(&mut self, st: &SchemeState) {
        let t = st.t();
        let half = 0.5 * self.dt;
        while let Some(&ts) = self.pending.first() {
            if ts > t + half {
                break;
            }
            self.pending.remove(0);
            let snap = match (st.phi(), st.velocity()) {
                (Some(phi), _) => Snapshot::scalar(self.name, t, phi),
                (_, Some(u)) => Snapshot::vector(self.name, t, u),
                _ => continue,
            };
            self.taken.push(snap);
        }
    }
}

impl Observer for SnapshotTaker {
    fn observe(&mut self, st: &SchemeState, _rec: &EnergyRecord) -> Result<()> {
        self.take(st);
        Ok(())
    }
}

/// Runs a validated configuration from `t0` to `T`.
pub fn run_config(cfg: &RunConfig, exec: Execution) -> Result<RunOutcome> {
    cfg.validate().map_err(|(_, e)| e)?;
    let grid = cfg.grid(exec)?;
    let model = cfg.model(&grid)?;
    let scheme = cfg.scheme_config();
    let integrator = Integrator::new(model.clone(), scheme.clone(), cfg.forcing()?)?;
    let initial = make_initial(&cfg.initial_condition(), &model)?;
    let s = &cfg.scheme;
    let mut st = integrator.init_state(initial, s.t0)?;
    if scheme.startup == Startup::ExactHistory {
        integrator.exact_history(&mut st)?;
    }
    let n = steps_for(s.t0, s.t_final, s.dt)?;
    let mut times = cfg.output.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    let mut taker = SnapshotTaker {
        pending: times,
        dt: s.dt,
        name: if model.kind().is_fluid() { "velocity" } else { "phi" },
        taken: Vec::new(),
    };
    // Times already covered by an exact history are sampled at its newest level.
    taker.take(&st);
    let mut records = vec![audit::initial_record(&integrator, &st)];
    let remaining = n.saturating_sub(st.step_index());
    records.extend(integrator.advance(&mut st, remaining, &mut [&mut taker])?);
    let violations = check_run(scheme.kind, &records, AUDIT_TOL);
    Ok(RunOutcome { config: cfg.clone(), records, snapshots: taker.taken, violations, final_state: st })
}

impl RunOutcome {
    /// Writes the energy CSV, snapshots, the effective config and plot
    /// scripts into `dir`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let out = &self.config.output;
        let mut written = Vec::new();
        let csv = dir.join(&out.csv);
        write_energy_csv(&self.records, &csv)?;
        written.push(csv);
        let cfg_path = dir.join("effective_config.toml");
        std::fs::write(&cfg_path, self.config.to_toml()?).map_err(|e| Error::io(&cfg_path, e))?;
        written.push(cfg_path);
        let mut snap_names = Vec::new();
        for (i, snap) in self.snapshots.iter().enumerate() {
            let ext = match out.snapshot_format {
                SnapshotFormat::Savf1 => "savf1",
            };
            let name = format!("{}_{i:03}.{ext}", snap.field_name);
            let path = dir.join(&name);
            snap.write(&path)?;
            snap_names.push(name);
            written.push(path);
        }
        if out.plot_scripts {
            written.push(emit_plot_script(dir, std::slice::from_ref(&out.csv), PlotKind::Energy)?);
            if !snap_names.is_empty() {
                written.push(emit_plot_script(dir, &snap_names, PlotKind::Field)?);
            }
        }
        Ok(written)
    }
}
