use proptest::prelude::*;
use savflow::harness::{
    fit_order, halving_ladder, run_config, run_convergence, scenario_config, steps_for, ConvergenceStudy, Reference,
    SCENARIOS,
};
use savflow::integrators::{Forcing, Startup};
use savflow::io::{parse_config, read_energy_csv, Snapshot};
use savflow::models::{InitialCondition, ModelKind, ModelParams};
use savflow::{Execution, ModelSpec, PeriodicGrid, SchemeConfig, SchemeKind};

fn ac(n: usize) -> ModelSpec {
    let g = PeriodicGrid::new(2, &[2.0, 2.0], &[n, n]).unwrap();
    ModelSpec::new(ModelKind::AllenCahn, &g, ModelParams { alpha0: 1e-4, ..Default::default() }).unwrap()
}

#[test]
fn self_reference_agrees_with_manufactured() {
    let ladder = halving_ladder(0.1, 4);
    let scheme = SchemeConfig::new(SchemeKind::EopGsav, 2, 0.1);
    let manufactured = ConvergenceStudy::manufactured(ac(16), scheme.clone(), 0.0, 0.5, ladder.clone()).unwrap();
    let mut fine = manufactured.clone();
    fine.reference = Reference::FineDt(0.1 / 64.0);
    let a = run_convergence(&manufactured).unwrap();
    let b = run_convergence(&fine).unwrap();
    assert!((a.slope - b.slope).abs() <= 0.3, "{} vs {}", a.slope, b.slope);
}

#[test]
fn single_step_error_shrinks_with_dt() {
    let errs: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&dt| {
            let study = ConvergenceStudy::manufactured(
                ac(16),
                SchemeConfig::new(SchemeKind::EopGsav, 1, dt),
                0.0,
                dt,
                vec![dt, dt / 2.0],
            )
            .unwrap();
            run_convergence(&study).unwrap().errors[0]
        })
        .collect();
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn study_validation() {
    let scheme = SchemeConfig::new(SchemeKind::Gsav, 1, 0.1);
    let mut s = ConvergenceStudy::manufactured(ac(8), scheme, 0.0, 0.5, vec![0.1, 0.1]).unwrap();
    assert!(run_convergence(&s).is_err());
    s.dt_ladder = vec![0.1, 0.03];
    assert!(run_convergence(&s).is_err());
    s.dt_ladder = vec![0.1, 0.05];
    s.forcing = Forcing::None;
    assert!(run_convergence(&s).is_err());
    s.reference = Reference::FineDt(0.01);
    // Exact history needs the manufactured solution.
    assert!(run_convergence(&s).is_err());
    s.scheme.startup = Startup::Cold;
    s.initial = InitialCondition::SmoothRandom { mean: 0.0, amplitude: 0.5, max_mode: 3, seed: 1 };
    assert!(run_convergence(&s).is_ok());
}

#[test]
fn steps_for_examples() {
    assert_eq!(steps_for(0.0, 0.5, 0.1).unwrap(), 5);
    assert_eq!(steps_for(2.0, 3.0, 1.0 / 160.0).unwrap(), 160);
    assert!(steps_for(0.0, 0.5, 0.3).is_err());
    assert!(steps_for(0.0, 0.05, 0.1).is_err());
}

proptest! {
    // Exact power laws are recovered by the least-squares fit.
    #[test]
    fn fit_recovers_power_law(p in 0.5f64..5.0, c in 1e-6f64..1e3, rungs in 2usize..7) {
        let dt = halving_ladder(0.2, rungs);
        let errors: Vec<f64> = dt.iter().map(|d| c * d.powf(p)).collect();
        let o = fit_order(&dt, &errors).unwrap();
        prop_assert!((o.slope - p).abs() < 1e-9);
        prop_assert!(o.pairwise.iter().all(|q| (q - p).abs() < 1e-9));
    }
}

#[test]
fn scenario_defaults_follow_the_experiments() {
    let b = scenario_config("ac_caseB").unwrap();
    assert_eq!(b.grid.modes, vec![128, 128]);
    assert_eq!(b.model.params.alpha0, 0.01 * 0.01);
    assert_eq!(b.scheme.dt, 1e-3);
    assert_eq!(b.output.snapshot_times, vec![10.0, 50.0, 100.0, 200.0]);
    let ns = scenario_config("ns_caseA").unwrap();
    assert_eq!((ns.grid.extents.clone(), ns.grid.modes.clone()), (vec![2.0, 2.0], vec![40, 40]));
    assert_eq!((ns.scheme.t0, ns.scheme.t_final, ns.model.params.nu), (2.0, 3.0, 1.0));
    let pfc = scenario_config("pfc_2d").unwrap();
    match pfc.initial {
        InitialCondition::Crystallites { patches, .. } => {
            let centres: Vec<[f64; 2]> = patches.iter().map(|p| p.center).collect();
            assert_eq!(centres, vec![[350.0, 400.0], [200.0, 200.0], [600.0, 300.0]]);
            let angles: Vec<f64> = patches.iter().map(|p| p.angle).collect();
            let q = std::f64::consts::FRAC_PI_4;
            assert_eq!(angles, vec![-q, 0.0, q]);
        }
        other => panic!("{other:?}"),
    }
    for name in SCENARIOS {
        let cfg = scenario_config(name).unwrap();
        assert!(cfg.validate().is_ok(), "{name}");
    }
    assert!(scenario_config("ac_caseC").is_err());
}

#[test]
fn run_artifacts_round_trip() {
    let text = "scenario = \"ac_caseB\"\n[grid]\ndim = 2\nextents = [1.0, 1.0]\nmodes = [32, 32]\n\
                [scheme]\nT = 0.02\n[output]\nsnapshot_times = [0.0, 0.01, 0.02]\n";
    let cfg = parse_config(text).unwrap();
    let out = run_config(&cfg, Execution::default()).unwrap();
    assert_eq!(out.records.len(), 21);
    assert_eq!(out.snapshots.len(), 3);
    assert!(out.violations.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let written = out.write(dir.path()).unwrap();
    assert!(written.iter().all(|p| p.is_file()));
    let back = read_energy_csv(&dir.path().join("energy.csv")).unwrap();
    assert_eq!(back.len(), out.records.len());
    for (a, b) in back.iter().zip(&out.records) {
        assert_eq!(a.e_modified.to_bits(), b.e_modified.to_bits());
        assert_eq!(a.step, b.step);
    }
    let snap = Snapshot::read(&dir.path().join("phi_002.savf1")).unwrap();
    assert_eq!(snap, out.snapshots[2]);
    assert!((snap.time - 0.02).abs() < 1e-12);
    assert_eq!(snap.components[0], out.final_state.phi().unwrap().values());
    let provenance = std::fs::read_to_string(dir.path().join("effective_config.toml")).unwrap();
    assert_eq!(parse_config(&provenance).unwrap(), cfg);
}
