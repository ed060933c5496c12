use super::*;
use crate::audit::{DiagnosticTag, EnergyRecord};
use crate::error::Error;
use crate::exec::Execution;
use crate::integrators::{SchemeKind, Startup};
use crate::models::{InitialCondition, ModelKind};
use crate::spectral::{Dealias, PeriodicGrid, ScalarField, VectorField};

const MINIMAL_AC: &str = r#"
[model]
kind = "allen_cahn"
forcing = "manufactured"

[model.params]
alpha0 = 1e-4

[grid]
dim = 2
extents = [2.0, 2.0]
modes = [32, 32]

[scheme]
name = "eop_sav_cn"
k = 2
dt = 0.01
T = 0.5
startup = "exact_history"

[initial]
tag = "manufactured"
"#;

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(MINIMAL_AC).unwrap();
    assert_eq!(cfg.scheme.eta, 0.95);
    assert_eq!(cfg.scheme.dealias, Dealias::None);
    assert_eq!(cfg.scheme.name, SchemeKind::EopSavCn);
    assert_eq!(cfg.output.csv, "energy.csv");
    assert!(cfg.output.plot_scripts);
    assert_eq!(cfg.model.params.mobility, 1.0);
}

#[test]
fn round_trip_through_toml() {
    let cfg = parse_config(MINIMAL_AC).unwrap();
    let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg, again);
    for name in crate::harness::SCENARIOS {
        let cfg = crate::harness::scenario_config(name).unwrap();
        assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg, "{name}");
    }
}

#[test]
fn k_out_of_range_is_reported_at_its_line() {
    let text = MINIMAL_AC.replace("name = \"eop_sav_cn\"", "name = \"eop_gsav\"").replace("k = 2", "k = 5");
    match parse_config(&text) {
        Err(Error::ConfigAt { line, message }) => {
            assert!(message.contains("k out of range 1..4"), "{message}");
            assert_eq!(text.lines().nth(line - 1).unwrap().trim(), "k = 5");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_key_has_a_line_number() {
    let text = MINIMAL_AC.replace("T = 0.5", "T = 0.5\nbogus = 3");
    match parse_config(&text) {
        Err(Error::ConfigAt { line, message }) => {
            assert!(message.contains("bogus"), "{message}");
            assert_eq!(text.lines().nth(line - 1).unwrap().trim(), "bogus = 3");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_and_mistyped_keys_fail() {
    let missing = MINIMAL_AC.replace("dt = 0.01\n", "");
    assert!(matches!(parse_config(&missing), Err(Error::ConfigAt { .. } | Error::Config(_))));
    let typed = MINIMAL_AC.replace("dt = 0.01", "dt = \"fast\"");
    match parse_config(&typed) {
        Err(Error::ConfigAt { line, .. }) => assert_eq!(typed.lines().nth(line - 1).unwrap().trim(), "dt = \"fast\""),
        other => panic!("{other:?}"),
    }
    let syntax = MINIMAL_AC.replace("k = 2", "k = = 2");
    assert!(matches!(parse_config(&syntax), Err(Error::ConfigAt { .. })));
}

#[test]
fn semantic_checks() {
    let bad_t = MINIMAL_AC.replace("T = 0.5", "T = 0.005");
    assert!(parse_config(&bad_t).unwrap_err().is_config());
    let bad_dt = MINIMAL_AC.replace("dt = 0.01", "dt = -0.01");
    assert!(parse_config(&bad_dt).unwrap_err().is_config());
    let not_multiple = MINIMAL_AC.replace("dt = 0.01", "dt = 0.03");
    assert!(parse_config(&not_multiple).unwrap_err().is_config());
}

#[test]
fn scenario_defaults_and_overrides() {
    let text = "scenario = \"ac_caseA\"\n[grid]\ndim = 2\nextents = [2.0, 2.0]\nmodes = [16, 16]\n";
    let cfg = parse_config_with(text, &["scheme.T=0.1".into(), "scheme.name=eop_gsav".into()]).unwrap();
    assert_eq!(cfg.grid.modes, vec![16, 16]);
    assert_eq!(cfg.scheme.t_final, 0.1);
    assert_eq!(cfg.scheme.name, SchemeKind::EopGsav);
    assert_eq!(cfg.scheme.startup, Startup::ExactHistory);
    assert_eq!(cfg.model.kind, ModelKind::AllenCahn);

    let other_ic = "scenario = \"pfc_3d\"\n[initial]\ntag = \"smooth_random\"\nseed = 4\n";
    let cfg = parse_config(other_ic).unwrap();
    assert!(matches!(cfg.initial, InitialCondition::SmoothRandom { seed: 4, .. }));

    assert!(parse_config("scenario = \"nope\"\n").unwrap_err().is_config());
}

#[test]
fn seed_override_reaches_random_data() {
    let cfg = parse_config_with("scenario = \"pfc_3d\"\n", &["output.seed=9".into()]).unwrap();
    assert!(matches!(cfg.initial_condition(), InitialCondition::UniformRandom { seed: 9, .. }));
}

fn sample_records() -> Vec<EnergyRecord> {
    (0..4)
        .map(|i| EnergyRecord {
            step: i,
            t: 0.1 * i as f64,
            e_original: 1.0 / 3.0 + i as f64,
            e_modified: std::f64::consts::PI * 1e-300,
            r: -2.5e17,
            tag: DiagnosticTag::EMinusRPrev,
            diagnostic: if i % 2 == 0 { -1e-20 } else { 0.1 + 0.2 },
            dissipation_residual: f64::MIN_POSITIVE,
            branch: None,
        })
        .collect()
}

#[test]
fn csv_round_trips_exactly() {
    let recs = sample_records();
    let text = format_energy_csv(&recs);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ENERGY_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.split(',').count() == 8));
    let back = parse_energy_csv(&text).unwrap();
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!(a.step, b.step);
        for (x, y) in [
            (a.t, b.t),
            (a.e_original, b.e_original),
            (a.e_modified, b.e_modified),
            (a.r, b.r),
            (a.diagnostic, b.diagnostic),
            (a.dissipation_residual, b.dissipation_residual),
        ] {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(format_energy_csv(&recs[..1]).lines().count(), 2);
    assert!(parse_energy_csv("a,b\n").is_err());
}

#[test]
fn csv_writer_rejects_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    assert!(write_energy_csv(&[], &dir.path().join("e.csv")).is_err());
    let p = dir.path().join("e.csv");
    write_energy_csv(&sample_records(), &p).unwrap();
    assert_eq!(read_energy_csv(&p).unwrap().len(), 4);
}

#[test]
fn snapshot_round_trip() {
    let g = PeriodicGrid::new(2, &[2.0, 1.0], &[8, 4]).unwrap().with_execution(Execution::Sequential);
    let f = ScalarField::from_fn(&g, |x| (x[0] * 3.0).sin() + x[1] / 7.0);
    let snap = Snapshot::scalar("phi", 0.25, &f);
    let bytes = snap.to_bytes();
    assert_eq!(&bytes[..5], MAGIC);
    assert_eq!(bytes.len(), 5 + 4 + 4 + 2 * 8 + 2 * 8 + 8 + 4 + 3 + 32 * 8);
    let back = Snapshot::from_bytes(&bytes).unwrap();
    assert_eq!(back, snap);
    assert_eq!(back.components[0], f.values());
    assert!(back.grid().unwrap().same_shape(&g));

    let u = VectorField::new(vec![f.clone(), f.scaled(-2.0)]).unwrap();
    let vs = Snapshot::vector("velocity", 1.0, &u);
    assert_eq!(Snapshot::from_bytes(&vs.to_bytes()).unwrap(), vs);

    assert!(Snapshot::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(Snapshot::from_bytes(&wrong).is_err());
}

#[test]
fn plot_scripts_are_deterministic_and_relative() {
    let inputs: Vec<String> = (1..=4).map(|k| format!("eop_gsav_k{k}.csv")).collect();
    let a = plot_script(PlotKind::Convergence, &inputs).unwrap();
    assert_eq!(a, plot_script(PlotKind::Convergence, &inputs).unwrap());
    assert!(a.contains("for p in (1, 2, 3, 4)"));
    assert!(inputs.iter().all(|i| a.contains(i.as_str())));
    let e = plot_script(PlotKind::Energy, &["energy.csv".into()]).unwrap();
    assert!(e.contains("twinx") && e.contains("E_modified"));
    assert!(plot_script(PlotKind::Field, &["/abs/x.savf1".into()]).is_err());
    assert!(plot_script(PlotKind::Field, &[]).is_err());

    let dir = tempfile::tempdir().unwrap();
    assert!(emit_plot_script(dir.path(), &["missing.csv".into()], PlotKind::Energy).is_err());
}
