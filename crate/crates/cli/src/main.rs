//! `savflow` command line: `run`, `converge` and `compare`.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures (including energy-audit violations), 1 for I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use savflow::audit::{compare_runs, EnergyRecord};
use savflow::harness::{run_config, run_convergence, ConvergenceStudy, OrderEstimate, Reference, RunOutcome};
use savflow::io::{
    emit_plot_script, format_comparison_csv, format_comparison_energy_csv, format_convergence_csv, load_config,
    write_energy_csv, ForcingKind, PlotKind, RunConfig,
};
use savflow::{Error, Execution, Result, SchemeKind};

#[derive(Parser)]
#[command(name = "savflow", version, about = "SAV-family gradient-flow solver on periodic Fourier grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write energy CSV, snapshots and plot scripts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `section.key=value`, repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory; defaults to `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observed order over a ladder of time steps.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        dt_ladder: Vec<f64>,
        /// Self-reference step for unforced problems.
        #[arg(long)]
        reference_dt: Option<f64>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several schemes (`name` or `name:k`) on one configuration.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        schemes: Vec<String>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_config() => 2,
        Error::Numerical { .. } | Error::SingularSymbol { .. } | Error::GridMismatch => 3,
        _ => 1,
    }
}

/// Reads `SAVFLOW_THREADS` and sizes the global pool.
fn execution() -> Result<Execution> {
    let Ok(raw) = std::env::var("SAVFLOW_THREADS") else {
        return Ok(Execution::default());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("SAVFLOW_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 1 {
        return Ok(Execution::Sequential);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    Ok(Execution::Parallel)
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.dir.clone())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: PathBuf, text: String) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn audit_failure(label: &str, outcome: &RunOutcome) -> Result<()> {
    match outcome.violations.first() {
        None => Ok(()),
        Some(v) => Err(Error::Numerical {
            step: v.step,
            message: format!(
                "{label}: {} energy-audit violation(s); first: {} ({})",
                outcome.violations.len(),
                v.check,
                v.detail
            ),
        }),
    }
}

fn run(config: &Path, overrides: &[String], out: Option<PathBuf>, exec: Execution) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let dir = out_dir(&cfg, out);
    let outcome = run_config(&cfg, exec)?;
    outcome.write(&dir)?;
    let last = outcome.records.last().expect("initial record");
    println!(
        "{} k={} dt={}: {} steps to t={}, E_original={:.10e}, E_modified={:.10e}, {} snapshot(s) in {}",
        cfg.scheme.name,
        cfg.scheme.k,
        cfg.scheme.dt,
        outcome.records.len() - 1,
        last.t,
        last.e_original,
        last.e_modified,
        outcome.snapshots.len(),
        dir.display()
    );
    audit_failure(cfg.scheme.name.name(), &outcome)
}

fn print_orders(o: &OrderEstimate) {
    for (i, (dt, e)) in o.dt.iter().zip(&o.errors).enumerate() {
        match o.pairwise.get(i) {
            Some(p) => println!("  dt={dt:<12} error={e:.6e} order={p:.3}"),
            None => println!("  dt={dt:<12} error={e:.6e}"),
        }
    }
    println!("  fitted order {:.4}", o.slope);
}

fn converge(
    config: &Path,
    ladder: Vec<f64>,
    reference_dt: Option<f64>,
    overrides: &[String],
    out: Option<PathBuf>,
    exec: Execution,
) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let dir = out_dir(&cfg, out);
    let grid = cfg.grid(exec)?;
    let model = cfg.model(&grid)?;
    let reference = match (cfg.model.forcing, reference_dt) {
        (_, Some(dt)) => Reference::FineDt(dt),
        (ForcingKind::Manufactured, None) => Reference::Manufactured,
        (ForcingKind::None, None) => {
            return Err(Error::Config("unforced problems need --reference-dt".into()));
        }
    };
    let study = ConvergenceStudy {
        model,
        scheme: cfg.scheme_config(),
        initial: cfg.initial_condition(),
        forcing: cfg.forcing()?,
        t0: cfg.scheme.t0,
        t_final: cfg.scheme.t_final,
        dt_ladder: ladder,
        reference,
    };
    let estimate = run_convergence(&study)?;
    create_dir(&dir)?;
    let name = format!("{}_k{}.csv", cfg.scheme.name, cfg.scheme.k);
    write(dir.join(&name), format_convergence_csv(&estimate))?;
    write(dir.join("effective_config.toml"), cfg.to_toml()?)?;
    if cfg.output.plot_scripts {
        emit_plot_script(&dir, &[name], PlotKind::Convergence)?;
    }
    println!("{} k={}:", cfg.scheme.name, cfg.scheme.k);
    print_orders(&estimate);
    Ok(())
}

fn parse_scheme(spec: &str, default_k: usize) -> Result<(SchemeKind, usize)> {
    let (name, k) = match spec.split_once(':') {
        Some((n, k)) => {
            let k = k.trim().parse().map_err(|_| Error::Config(format!("bad order in {spec:?}")))?;
            (n, k)
        }
        None => (spec, default_k),
    };
    let kind = SchemeKind::parse(name)?;
    let k = if kind.is_cn() { 2 } else { k };
    Ok((kind, k))
}

fn compare(
    config: &Path,
    schemes: &[String],
    overrides: &[String],
    out: Option<PathBuf>,
    exec: Execution,
) -> Result<()> {
    let base = load_config(config, overrides)?;
    let dir = out_dir(&base, out);
    create_dir(&dir)?;
    let mut runs: Vec<(String, Vec<EnergyRecord>)> = Vec::new();
    let mut outcomes = Vec::new();
    for spec in schemes {
        let (kind, k) = parse_scheme(spec, base.scheme.k)?;
        let mut cfg = base.clone();
        cfg.scheme.name = kind;
        cfg.scheme.k = k;
        cfg.validate().map_err(|(key, e)| Error::Config(format!("{spec} ({key}): {e}")))?;
        let label = format!("{}_k{}", kind, k);
        let outcome = run_config(&cfg, exec)?;
        write_energy_csv(&outcome.records, &dir.join(format!("{label}.csv")))?;
        runs.push((label.clone(), outcome.records.clone()));
        outcomes.push((label, outcome));
    }
    let cmp = compare_runs(&runs)?;
    write(dir.join("comparison.csv"), format_comparison_csv(&cmp))?;
    write(dir.join("comparison_energy.csv"), format_comparison_energy_csv(&cmp))?;
    write(dir.join("effective_config.toml"), base.to_toml()?)?;
    if base.output.plot_scripts {
        let csvs: Vec<String> = runs.iter().map(|(l, _)| format!("{l}.csv")).collect();
        emit_plot_script(&dir, &csvs, PlotKind::Energy)?;
    }
    for (i, label) in cmp.labels.iter().enumerate() {
        let last = runs[i].1.last().expect("initial record");
        println!(
            "{label:<16} E_modified(T)={:.10e}  max|ΔE_modified|={:.3e}  max|Δ{}|={:.3e}",
            last.e_modified,
            cmp.max_energy_diff[i],
            cmp.tags[i].name(),
            cmp.max_diagnostic_diff[i]
        );
    }
    for (label, outcome) in &outcomes {
        audit_failure(label, outcome)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execution().and_then(|exec| match cli.command {
        Command::Run { config, overrides, out } => run(&config, &overrides, out, exec),
        Command::Converge { config, dt_ladder, reference_dt, overrides, out } => {
            converge(&config, dt_ladder, reference_dt, &overrides, out, exec)
        }
        Command::Compare { config, schemes, overrides, out } => compare(&config, &schemes, &overrides, out, exec),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("savflow: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
