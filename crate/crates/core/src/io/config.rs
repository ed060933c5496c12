//! Run configuration: TOML sections `model`, `grid`, `scheme`, `initial`,
//! `output`, an optional top-level `scenario` supplying defaults, and
//! `key = value` overrides.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::scenario_config;
use crate::integrators::{CnDenominator, Forcing, SchemeConfig, SchemeKind, Startup, SubstepLevel};
use crate::models::{ExactSolution, InitialCondition, ModelKind, ModelParams, ModelSpec};
use crate::spectral::{Dealias, PeriodicGrid};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    #[default]
    None,
    Manufactured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default)]
    pub forcing: ForcingKind,
    /// Accepted and echoed but not used by any model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub params: ModelParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub extents: Vec<f64>,
    pub modes: Vec<usize>,
}

fn default_eta() -> f64 {
    0.95
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub name: SchemeKind,
    pub k: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "C0", default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_override: Option<i32>,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub startup: Startup,
    #[serde(default)]
    pub substep_level: SubstepLevel,
    #[serde(default)]
    pub cn_denominator: CnDenominator,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    #[default]
    Savf1,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_csv() -> String {
    "energy.csv".into()
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
    #[serde(default = "yes")]
    pub plot_scripts: bool,
    /// Replaces the seed of random initial data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            csv: default_csv(),
            snapshot_times: Vec::new(),
            snapshot_format: SnapshotFormat::Savf1,
            plot_scripts: true,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub model: ModelSection,
    pub grid: GridSection,
    pub scheme: SchemeSection,
    pub initial: InitialCondition,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn grid(&self, exec: Execution) -> Result<Arc<PeriodicGrid>> {
        let g = &self.grid;
        Ok(PeriodicGrid::new(g.dim, &g.extents, &g.modes)?.with_execution(exec))
    }

    pub fn model(&self, grid: &Arc<PeriodicGrid>) -> Result<ModelSpec> {
        let mut m = ModelSpec::new(self.model.kind, grid, self.model.params)?.with_dealias(self.scheme.dealias);
        if let Some(c) = self.scheme.c {
            m = m.with_c_shift(c)?;
        }
        m.with_c0_shift(self.scheme.c0)
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let s = &self.scheme;
        SchemeConfig {
            kind: s.name,
            k: s.k,
            dt: s.dt,
            eta: s.eta,
            exponent_override: s.exponent_override,
            cn_denominator: s.cn_denominator,
            startup: s.startup,
            substep_level: s.substep_level,
        }
    }

    /// Initial condition with the output seed applied.
    pub fn initial_condition(&self) -> InitialCondition {
        let mut ic = self.initial.clone();
        if let Some(seed) = self.output.seed {
            match &mut ic {
                InitialCondition::UniformRandom { seed: s, .. } | InitialCondition::SmoothRandom { seed: s, .. } => {
                    *s = seed
                }
                _ => {}
            }
        }
        ic
    }

    pub fn forcing(&self) -> Result<Forcing> {
        Ok(match self.model.forcing {
            ForcingKind::None => Forcing::None,
            ForcingKind::Manufactured => Forcing::Manufactured(ExactSolution::for_model(self.model.kind)?),
        })
    }

    /// Semantic checks. Errors carry the dotted key they concern.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, Error)> {
        let s = &self.scheme;
        let g = &self.grid;
        if g.extents.len() != g.dim || g.modes.len() != g.dim {
            return Err(("grid.dim", Error::Config(format!("extents and modes need {} entries", g.dim))));
        }
        PeriodicGrid::new(g.dim, &g.extents, &g.modes).map_err(|e| ("grid.modes", e))?;
        self.scheme_config().validate(self.model.kind).map_err(|e| {
            let msg = e.to_string();
            let key = if msg.contains("k out of range") {
                "scheme.k"
            } else if msg.contains("dt") {
                "scheme.dt"
            } else if msg.contains("eta") {
                "scheme.eta"
            } else if msg.contains("exponent") {
                "scheme.exponent_override"
            } else {
                "scheme.name"
            };
            (key, e)
        })?;
        if !(s.t_final - s.t0 >= s.dt * (1.0 - 1e-12)) {
            return Err((
                "scheme.T",
                Error::Config(format!("need T - t0 ≥ dt (T = {}, t0 = {}, dt = {})", s.t_final, s.t0, s.dt)),
            ));
        }
        crate::harness::steps_for(s.t0, s.t_final, s.dt).map_err(|e| ("scheme.T", e))?;
        self.initial.check_kind(self.model.kind).map_err(|e| ("initial.tag", e))?;
        if let InitialCondition::Manufactured { t0 } = self.initial {
            if t0 != s.t0 {
                return Err((
                    "initial.t0",
                    Error::Config(format!("initial.t0 = {t0} must equal scheme.t0 = {}", s.t0)),
                ));
            }
        }
        if self.model.forcing == ForcingKind::Manufactured {
            ExactSolution::for_model(self.model.kind).map_err(|e| ("model.forcing", e))?;
            if g.dim != 2 {
                return Err(("model.forcing", Error::Config("manufactured forcing needs a 2D grid".into())));
            }
        }
        if s.startup == Startup::ExactHistory && self.model.forcing != ForcingKind::Manufactured {
            return Err(("scheme.startup", Error::Config("exact_history requires manufactured forcing".into())));
        }
        if let Some(t) = self.output.snapshot_times.iter().find(|t| !(**t >= s.t0 && **t <= s.t_final + 1e-12)) {
            return Err(("output.snapshot_times", Error::Config(format!("snapshot time {t} outside [t0, T]"))));
        }
        Ok(())
    }

    /// TOML text of the effective configuration.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (or at top level for an empty section).
pub fn locate_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if !section.is_empty() && current == section && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            let k = k.trim().trim_matches('"');
            if current == section && k == key {
                return Some(i + 1);
            }
        }
    }
    None
}

fn locate_dotted(text: &str, dotted: &str) -> Option<usize> {
    let (section, key) = dotted.rsplit_once('.').unwrap_or(("", dotted));
    locate_key(text, section, key).or_else(|| locate_key(text, section, ""))
}

/// Recursively overlays `top` onto `base`.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `section.key=value`; the value is read as TOML, falling back to a
/// bare string.
fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (path, raw) =
        spec.split_once('=').ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
    let value = match toml::from_str::<Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.trim().to_string()),
    };
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one item");
    let mut cur = table;
    for k in parents {
        cur = match cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(t) => t,
            _ => return Err(Error::Config(format!("override {path}: {k} is not a section"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

const SECTIONS: [&str; 7] = ["", "model", "model.params", "grid", "scheme", "initial", "output"];

/// Section and key of a deserialization failure in a merged table.
///
/// The table is rendered back to TOML and parsed again so the error carries a
/// span; the key at that span is then looked up in the user's text.
fn failing_key(table: &Table) -> Option<(String, String)> {
    let rendered = toml::to_string(table).ok()?;
    let err = toml::from_str::<RunConfig>(&rendered).err()?;
    let line = line_of(&rendered, err.span()?.start);
    let mut section = String::new();
    let mut key = None;
    for raw in rendered.lines().take(line) {
        let l = raw.trim();
        if l.starts_with('[') {
            section = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key = None;
        } else if let Some((k, _)) = l.split_once('=') {
            key = Some(k.trim().trim_matches('"').to_string());
        }
    }
    Some((section, key?))
}

fn backticked(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let end = start + msg[start..].find('`')?;
    Some(&msg[start..end])
}

/// Parses, merges scenario defaults, applies overrides and validates.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: Table = toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => Error::ConfigAt { line: line_of(text, span.start), message: e.message().trim().to_string() },
        None => Error::Config(e.message().trim().to_string()),
    })?;
    let scenario = match table.get("scenario") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            return Err(Error::ConfigAt {
                line: locate_key(text, "", "scenario").unwrap_or(1),
                message: "scenario must be a string".into(),
            })
        }
        None => None,
    };
    let user_snapshots =
        table.get("output").and_then(|o| o.as_table()).is_some_and(|o| o.contains_key("snapshot_times"))
            || overrides.iter().any(|o| o.trim_start().starts_with("output.snapshot_times"));
    if let Some(name) = &scenario {
        let base = scenario_config(name).map_err(|e| Error::ConfigAt {
            line: locate_key(text, "", "scenario").unwrap_or(1),
            message: e.to_string(),
        })?;
        let mut merged: Table = Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        // A different initial tag replaces the scenario's initial table.
        if let (Some(Value::Table(user)), Some(Value::Table(def))) = (table.get("initial"), merged.get("initial")) {
            if user.get("tag").is_some_and(|t| Some(t) != def.get("tag")) {
                merged.remove("initial");
            }
        }
        merge(&mut merged, table);
        table = merged;
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut cfg: RunConfig = Value::Table(table.clone()).try_into().map_err(|e: toml::de::Error| {
        let message = e.message().trim().to_string();
        let line = failing_key(&table)
            .and_then(|(section, key)| locate_key(text, &section, &key))
            .or_else(|| backticked(&message).and_then(|k| SECTIONS.iter().find_map(|s| locate_key(text, s, k))));
        match line {
            Some(line) => Error::ConfigAt { line, message },
            None => Error::Config(message),
        }
    })?;
    if scenario.is_some() && !user_snapshots {
        let (t0, t1) = (cfg.scheme.t0, cfg.scheme.t_final);
        cfg.output.snapshot_times.retain(|t| *t >= t0 && *t <= t1 + 1e-12);
    }
    cfg.validate().map_err(|(key, e)| match locate_dotted(text, key) {
        Some(line) => Error::ConfigAt { line, message: e.to_string() },
        None => e,
    })?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

pub fn load_config(path: &std::path::Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with(&text, overrides)
}
