//! Matplotlib scripts for energy traces, log-log convergence plots and field
//! contours. Scripts reference inputs relative to their own directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Energy,
    Convergence,
    Field,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Energy => "energy",
            PlotKind::Convergence => "convergence",
            PlotKind::Field => "field",
        }
    }
}

const PRELUDE: &str = "\
import os
import matplotlib
matplotlib.use(\"Agg\")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def path(name):
    return os.path.join(HERE, name)
";

const ENERGY: &str = "

def read(name):
    cols = {}
    with open(path(name)) as f:
        header = f.readline().strip().split(\",\")
        for h in header:
            cols[h] = []
        for line in f:
            for h, v in zip(header, line.strip().split(\",\")):
                cols[h].append(v)
    return cols


for name in INPUTS:
    c = read(name)
    t = [float(v) for v in c[\"t\"]]
    fig, ax = plt.subplots()
    ax.plot(t, [float(v) for v in c[\"E_original\"]], label=\"E_original\")
    ax.set_xlabel(\"t\")
    ax.set_ylabel(\"E_original\")
    ax2 = ax.twinx()
    ax2.plot(t, [float(v) for v in c[\"E_modified\"]], \"--\", color=\"tab:red\", label=\"E_modified\")
    ax2.set_ylabel(\"E_modified\")
    fig.legend(loc=\"upper right\")
    fig.tight_layout()
    fig.savefig(path(os.path.splitext(name)[0] + \"_energy.png\"), dpi=150)
    plt.close(fig)
";

const CONVERGENCE: &str = "

for name in INPUTS:
    dt, err = [], []
    with open(path(name)) as f:
        f.readline()
        for line in f:
            cols = line.strip().split(\",\")
            dt.append(float(cols[0]))
            err.append(float(cols[1]))
    fig, ax = plt.subplots()
    ax.loglog(dt, err, \"o-\", label=os.path.splitext(name)[0])
    for p in (1, 2, 3, 4):
        ref = [err[0] * (d / dt[0]) ** p for d in dt]
        ax.loglog(dt, ref, \":\", color=\"gray\", label=\"order %d\" % p)
    ax.set_xlabel(\"dt\")
    ax.set_ylabel(\"L2 error\")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path(os.path.splitext(name)[0] + \"_convergence.png\"), dpi=150)
    plt.close(fig)
";

const FIELD: &str = "
import struct
import numpy as np


def read_savf1(name):
    with open(path(name), \"rb\") as f:
        data = f.read()
    assert data[:5] == b\"SAVF1\"
    dim, ncomp = struct.unpack_from(\"<II\", data, 5)
    off = 13
    modes = struct.unpack_from(\"<%dQ\" % dim, data, off)
    off += 8 * dim
    extents = struct.unpack_from(\"<%dd\" % dim, data, off)
    off += 8 * dim
    (time,) = struct.unpack_from(\"<d\", data, off)
    off += 8
    (n,) = struct.unpack_from(\"<I\", data, off)
    off += 4
    field = data[off:off + n].decode()
    off += n
    payload = np.frombuffer(data, dtype=\"<f8\", offset=off).reshape((ncomp,) + tuple(modes))
    return modes, extents, time, field, payload


for name in INPUTS:
    modes, extents, time, field, payload = read_savf1(name)
    values = payload[0]
    while values.ndim > 2:
        values = values[..., values.shape[-1] // 2]
    if values.ndim == 1:
        values = values[:, None]
    x = np.linspace(0.0, extents[0], values.shape[0], endpoint=False)
    y = np.linspace(0.0, extents[-1], values.shape[1], endpoint=False)
    fig, ax = plt.subplots()
    cs = ax.contourf(x, y, values.T, 40, cmap=\"jet\")
    fig.colorbar(cs)
    ax.set_aspect(\"equal\")
    ax.set_title(\"%s, t = %g\" % (field, time))
    fig.tight_layout()
    fig.savefig(path(os.path.splitext(name)[0] + \".png\"), dpi=150)
    plt.close(fig)
";

/// Script text for `inputs`, given relative to the script's directory.
pub fn plot_script(kind: PlotKind, inputs: &[String]) -> Result<String> {
    if inputs.is_empty() {
        return Err(Error::Config(format!("{} plot needs at least one input", kind.name())));
    }
    if let Some(p) = inputs.iter().find(|p| Path::new(p).is_absolute()) {
        return Err(Error::Config(format!("plot input {p} must be relative")));
    }
    let mut out = String::from(PRELUDE);
    out.push_str("\nINPUTS = [\n");
    for p in inputs {
        let _ = writeln!(out, "    {:?},", p);
    }
    out.push_str("]\n");
    out.push_str(match kind {
        PlotKind::Energy => ENERGY,
        PlotKind::Convergence => CONVERGENCE,
        PlotKind::Field => FIELD,
    });
    Ok(out)
}

/// Writes `plot_<kind>.py` into `dir`. Inputs are file names inside `dir`
/// and must exist.
pub fn emit_plot_script(dir: &Path, inputs: &[String], kind: PlotKind) -> Result<PathBuf> {
    for p in inputs {
        let full = dir.join(p);
        if !full.is_file() {
            return Err(Error::Config(format!("plot input {} does not exist", full.display())));
        }
    }
    let text = plot_script(kind, inputs)?;
    let path = dir.join(format!("plot_{}.py", kind.name()));
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
