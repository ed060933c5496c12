//! Run configuration, energy CSV, SAVF1 snapshots and plot scripts.

mod config;
mod csv;
mod plot;
mod snapshot;

pub use config::{
    load_config, locate_key, parse_config, parse_config_with, ForcingKind, GridSection, ModelSection, OutputSection,
    RunConfig, SchemeSection, SnapshotFormat,
};
pub use csv::{
    format_comparison_csv, format_comparison_energy_csv, format_convergence_csv, format_energy_csv, parse_energy_csv,
    read_energy_csv, write_energy_csv, ENERGY_HEADER,
};
pub use plot::{emit_plot_script, plot_script, PlotKind};
pub use snapshot::{Snapshot, MAGIC};

#[cfg(test)]
mod tests;
