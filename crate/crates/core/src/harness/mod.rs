//! Seeded, resumable scaling and CDI studies written as CSV.

mod config;
mod experiments;
mod output;

pub use config::{
    ConfigFile, ExperimentConfig, ExperimentId, ExperimentSection, LinkSection, DEFAULT_MASTER_SEED,
};
pub use experiments::{
    cells, run, run_dense_scaling, run_extended_aseb, run_extended_rseb, run_lattice_cdi_study,
    run_stochastic_convergence, run_with, upper_half, Cell, MIN_FIT_POINTS,
};
pub use output::{csv_path, manifest_path, CellParams, ExperimentResult, ResultRow, SUMMARY_CELL};
