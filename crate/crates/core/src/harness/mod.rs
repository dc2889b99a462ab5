//! Named experiments, parallel sweeps and result persistence.

mod calibration;
mod config;
mod experiment;
mod output;
mod sweep;

pub use calibration::{
    calibration_report, load_distributions, scrolling_dynamics_experiment, CalibrationReport, ConditionSummary,
    ScrollTauRow,
};
pub use config::{
    fig3_alpha_grid, fig3_mu_grid, AnalysisConfig, CalibrationConfig, ExperimentConfig, GridConfig, NetworkConfig,
    RunConfig, Scale, ScrollingConfig,
};
pub use experiment::{run_experiment, ExperimentName};
pub use output::{opt, CellSeeds, FileEntry, Manifest, OutputDir};
pub use sweep::{
    grid_cells, log2_histogram, mean_std, run_sweep, sum_histograms, Cell, ReplicaSummary, SweepOptions, SweepOutput,
    SweepResult,
};
