//! Synthetic experiments: signal generation, seeded trials, phase grids,
//! timing runs and CSV export.

mod bench;
mod config;
mod export;
mod grid;
mod recipes;
mod signal;
mod trial;

pub use config::{ExperimentConfig, PhaseSettings};
pub use bench::{run_benchmark, BenchRow, BENCH_REPEATS};
pub use export::{
    export_bench, export_grid, export_trials, read_grid, read_trials, write_bench_to, write_grid_to,
    write_trials_to,
};
pub use grid::{run_phase_grid, trial_seed, PhaseCell, PhaseGrid};
pub use recipes::{recipe, Recipe, RECIPE_NAMES};
pub use signal::{generate_signal, Signal};
pub use trial::{
    build_instance, run_trial, run_trial_with_result, SolverSettings, TrialRecord, TrialSpec,
};
