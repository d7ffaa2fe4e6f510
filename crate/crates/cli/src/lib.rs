//! Experiment runner for metric random forests: runs a grid of simulated
//! datasets through one or more split rules and records timing, solver
//! calls and test error as CSV.

pub mod cli;
pub mod grid;

pub use grid::{
    derive_seed, dump_grid, mse, run_grid, run_grid_with, run_task, ExperimentRecord, GridConfig,
    Task, CSV_HEADER,
};
