//! Sweep grid, per-cell train/evaluate runs, resumable sweeps and ranked
//! result tables.

mod cell;
mod circular;
mod grid;
mod report;
mod sweep;

pub use cell::{
    evaluate_model, run_cell, train_cell, CellMetrics, CellStatus, RunSettings, SweepData, SweepResult, TrainedCell,
};
pub use circular::{angular_distance, circular_mae};
pub use grid::{GridCell, SweepConfig, SweepGrid};
pub use report::{format_table, rank_results, write_report_csv, Metric, RankedRow};
pub use sweep::{read_journal, run_sweep, SweepOptions};
