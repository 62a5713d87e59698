//! Experiment driver: run configuration, the time loop with snapshots and
//! blow-up detection, the studies built on it, and CSV output.

mod config;
mod output;
mod runner;
mod studies;

pub use config::{DtPolicy, RunConfig, Scheme};
pub use output::{
    write_comparison_csv, write_convergence_csv, write_evolution_csv, write_snapshot_csv,
    write_sweep_csv,
};
pub use runner::{run, BlowUp, Diagnostics, Simulation, Snapshot, Trajectory, BLOW_UP_LIMIT};
pub use studies::{
    comparison_lineup, convergence_study, evolution_study, regime_sweep, relative_l2,
    scheme_comparison, ComparisonReport, ConvergenceReport, ConvergenceRow, EvolutionReport,
    SweepEntry, SweepReport,
};
