//! Experiment orchestration: configuration, the runners, file output and
//! the reference oracles.

mod config;
mod experiments;
pub mod oracles;
mod output;

pub use config::{ExperimentConfig, ExperimentId, LambdaSpec, MuGrid, ProblemFamily, Range};
pub use experiments::{
    run_constraint_sweep, run_delta_ef_sweep, run_delta_ehc_scan, run_experiment, run_hd_scan, run_lambda_mu_map,
    run_mu_slices, run_p0_vs_maxqd, run_size_scan, trajectory, EhcRecord, ExperimentOutput, HdRecord, P0Record,
    Records, SizeRecord, SweepRecord, Table,
};
pub use output::{default_output_dir, meta_document, write_output};
