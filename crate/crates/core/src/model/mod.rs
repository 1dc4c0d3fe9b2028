//! Problem instances, seeded generators and exhaustive classical evaluation.

mod diagonal;
mod instance;
mod io;
mod spin;

pub use diagonal::{
    build_diagonal, build_diagonal_capped, DiagonalProblem, ProblemKind, DEFAULT_MAX_VARIABLES, GROUND_ATOL,
    OPTIMALITY_RTOL,
};
pub use instance::{
    augmented_energy, generate_gbp, generate_ising, generate_qkp, pair_count, pair_offset, slack_bit_count,
    upper_offset, Evaluation, GbpInstance, Instance, IsingInstance, IsingKind, QkpInstance,
};
pub use io::{instance_from_json, instance_to_json};
pub use spin::SpinConfiguration;
