//! Quantum annealing in the full computational basis: matrix-free Hamiltonian
//! application, finite-time evolution and adiabatic-limit tracking.

mod adiabatic;
mod evolve;
mod schedule;
mod state;
mod system;
mod trajectory;

pub use adiabatic::{adiabatic_system, adiabatic_trajectory};
pub use evolve::{default_step, evolve, evolve_system, EvolveOptions, Splitting};
pub use schedule::AnnealSchedule;
pub use state::{initial_state, BasisKind, QuantumState, MAX_FULL_QUBITS, NORM_TOL};
pub use system::{apply_hamiltonian, dense_hamiltonian, dense_lowest_eigenpair, AnnealingSystem, FullSpace, DENSE_EIGEN_MAX_QUBITS};
pub use trajectory::{uniform_grid, Series, TargetSet, TauMode, Trajectory, TrajectoryMeta};
