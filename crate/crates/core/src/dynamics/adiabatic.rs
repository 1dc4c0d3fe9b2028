//! Adiabatic-limit trajectories: the instantaneous ground state of `H(s)` at
//! every grid point, by exact diagonalization.

use super::schedule::AnnealSchedule;
use super::system::{AnnealingSystem, FullSpace};
use super::trajectory::{uniform_grid, Series, TargetSet, TauMode, Trajectory, TrajectoryMeta};
use crate::error::Result;
use crate::model::DiagonalProblem;
use crate::spectrum::LEVEL_TOL;

/// Relative gap below which an instantaneous ground level counts as degenerate.
const DEGENERACY_RTOL: f64 = 1e-12;

pub fn adiabatic_trajectory(diag: &DiagonalProblem, targets: &[TargetSet], grid_points: usize) -> Result<Trajectory> {
    adiabatic_system(&FullSpace::new(diag), targets, grid_points)
}

/// Ground-state probabilities of every target at `grid_points` uniform `s`.
///
/// At `s = 0` the ground state is the uniform initial state. For `s < 1` the
/// driver term makes the ground state unique and positive.
/// At `s = 1` the Hamiltonian is diagonal; a degenerate classical ground level
/// resolves to its lowest basis index and is counted in the metadata.
pub fn adiabatic_system<S: AnnealingSystem + ?Sized>(
    sys: &S,
    targets: &[TargetSet],
    grid_points: usize,
) -> Result<Trajectory> {
    TargetSet::check(targets, sys.dim())?;
    let grid = uniform_grid(grid_points)?;
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); targets.len()];
    let mut degenerate_points = 0;
    let mut probs = vec![0.0; sys.dim()];

    for &s in &grid {
        let (a, b) = (AnnealSchedule::a(s), AnnealSchedule::b(s));
        if b == 0.0 {
            // pure driver: the ground state is the initial state, exactly
            for (p, v) in probs.iter_mut().zip(sys.initial_amplitudes()) {
                *p = v.norm_sqr();
            }
        } else if a == 0.0 {
            let energies = sys.energies();
            let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
            let ground: Vec<usize> = (0..energies.len()).filter(|&z| energies[z] - min <= LEVEL_TOL).collect();
            if ground.len() > 1 {
                log::warn!("classical ground level is {}-fold degenerate; using state {}", ground.len(), ground[0]);
                degenerate_points += 1;
            }
            probs.iter_mut().for_each(|p| *p = 0.0);
            probs[ground[0]] = 1.0;
        } else {
            let eig = sys.lowest_eigenpair(a, b)?;
            if eig.gap <= DEGENERACY_RTOL * eig.value.abs().max(1.0) {
                log::warn!("instantaneous ground state at s = {s} is degenerate (gap {:e})", eig.gap);
                degenerate_points += 1;
            }
            for (p, v) in probs.iter_mut().zip(&eig.vector) {
                *p = v * v;
            }
        }
        for (v, t) in values.iter_mut().zip(targets) {
            v.push(t.states.iter().map(|&z| probs[z]).sum());
        }
    }

    let series = targets
        .iter()
        .zip(values)
        .map(|(t, v)| Series { label: t.label.clone(), values: v })
        .collect();
    let meta = TrajectoryMeta { degenerate_points, ..Default::default() };
    Ok(Trajectory { mode: TauMode::Static, grid, series, meta })
}
