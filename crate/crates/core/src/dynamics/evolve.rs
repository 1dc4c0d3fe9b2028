//! Finite-time Schrödinger evolution by exactly unitary operator splitting.
//!
//! `H(t) = A(t) D + B(t) E` splits into a driver part and a diagonal part
//! whose flows are both exact: the diagonal flow over `[t1, t2]` is the phase
//! `exp(-i E int B dt)` and the driver flow (with time frozen) is
//! `exp(-i A h D)`. A symmetric Strang step, with the diagonal part carrying
//! the clock, is composed into a fourth-order method. Every step is unitary,
//! so the norm is conserved to rounding error.

use num_complex::Complex64;

use super::schedule::AnnealSchedule;
use super::state::{set_probability, NORM_TOL};
use super::system::{AnnealingSystem, FullSpace};
use super::trajectory::{uniform_grid, Series, TargetSet, TauMode, Trajectory, TrajectoryMeta};
use crate::error::{Error, Result};
use crate::model::DiagonalProblem;

/// Fourth-order compositions of the Strang step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Three-stage triple jump.
    Yoshida4,
    /// Five-stage Suzuki fractal; smaller error constant than the triple jump.
    #[default]
    Suzuki4,
}

impl Splitting {
    fn stages(self) -> Vec<f64> {
        match self {
            Splitting::Yoshida4 => {
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                vec![w1, 1.0 - 2.0 * w1, w1]
            }
            Splitting::Suzuki4 => {
                let p = 1.0 / (4.0 - 4f64.cbrt());
                vec![p, p, 1.0 - 4.0 * p, p, p]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    /// Maximum time step; defaults to [`default_step`].
    pub step: Option<f64>,
    pub splitting: Splitting,
}

/// `min(0.01, tau / 10^4)`.
pub fn default_step(tau: f64) -> f64 {
    0.01f64.min(tau / 1e4)
}

struct Propagator<'a, S: ?Sized> {
    sys: &'a S,
    schedule: AnnealSchedule,
    /// Start of the diagonal flow not yet applied.
    pending_from: f64,
}

impl<S: AnnealingSystem + ?Sized> Propagator<'_, S> {
    fn flush_diagonal(&mut self, psi: &mut [Complex64], until: f64) {
        if until == self.pending_from {
            return;
        }
        let phase = self.schedule.b_integral(self.pending_from, until);
        for (x, &e) in psi.iter_mut().zip(self.sys.energies()) {
            let (s, c) = (-e * phase).sin_cos();
            *x *= Complex64::new(c, s);
        }
        self.pending_from = until;
    }

    /// One Strang step of length `h` starting at `t`; returns the new time.
    fn strang(&mut self, psi: &mut [Complex64], t: f64, h: f64) -> f64 {
        let mid = t + 0.5 * h;
        self.flush_diagonal(psi, mid);
        let a = AnnealSchedule::a(mid / self.schedule.tau());
        self.sys.propagate_driver(a * h, psi);
        t + h
    }
}

pub fn evolve(
    diag: &DiagonalProblem,
    schedule: &AnnealSchedule,
    targets: &[TargetSet],
    grid_points: usize,
) -> Result<Trajectory> {
    Ok(evolve_system(&FullSpace::new(diag), schedule, targets, grid_points, &EvolveOptions::default())?.0)
}

/// Integrates `i d psi/dt = H(t) psi` from the driver ground state and
/// records target probabilities at `grid_points` uniform values of `s`.
/// Returns the trajectory and the final amplitudes.
pub fn evolve_system<S: AnnealingSystem + ?Sized>(
    sys: &S,
    schedule: &AnnealSchedule,
    targets: &[TargetSet],
    grid_points: usize,
    opts: &EvolveOptions,
) -> Result<(Trajectory, Vec<Complex64>)> {
    TargetSet::check(targets, sys.dim())?;
    let grid = uniform_grid(grid_points)?;
    let tau = schedule.tau();
    let step = opts.step.unwrap_or_else(|| default_step(tau));
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    let stages = opts.splitting.stages();

    let mut psi = sys.initial_amplitudes();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); targets.len()];
    let mut max_drift: f64 = 0.0;
    let mut prop = Propagator { sys, schedule: *schedule, pending_from: 0.0 };

    let mut record = |psi: &[Complex64], s: f64, values: &mut Vec<Vec<f64>>| -> Result<()> {
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_TOL {
            return Err(Error::IntegrationFailure { s, step, drift });
        }
        for (v, t) in values.iter_mut().zip(targets) {
            v.push(set_probability(psi, &t.states));
        }
        Ok(())
    };

    record(&psi, 0.0, &mut values)?;
    for k in 0..grid.len() - 1 {
        let (t0, t1) = (grid[k] * tau, grid[k + 1] * tau);
        let substeps = (((t1 - t0) / step) - 1e-9).ceil().max(1.0) as usize;
        let h = (t1 - t0) / substeps as f64;
        let mut t = t0;
        for j in 0..substeps {
            let start = t;
            for &c in &stages {
                t = prop.strang(&mut psi, t, c * h);
            }
            // Pin the clock to the exact substep boundary.
            t = if j + 1 == substeps { t1 } else { start + h };
        }
        prop.flush_diagonal(&mut psi, t1);
        record(&psi, grid[k + 1], &mut values)?;
    }

    let series = targets
        .iter()
        .zip(values)
        .map(|(t, v)| Series { label: t.label.clone(), values: v })
        .collect();
    let meta = TrajectoryMeta { step: Some(step), max_norm_drift: max_drift, ..Default::default() };
    Ok((Trajectory { mode: TauMode::Finite(tau), grid, series, meta }, psi))
}
