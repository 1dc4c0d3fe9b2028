use super::instance::Instance;
use crate::error::{Error, Result};

/// Default hard cap on the number of enumerated variables.
pub const DEFAULT_MAX_VARIABLES: usize = 24;

/// Relative tolerance used to decide which feasible states are optimal.
pub const OPTIMALITY_RTOL: f64 = 1e-9;

/// Absolute tolerance used to group ground states of unconstrained models.
pub const GROUND_ATOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Constrained,
    Unconstrained,
}

/// Exhaustive classical spectrum of an instance over all `2^M` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalProblem {
    kind: ProblemKind,
    m: usize,
    energies: Vec<f64>,
    objectives: Vec<f64>,
    constraints: Vec<i64>,
    feasible: Vec<bool>,
    optimal: Vec<bool>,
}

impl DiagonalProblem {
    /// Assembles a problem from per-state values and derives the flags.
    ///
    /// Constrained: feasible iff the residual is zero, optimal iff feasible
    /// with objective at the feasible minimum. Unconstrained: everything is
    /// feasible and the optimal states are the ground states.
    pub fn from_parts(
        kind: ProblemKind,
        m: usize,
        energies: Vec<f64>,
        objectives: Vec<f64>,
        constraints: Vec<i64>,
    ) -> Result<Self> {
        let dim = 1usize
            .checked_shl(m as u32)
            .ok_or(Error::SizeCap { size: m, cap: usize::BITS as usize - 1 })?;
        for len in [energies.len(), objectives.len(), constraints.len()] {
            if len != dim {
                return Err(Error::LengthMismatch { expected: dim, actual: len });
            }
        }
        let (feasible, optimal) = match kind {
            ProblemKind::Constrained => {
                let feasible: Vec<bool> = constraints.iter().map(|&c| c == 0).collect();
                let best = objectives
                    .iter()
                    .zip(&feasible)
                    .filter(|(_, &ok)| ok)
                    .map(|(&f, _)| f)
                    .fold(f64::INFINITY, f64::min);
                let tol = OPTIMALITY_RTOL * best.abs().max(1.0);
                let optimal = objectives
                    .iter()
                    .zip(&feasible)
                    .map(|(&f, &ok)| ok && f - best <= tol)
                    .collect();
                (feasible, optimal)
            }
            ProblemKind::Unconstrained => {
                let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
                let optimal = energies.iter().map(|&e| e - ground <= GROUND_ATOL).collect();
                (vec![true; dim], optimal)
            }
        };
        Ok(Self { kind, m, energies, objectives, constraints, feasible, optimal })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Number of binary variables.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Hilbert-space dimension `2^M`.
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn objectives(&self) -> &[f64] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[i64] {
        &self.constraints
    }

    pub fn feasible_flags(&self) -> &[bool] {
        &self.feasible
    }

    pub fn optimal_flags(&self) -> &[bool] {
        &self.optimal
    }

    pub fn feasible_states(&self) -> Vec<usize> {
        indices_where(&self.feasible)
    }

    pub fn optimal_states(&self) -> Vec<usize> {
        indices_where(&self.optimal)
    }
}

fn indices_where(flags: &[bool]) -> Vec<usize> {
    flags.iter().enumerate().filter(|(_, &f)| f).map(|(z, _)| z).collect()
}

pub fn build_diagonal(instance: &Instance) -> Result<DiagonalProblem> {
    build_diagonal_capped(instance, DEFAULT_MAX_VARIABLES)
}

pub fn build_diagonal_capped(instance: &Instance, cap: usize) -> Result<DiagonalProblem> {
    let m = instance.variable_count();
    if m > cap {
        return Err(Error::SizeCap { size: m, cap });
    }
    let dim = 1usize << m;
    let mut energies = Vec::with_capacity(dim);
    let mut objectives = Vec::with_capacity(dim);
    let mut constraints = Vec::with_capacity(dim);
    for z in 0..dim {
        let ev = instance.evaluate_index(z);
        energies.push(ev.energy);
        objectives.push(ev.objective);
        constraints.push(ev.constraint);
    }
    let kind = if instance.is_constrained() { ProblemKind::Constrained } else { ProblemKind::Unconstrained };
    DiagonalProblem::from_parts(kind, m, energies, objectives, constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::{generate_gbp, generate_ising, generate_qkp, GbpInstance, IsingKind};

    #[test]
    fn gbp_six_vertices_has_twenty_feasible() {
        let g = generate_gbp(6, 0, 1.0, 0.0, 3).unwrap();
        let d = build_diagonal(&g.into()).unwrap();
        assert_eq!(d.feasible_states().len(), 20);
    }

    #[test]
    fn qkp_unit_capacity_feasible_count() {
        let q = generate_qkp(5, 1, 1.0, 0.0, 11).unwrap();
        let d = build_diagonal(&q.into()).unwrap();
        assert_eq!(d.feasible_states().len(), 6);
    }

    #[test]
    fn gbp_toy_table() {
        let g: Instance = GbpInstance::new(2, vec![1.0], 0, 1.0, 0.0).unwrap().into();
        let d = build_diagonal(&g).unwrap();
        assert_eq!(d.energies(), &[2.0, 0.5, 0.5, 2.0]);
        assert_eq!(d.feasible_states(), vec![1, 2]);
        assert_eq!(d.optimal_states(), vec![1, 2]);
    }

    #[test]
    fn optimal_subset_of_feasible() {
        for seed in 0..5 {
            let d = build_diagonal(&generate_qkp(5, 3, 0.7, 0.2, seed).unwrap().into()).unwrap();
            let feas = d.feasible_flags();
            assert!(d.optimal_flags().iter().zip(feas).all(|(&o, &f)| !o || f));
            assert!(!d.optimal_states().is_empty());
        }
    }

    #[test]
    fn ising_flags() {
        let d = build_diagonal(&generate_ising(4, IsingKind::Fm, 5).unwrap().into()).unwrap();
        assert!(d.feasible_flags().iter().all(|&f| f));
        let ground = d.energies().iter().copied().fold(f64::INFINITY, f64::min);
        for z in d.optimal_states() {
            assert!((d.energies()[z] - ground).abs() <= 1e-9);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = generate_gbp(6, 0, 1.0, 0.0, 3).unwrap();
        assert!(matches!(build_diagonal_capped(&g.into(), 5), Err(Error::SizeCap { size: 6, cap: 5 })));
    }
}
