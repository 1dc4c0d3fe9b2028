//! Exact classical analysis of a [`DiagonalProblem`]: level structure,
//! feasibility energy gap, the penalty boundary `mu*`, lambda calibration,
//! Hamming distances and spectrum relabelling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_diagonal, DiagonalProblem, Instance, ProblemKind, SpinConfiguration};
use crate::numfmt::csv_float;

/// Absolute tolerance for grouping classical energies into levels.
pub const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub e_gs: f64,
    /// First distinct excited energy; absent when every state shares one level.
    pub e_e1: Option<f64>,
    pub gs_states: Vec<usize>,
    pub e1_states: Vec<usize>,
    pub delta_e_hc: Option<f64>,
    pub e_feas_min: Option<f64>,
    pub e_infeas_min: Option<f64>,
    /// `E_infeasible,min - E_feasible,min`, snapped to zero within [`LEVEL_TOL`];
    /// absent unless both sets are non-empty.
    pub delta_e_f: Option<f64>,
}

impl SpectrumSummary {
    pub const CSV_HEADER: &'static str = "instance_id,e_gs,e_e1,delta_e_hc,e_feas_min,e_infeas_min,delta_e_f";

    pub fn csv_row(&self, instance_id: &str) -> String {
        let opt = |v: Option<f64>| v.map(csv_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            instance_id,
            csv_float(self.e_gs),
            opt(self.e_e1),
            opt(self.delta_e_hc),
            opt(self.e_feas_min),
            opt(self.e_infeas_min),
            opt(self.delta_e_f)
        )
    }

    /// Whether the ground or first excited level contains more than one state.
    pub fn has_degenerate_low_levels(&self) -> bool {
        self.gs_states.len() != 1 || self.e1_states.len() != 1
    }
}

pub fn summarize(diag: &DiagonalProblem) -> Result<SpectrumSummary> {
    let energies = diag.energies();
    if energies.is_empty() {
        return Err(Error::InvalidArgument("empty diagonal problem".into()));
    }
    let e_gs = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let gs_states: Vec<usize> = (0..energies.len()).filter(|&z| energies[z] - e_gs <= LEVEL_TOL).collect();
    let e_e1 = energies
        .iter()
        .copied()
        .filter(|&e| e - e_gs > LEVEL_TOL)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))));
    let e1_states = match e_e1 {
        Some(e1) => (0..energies.len())
            .filter(|&z| (energies[z] - e1).abs() <= LEVEL_TOL && energies[z] - e_gs > LEVEL_TOL)
            .collect(),
        None => Vec::new(),
    };

    let mut e_feas_min: Option<f64> = None;
    let mut e_infeas_min: Option<f64> = None;
    if diag.kind() == ProblemKind::Constrained {
        for (&e, &ok) in energies.iter().zip(diag.feasible_flags()) {
            let slot = if ok { &mut e_feas_min } else { &mut e_infeas_min };
            *slot = Some(slot.map_or(e, |v| v.min(e)));
        }
    } else {
        e_feas_min = Some(e_gs);
    }
    let delta_e_f = match (e_feas_min, e_infeas_min) {
        // minima within the level tolerance are one level
        (Some(f), Some(i)) => Some(if (i - f).abs() <= LEVEL_TOL { 0.0 } else { i - f }),
        _ => None,
    };
    Ok(SpectrumSummary {
        e_gs,
        e_e1,
        gs_states,
        e1_states,
        delta_e_hc: e_e1.map(|e1| e1 - e_gs),
        e_feas_min,
        e_infeas_min,
        delta_e_f,
    })
}

/// The `mu`-independent part of a constrained spectrum: the minimum feasible
/// objective and, for each non-zero residual value, the minimum objective
/// among states with that residual.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyProfile {
    feasible_min: f64,
    /// `(c, min f over states with residual c)`, sorted by `c`.
    infeasible: Vec<(i64, f64)>,
}

impl PenaltyProfile {
    pub fn from_diagonal(diag: &DiagonalProblem) -> Result<Self> {
        if diag.kind() != ProblemKind::Constrained {
            return Err(Error::InvalidArgument("mu* is only defined for constrained problems".into()));
        }
        let mut feasible_min = f64::INFINITY;
        let mut by_residual: BTreeMap<i64, f64> = BTreeMap::new();
        for (&f, &c) in diag.objectives().iter().zip(diag.constraints()) {
            if c == 0 {
                feasible_min = feasible_min.min(f);
            } else {
                let slot = by_residual.entry(c).or_insert(f64::INFINITY);
                *slot = slot.min(f);
            }
        }
        if !feasible_min.is_finite() {
            return Err(Error::EmptyFeasibleSet);
        }
        Ok(Self { feasible_min, infeasible: by_residual.into_iter().collect() })
    }

    pub fn from_instance(instance: &Instance) -> Result<Self> {
        Self::from_diagonal(&build_diagonal(instance)?)
    }

    pub fn feasible_min(&self) -> f64 {
        self.feasible_min
    }

    /// Smallest `mu >= 0` above which every ground state is optimal.
    ///
    /// An infeasible state with residual `c` and objective `f` sits above the
    /// best feasible energy iff `mu > 2 (F - f + lambda c) / c^2`.
    pub fn mu_star(&self, lambda: f64) -> f64 {
        self.infeasible
            .iter()
            .map(|&(c, f)| {
                let c = c as f64;
                2.0 * (self.feasible_min - f + lambda * c) / (c * c)
            })
            .fold(0.0, f64::max)
    }
}

pub fn mu_star(instance: &Instance, lambda: f64) -> Result<f64> {
    Ok(PenaltyProfile::from_instance(instance)?.mu_star(lambda))
}

/// Spacing of the coarse scan in [`calibrate_lambda`].
pub const LAMBDA_SCAN_STEP: f64 = 1e-3;
/// Width below which bisection stops.
pub const LAMBDA_ROOT_TOL: f64 = 1e-9;

/// All `lambda` in `[lo, hi]` with `mu*(lambda) = target`.
pub fn calibrate_lambda(instance: &Instance, target: f64, interval: (f64, f64)) -> Result<Vec<f64>> {
    calibrate_profile(&PenaltyProfile::from_instance(instance)?, target, interval)
}

pub fn calibrate_profile(profile: &PenaltyProfile, target: f64, (lo, hi): (f64, f64)) -> Result<Vec<f64>> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidArgument(format!("target mu* must be > 0, got {target}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("bad lambda search interval [{lo}, {hi}]")));
    }
    let g = |l: f64| profile.mu_star(l) - target;
    let steps = ((hi - lo) / LAMBDA_SCAN_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| (lo + k as f64 * LAMBDA_SCAN_STEP).min(hi)).collect();
    let values: Vec<f64> = grid.iter().map(|&l| g(l)).collect();

    let mut roots = Vec::new();
    let mut k = 0;
    while k < grid.len() {
        if values[k] == 0.0 {
            // A run of exact zeros is reported by its endpoints.
            let start = k;
            while k + 1 < grid.len() && values[k + 1] == 0.0 {
                k += 1;
            }
            roots.push(grid[start]);
            if k > start {
                roots.push(grid[k]);
            }
        } else if k + 1 < grid.len() && values[k + 1] != 0.0 && values[k].signum() != values[k + 1].signum() {
            roots.push(bisect(&g, grid[k], grid[k + 1], values[k]));
        }
        k += 1;
    }
    if roots.is_empty() {
        return Err(Error::NoRoot { target, lo, hi });
    }
    Ok(roots)
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let sa = ga.signum();
    while b - a > LAMBDA_ROOT_TOL {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Which calibrated root the harness uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RootChoice {
    /// Root with the smallest `|lambda|`; exact ties go to the negative root.
    #[default]
    ClosestToZero,
    Smallest,
    Largest,
}

pub fn select_root(roots: &[f64], choice: RootChoice) -> Option<f64> {
    let cmp = |a: &&f64, b: &&f64| a.total_cmp(b);
    match choice {
        RootChoice::Smallest => roots.iter().min_by(cmp).copied(),
        RootChoice::Largest => roots.iter().max_by(cmp).copied(),
        RootChoice::ClosestToZero => roots
            .iter()
            .min_by(|a, b| {
                let (da, db) = (a.abs(), b.abs());
                if (da - db).abs() <= LAMBDA_ROOT_TOL {
                    a.total_cmp(b)
                } else {
                    da.total_cmp(&db)
                }
            })
            .copied(),
    }
}

/// Number of differing spins, `(1/2) sum_i |s_i^A - s_i^B|`.
pub fn hamming_distance(a: &SpinConfiguration, b: &SpinConfiguration) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count())
}

/// How [`permute_spectrum_with`] places the levels above the first excited one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Remaining levels in ascending energy go to remaining states in
    /// ascending index order.
    #[default]
    Ascending,
    /// Two transpositions move the lowest level to `gs_state` and the
    /// second-lowest to `e1_state`; every other state keeps its level
    /// unless it was displaced by those swaps.
    Swap,
}

/// Reassigns classical levels to basis states: the lowest level goes to
/// `gs_state`, the second-lowest to `e1_state`, and the remaining levels,
/// in ascending energy order, to the remaining states in ascending index
/// order. Each state carries its whole `(E, f, c)` triple and the flags are
/// recomputed.
pub fn permute_spectrum(diag: &DiagonalProblem, gs_state: usize, e1_state: usize) -> Result<DiagonalProblem> {
    permute_spectrum_with(diag, gs_state, e1_state, TailRule::Ascending)
}

/// [`permute_spectrum`] with an explicit rule for the upper levels.
pub fn permute_spectrum_with(diag: &DiagonalProblem, gs_state: usize, e1_state: usize, tail: TailRule) -> Result<DiagonalProblem> {
    let dim = diag.dim();
    if gs_state >= dim || e1_state >= dim {
        return Err(Error::InvalidArgument(format!("state index out of range for dimension {dim}")));
    }
    if gs_state == e1_state {
        return Err(Error::InvalidArgument("ground and first excited state must differ".into()));
    }
    let energies = diag.energies();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    if let Some(w) = order.windows(2).find(|w| energies[w[1]] - energies[w[0]] <= LEVEL_TOL) {
        return Err(Error::DegenerateSpectrum(format!(
            "states {} and {} share energy {}",
            w[0], w[1], energies[w[0]]
        )));
    }

    let source = match tail {
        TailRule::Ascending => {
            let mut source = vec![0usize; dim];
            source[gs_state] = order[0];
            source[e1_state] = order[1];
            let rest = (0..dim).filter(|&z| z != gs_state && z != e1_state);
            for (z, &from) in rest.zip(&order[2..]) {
                source[z] = from;
            }
            source
        }
        TailRule::Swap => {
            let mut source: Vec<usize> = (0..dim).collect();
            let at = |src: &[usize], k: usize| src.iter().position(|&x| x == k).expect("permutation");
            let g = at(&source, order[0]);
            source.swap(g, gs_state);
            let e = at(&source, order[1]);
            source.swap(e, e1_state);
            source
        }
    };
    let pick_f = |v: &[f64]| source.iter().map(|&k| v[k]).collect::<Vec<_>>();
    DiagonalProblem::from_parts(
        diag.kind(),
        diag.m(),
        pick_f(energies),
        pick_f(diag.objectives()),
        source.iter().map(|&k| diag.constraints()[k]).collect(),
    )
}
