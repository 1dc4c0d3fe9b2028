//! Independent reference computations and the named checks behind the
//! `oracle` command. The references deliberately share as little code as
//! possible with the production paths they check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::collective::{build_collective, collective_trajectories};
use crate::dynamics::{
    adiabatic_trajectory, dense_hamiltonian, evolve, evolve_system, AnnealSchedule, EvolveOptions, FullSpace,
    TargetSet, TauMode, Trajectory,
};
use crate::error::{Error, Result};
use crate::metrics::compute_qd;
use crate::model::{
    build_diagonal, generate_gbp, generate_ising, generate_qkp, slack_bit_count, DiagonalProblem, Instance,
    IsingInstance, IsingKind,
};
use crate::spectrum::{calibrate_lambda, mu_star, select_root, RootChoice};

pub const ORACLE_NAMES: [&str; 6] = ["integrator", "norm", "collective", "endpoint", "mu_star", "combinatorics"];

/// Final state of the anneal by piecewise-constant propagation: `slices`
/// equal time slices, each applying `exp(-i H(s_mid) dt)` through a full
/// eigendecomposition of the dense Hamiltonian.
pub fn piecewise_exponential(diag: &DiagonalProblem, tau: f64, slices: usize) -> Result<Vec<Complex64>> {
    if slices == 0 || !(tau > 0.0) {
        return Err(Error::InvalidArgument("need tau > 0 and at least one slice".into()));
    }
    let dim = diag.dim();
    let dt = tau / slices as f64;
    let mut psi = DVector::from_element(dim, Complex64::new((dim as f64).sqrt().recip(), 0.0));
    for k in 0..slices {
        let s = (k as f64 + 0.5) / slices as f64;
        let h = DMatrix::from_row_slice(dim, dim, &dense_hamiltonian(diag, s));
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = DVector::from_iterator(dim, eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * dt)));
        let coeff = v.adjoint() * &psi;
        psi = v * coeff.component_mul(&phases);
    }
    Ok(psi.iter().copied().collect())
}

/// Smallest `mu` at which the lowest augmented energy is attained only by
/// feasible states, by bisection on exhaustive enumeration. Feasible states
/// carry no penalty, so the best of them is optimal.
pub fn mu_star_bisection(instance: &Instance, lambda: f64) -> Result<f64> {
    let separated = |mu: f64| -> Result<bool> {
        let diag = build_diagonal(&instance.with_penalty(mu, lambda)?)?;
        let (mut feas, mut infeas) = (f64::INFINITY, f64::INFINITY);
        for (&e, &ok) in diag.energies().iter().zip(diag.feasible_flags()) {
            if ok {
                feas = feas.min(e);
            } else {
                infeas = infeas.min(e);
            }
        }
        Ok(infeas > feas)
    };
    let mut lo = 1e-12;
    if separated(lo)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !separated(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoRoot { target: f64::NAN, lo, hi });
        }
    }
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if separated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probability of each magnetization level (number of up spins, i.e. zero
/// bits) of a full-space state, by direct summation.
pub fn level_probabilities(amplitudes: &[Complex64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (z, a) in amplitudes.iter().enumerate() {
        out[n - z.count_ones() as usize] += a.norm_sqr();
    }
    out
}

/// Basis states of a full `n`-spin space in collective level `k`.
pub fn level_states(n: usize, k: usize) -> Vec<usize> {
    (0..1usize << n).filter(|z| n - z.count_ones() as usize == k).collect()
}

/// Whether every item assignment of a QKP instance is feasible exactly when
/// one slack value brings its residual to zero, and infeasible when none does.
pub fn qkp_encoding_sound(instance: &Instance) -> Result<bool> {
    let Instance::Qkp(q) = instance else {
        return Err(Error::InvalidArgument("encoding check needs a QKP instance".into()));
    };
    let diag = build_diagonal(instance)?;
    let items = 1usize << q.n;
    let mut zero_residuals = vec![0usize; items];
    for (z, &c) in diag.constraints().iter().enumerate() {
        if c == 0 {
            zero_residuals[z & (items - 1)] += 1;
        }
    }
    Ok((0..items).all(|xbits| {
        // binary variable x_i = 1 - bit_i
        let load: u64 = (0..q.n).filter(|&i| (xbits >> i) & 1 == 0).map(|i| q.item_weights[i]).sum();
        let feasible = load <= q.capacity;
        zero_residuals[xbits] == usize::from(feasible)
    }))
}

/// Outcome of one named oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: max error {:.3e} (tolerance {:.0e}); {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_error,
            self.tolerance,
            self.detail
        )
    }
}

fn report(name: &str, max_error: f64, tolerance: f64, detail: String) -> OracleReport {
    OracleReport { name: name.into(), passed: max_error < tolerance, max_error, tolerance, detail }
}

fn ising_diag(n: usize, seed: u64) -> Result<DiagonalProblem> {
    let kind = if seed % 2 == 0 { IsingKind::Fm } else { IsingKind::Af };
    build_diagonal(&generate_ising(n, kind, seed)?.into())
}

/// Splitting integrator against [`piecewise_exponential`] with `10^4`
/// slices: five Ising instances, `n = 3`, `tau = 10`.
pub fn integrator_oracle() -> Result<OracleReport> {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let diag = ising_diag(3, seed)?;
        let schedule = AnnealSchedule::new(10.0)?;
        let (_, psi) = evolve_system(&FullSpace::new(&diag), &schedule, &[], 11, &EvolveOptions::default())?;
        let reference = piecewise_exponential(&diag, 10.0, 10_000)?;
        for (a, b) in psi.iter().zip(&reference) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(report("integrator", worst, 1e-6, "5 Ising instances, n = 3, tau = 10, 10^4 slices".into()))
}

fn max_series_difference(a: &Trajectory, b: &Trajectory) -> f64 {
    a.series
        .iter()
        .zip(&b.series)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Norm drift at every record point and the effect of halving the step.
pub fn norm_oracle() -> Result<OracleReport> {
    let mut drift: f64 = 0.0;
    let mut halving: f64 = 0.0;
    for (seed, tau) in [(0u64, 10.0), (1, 100.0), (2, 1000.0)] {
        let inst: Instance = generate_gbp(6, 0, 1.0, -0.9, seed)?.into();
        let diag = build_diagonal(&inst)?;
        let targets = [TargetSet::feasible(&diag), TargetSet::optimal(&diag)];
        let schedule = AnnealSchedule::new(tau)?;
        let sys = FullSpace::new(&diag);
        let step = crate::dynamics::default_step(tau);
        let (a, _) = evolve_system(&sys, &schedule, &targets, 1001, &EvolveOptions { step: Some(step), ..Default::default() })?;
        let (b, _) =
            evolve_system(&sys, &schedule, &targets, 1001, &EvolveOptions { step: Some(step / 2.0), ..Default::default() })?;
        drift = drift.max(a.meta.max_norm_drift).max(b.meta.max_norm_drift);
        halving = halving.max(max_series_difference(&a, &b));
    }
    let worst = drift.max(halving);
    Ok(report(
        "norm",
        worst,
        1e-6,
        format!("max norm drift {drift:.3e}, step-halving change {halving:.3e} (GBP n = 6, tau = 10, 100, 1000)"),
    ))
}

/// Symmetric-sector dynamics against the full space for `n = 2, 4, 8`.
pub fn collective_oracle() -> Result<OracleReport> {
    let mut worst: f64 = 0.0;
    for n in [2usize, 4, 8] {
        for j in [1.0, -1.0] {
            let model = build_collective(n, j, 2.5)?;
            let diag = build_diagonal(&IsingInstance::uniform(n, j, 2.5)?.into())?;
            let level_targets: Vec<TargetSet> = (0..=n).map(|k| TargetSet::new(format!("k{k}"), vec![k])).collect();
            let full_targets: Vec<TargetSet> =
                (0..=n).map(|k| TargetSet::new(format!("k{k}"), level_states(n, k))).collect();
            for mode in [TauMode::Static, TauMode::Finite(100.0)] {
                let reduced = collective_trajectories(&model, mode, &level_targets, 201)?;
                let full = match mode {
                    TauMode::Static => adiabatic_trajectory(&diag, &full_targets, 201)?,
                    TauMode::Finite(tau) => evolve(&diag, &AnnealSchedule::new(tau)?, &full_targets, 201)?,
                };
                worst = worst.max(max_series_difference(&reduced, &full));
            }
        }
    }
    Ok(report("collective", worst, 1e-8, "n = 2, 4, 8; J = +1, -1; h = 2.5; static and tau = 100".into()))
}

/// Static Q_d,f vanishes and P_f(1) = 1 above the penalty boundary.
pub fn endpoint_oracle() -> Result<OracleReport> {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        for base in [Instance::from(generate_gbp(6, 0, 1.0, 0.0, seed)?), generate_qkp(5, 1, 1.0, 0.0, seed)?.into()] {
            let lambda = select_root(&calibrate_lambda(&base, 1.0, (-3.0, 3.0))?, RootChoice::ClosestToZero)
                .ok_or(Error::NoRoot { target: 1.0, lo: -3.0, hi: 3.0 })?;
            let boundary = mu_star(&base, lambda)?;
            for factor in [1.05, 1.2, 1.5] {
                let diag = build_diagonal(&base.with_penalty(factor * boundary, lambda)?)?;
                let traj = adiabatic_trajectory(&diag, &[TargetSet::feasible(&diag)], 1001)?;
                let series = &traj.series[0].values;
                let qd = compute_qd("feasible", &traj.grid, series)?;
                worst = worst.max(qd.qd).max((series[series.len() - 1] - 1.0).abs());
            }
        }
    }
    Ok(report("endpoint", worst, 1e-12, "10 GBP (6, 0) and 10 QKP (5, 1); mu = 1.05, 1.2, 1.5 mu*".into()))
}

/// Closed-form boundary against [`mu_star_bisection`].
pub fn mu_star_oracle() -> Result<OracleReport> {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        for base in [Instance::from(generate_gbp(6, 0, 1.0, 0.0, seed)?), generate_qkp(5, 1, 1.0, 0.0, seed)?.into()] {
            for lambda in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                worst = worst.max((mu_star(&base, lambda)? - mu_star_bisection(&base, lambda)?).abs());
            }
        }
    }
    Ok(report("mu_star", worst, 1e-9, "10 GBP (6, 0) and 10 QKP (5, 1); lambda in {-1, -0.5, 0, 0.5, 1}".into()))
}

/// Feasible counts and the QKP encoding, exhaustively.
pub fn combinatorics_oracle() -> Result<OracleReport> {
    let diag = build_diagonal(&generate_gbp(6, 0, 1.0, 0.0, 0)?.into())?;
    let count = diag.feasible_states().len();
    let p0 = count as f64 / diag.dim() as f64;
    let mut error = (count as f64 - 20.0).abs() + (p0 - 0.3125).abs();
    let mut unsound = Vec::new();
    for w in 1..=4u64 {
        let inst: Instance = generate_qkp(5, w, 1.0, 0.0, w)?.into();
        if !qkp_encoding_sound(&inst)? {
            unsound.push(w);
            error += 1.0;
        }
        let d = slack_bit_count(w)?;
        if inst.variable_count() != 5 + d as usize {
            error += 1.0;
        }
    }
    Ok(report(
        "combinatorics",
        error,
        1e-12,
        format!("GBP (6, 0): {count} feasible, P_f(0) = {p0}; QKP n = 5, W = 1..4 unsound: {unsound:?}"),
    ))
}

pub fn run_oracle(name: &str) -> Result<OracleReport> {
    match name {
        "integrator" => integrator_oracle(),
        "norm" => norm_oracle(),
        "collective" => collective_oracle(),
        "endpoint" => endpoint_oracle(),
        "mu_star" => mu_star_oracle(),
        "combinatorics" => combinatorics_oracle(),
        other => Err(Error::Config(format!("unknown oracle '{other}'; known: {}", ORACLE_NAMES.join(", ")))),
    }
}
