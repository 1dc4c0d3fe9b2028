//! The uniform fully connected transverse-field Ising model in the
//! maximal-total-spin sector.
//!
//! Level `k` is the symmetric (Dicke) state with `k` up spins, so
//! `q = 2k - N` is the eigenvalue of `sum_i sigma^z_i`. The problem part is
//! diagonal with `E(k) = -(J / 2N)(q^2 - N) - h q`; the driver `-sum_i sigma^x_i`
//! is tridiagonal with off-diagonal `-sqrt((k + 1)(N - k))`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{
    adiabatic_system, evolve_system, AnnealSchedule, AnnealingSystem, BasisKind, EvolveOptions, QuantumState,
    TargetSet, TauMode, Trajectory,
};
use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_lowest, LowestEigen};
use crate::spectrum::LEVEL_TOL;

/// Largest `n` accepted by [`expand_to_full`].
pub const EXPAND_MAX_SPINS: usize = 12;

#[derive(Debug)]
pub struct CollectiveModel {
    n: usize,
    j: f64,
    h: f64,
    energies: Vec<f64>,
    driver_off: Vec<f64>,
    /// Eigen-decomposition of the driver, built on first finite-time use.
    driver_eigen: OnceLock<(Vec<f64>, Vec<f64>)>,
}

impl Clone for CollectiveModel {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            j: self.j,
            h: self.h,
            energies: self.energies.clone(),
            driver_off: self.driver_off.clone(),
            driver_eigen: OnceLock::new(),
        }
    }
}

pub fn build_collective(n: usize, j: f64, h: f64) -> Result<CollectiveModel> {
    if n < 2 {
        return Err(Error::InvalidArgument("collective model needs n >= 2".into()));
    }
    if !(j.is_finite() && h.is_finite()) {
        return Err(Error::InvalidArgument("coupling and field must be finite".into()));
    }
    let nf = n as f64;
    let energies = (0..=n)
        .map(|k| {
            let q = 2.0 * k as f64 - nf;
            -(j / (2.0 * nf)) * (q * q - nf) - h * q
        })
        .collect();
    let driver_off = (0..n).map(|k| -(((k + 1) * (n - k)) as f64).sqrt()).collect();
    Ok(CollectiveModel { n, j, h, energies, driver_off, driver_eigen: OnceLock::new() })
}

impl CollectiveModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self) -> f64 {
        self.j
    }

    pub fn field(&self) -> f64 {
        self.h
    }

    /// Classical energy of each level `k = 0..=n`.
    pub fn level_energies(&self) -> &[f64] {
        &self.energies
    }

    /// Off-diagonal of the driver between levels `k` and `k + 1`.
    pub fn driver_off_diagonal(&self) -> &[f64] {
        &self.driver_off
    }

    /// Levels at the lowest classical energy.
    pub fn ground_levels(&self) -> Vec<usize> {
        let min = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        (0..=self.n).filter(|&k| self.energies[k] - min <= LEVEL_TOL).collect()
    }

    /// Levels at the first distinct excited classical energy.
    pub fn first_excited_levels(&self) -> Vec<usize> {
        let min = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let e1 = self.energies.iter().copied().filter(|&e| e - min > LEVEL_TOL).fold(f64::INFINITY, f64::min);
        (0..=self.n).filter(|&k| (self.energies[k] - e1).abs() <= LEVEL_TOL && self.energies[k] - min > LEVEL_TOL).collect()
    }

    /// Up-spin magnetization `q = 2k - n` of level `k`.
    pub fn magnetization(&self, k: usize) -> i64 {
        2 * k as i64 - self.n as i64
    }

    fn eigen(&self) -> &(Vec<f64>, Vec<f64>) {
        self.driver_eigen.get_or_init(|| {
            let dim = self.n + 1;
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for (k, &v) in self.driver_off.iter().enumerate() {
                m[(k, k + 1)] = v;
                m[(k + 1, k)] = v;
            }
            let eig = m.symmetric_eigen();
            // Row-major copy of the eigenvector matrix.
            let mut vecs = vec![0.0; dim * dim];
            for r in 0..dim {
                for c in 0..dim {
                    vecs[r * dim + c] = eig.eigenvectors[(r, c)];
                }
            }
            (eig.eigenvalues.iter().copied().collect(), vecs)
        })
    }
}

impl AnnealingSystem for CollectiveModel {
    fn basis(&self) -> BasisKind {
        BasisKind::Collective { n: self.n }
    }

    fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn apply_driver(&self, x: &[Complex64], out: &mut [Complex64]) {
        let dim = self.n + 1;
        for k in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            if k > 0 {
                acc += x[k - 1] * self.driver_off[k - 1];
            }
            if k + 1 < dim {
                acc += x[k + 1] * self.driver_off[k];
            }
            out[k] = acc;
        }
    }

    fn propagate_driver(&self, theta: f64, x: &mut [Complex64]) {
        let (values, vecs) = self.eigen();
        let dim = values.len();
        // y = V^T x, scaled by exp(-i theta lambda), then x = V y.
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        for (r, &xr) in x.iter().enumerate() {
            let row = &vecs[r * dim..(r + 1) * dim];
            for (yc, &v) in y.iter_mut().zip(row) {
                *yc += xr * v;
            }
        }
        for (yc, &l) in y.iter_mut().zip(values) {
            let (s, c) = (-theta * l).sin_cos();
            *yc *= Complex64::new(c, s);
        }
        for (r, xr) in x.iter_mut().enumerate() {
            let row = &vecs[r * dim..(r + 1) * dim];
            *xr = row.iter().zip(&y).map(|(&v, &yc)| yc * v).sum();
        }
    }

    fn lowest_eigenpair(&self, a: f64, b: f64) -> Result<LowestEigen> {
        let diag: Vec<f64> = self.energies.iter().map(|e| b * e).collect();
        let off: Vec<f64> = self.driver_off.iter().map(|v| a * v).collect();
        tridiagonal_lowest(&diag, &off)
    }

    fn initial_amplitudes(&self) -> Vec<Complex64> {
        binomial_amplitudes(self.n).into_iter().map(|a| Complex64::new(a, 0.0)).collect()
    }
}

/// `ln C(n, k)` for `k = 0..=n`.
fn ln_binomials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 0..n {
        acc += ((n - k) as f64 / (k + 1) as f64).ln();
        out.push(acc);
    }
    out
}

/// `sqrt(C(n, k)) / 2^(n/2)`, computed in log space.
fn binomial_amplitudes(n: usize) -> Vec<f64> {
    let half_ln2n = 0.5 * n as f64 * std::f64::consts::LN_2;
    ln_binomials(n).into_iter().map(|l| (0.5 * l - half_ln2n).exp()).collect()
}

/// The full-space uniform superposition written in the Dicke basis.
pub fn collective_initial_state(n: usize) -> Result<QuantumState> {
    if n < 2 {
        return Err(Error::InvalidArgument("collective model needs n >= 2".into()));
    }
    let amps = binomial_amplitudes(n).into_iter().map(|a| Complex64::new(a, 0.0)).collect();
    QuantumState::new(BasisKind::Collective { n }, amps)
}

/// Spreads level amplitude `a_k` as `a_k / sqrt(C(n, k))` over every
/// computational basis state with `k` up spins (`n - k` one-bits).
pub fn expand_to_full(state: &QuantumState) -> Result<QuantumState> {
    let BasisKind::Collective { n } = state.basis() else {
        return Err(Error::InvalidArgument("expand_to_full needs a collective-basis state".into()));
    };
    if n > EXPAND_MAX_SPINS {
        return Err(Error::SizeCap { size: n, cap: EXPAND_MAX_SPINS });
    }
    let ln_c = ln_binomials(n);
    let amps = state.amplitudes();
    let full = (0..1usize << n)
        .map(|z| {
            let k = n - z.count_ones() as usize;
            amps[k] * (-0.5 * ln_c[k]).exp()
        })
        .collect();
    QuantumState::unchecked(BasisKind::Full { m: n }, full)
}

/// Level probabilities along a static or finite-time anneal.
pub fn collective_trajectories(
    model: &CollectiveModel,
    mode: TauMode,
    targets: &[TargetSet],
    grid_points: usize,
) -> Result<Trajectory> {
    match mode {
        TauMode::Static => adiabatic_system(model, targets, grid_points),
        TauMode::Finite(tau) => {
            let schedule = AnnealSchedule::new(tau)?;
            Ok(evolve_system(model, &schedule, targets, grid_points, &EvolveOptions::default())?.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_state;

    #[test]
    fn two_spin_energies_and_driver() {
        let m = build_collective(2, 1.0, 0.0).unwrap();
        assert_eq!(m.level_energies(), &[-0.5, 0.5, -0.5]);
        let r2 = 2f64.sqrt();
        assert!(m.driver_off_diagonal().iter().all(|v| (v + r2).abs() < 1e-15));
    }

    #[test]
    fn strong_field_levels_are_adjacent() {
        for j in [1.0, -1.0] {
            let m = build_collective(4, j, 2.5).unwrap();
            assert_eq!(m.ground_levels(), vec![4]);
            assert_eq!(m.first_excited_levels(), vec![3]);
            assert_eq!(m.magnetization(4), 4);
            assert_eq!(m.magnetization(3), 2);
        }
    }

    #[test]
    fn initial_state_weights() {
        let s = collective_initial_state(2).unwrap();
        let want = [0.5, 0.5f64.sqrt(), 0.5];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15);
        }
        for n in [2, 7, 64, 1024] {
            assert!((collective_initial_state(n).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expansion() {
        let basis = BasisKind::Collective { n: 2 };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let dicke = QuantumState::new(basis, vec![zero, one, zero]).unwrap();
        let full = expand_to_full(&dicke).unwrap();
        let h = 0.5f64.sqrt();
        assert!((full.amplitudes()[1].re - h).abs() < 1e-15 && (full.amplitudes()[2].re - h).abs() < 1e-15);
        assert_eq!(full.amplitudes()[0], zero);
        // No up spins: both bits set.
        let down = QuantumState::new(basis, vec![one, zero, zero]).unwrap();
        let full = expand_to_full(&down).unwrap();
        assert!((full.amplitudes()[3].re - 1.0).abs() < 1e-15);
        assert!((full.norm() - 1.0).abs() < 1e-15);

        let start = expand_to_full(&collective_initial_state(4).unwrap()).unwrap();
        let uniform = initial_state(4).unwrap();
        for (a, b) in start.amplitudes().iter().zip(uniform.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        let big = collective_initial_state(EXPAND_MAX_SPINS + 1).unwrap();
        assert!(expand_to_full(&big).is_err());
    }

    #[test]
    fn driver_spectrum() {
        let m = build_collective(6, 1.0, 0.0).unwrap();
        let mut vals = m.eigen().0.clone();
        vals.sort_by(f64::total_cmp);
        for (k, v) in vals.iter().enumerate() {
            assert!((v - (2.0 * k as f64 - 6.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn static_start_is_binomial() {
        let m = build_collective(5, -1.0, 2.5).unwrap();
        let targets: Vec<TargetSet> = (0..=5).map(|k| TargetSet::new(format!("k{k}"), vec![k])).collect();
        let t = collective_trajectories(&m, TauMode::Static, &targets, 11).unwrap();
        let binom = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
        for (k, s) in t.series.iter().enumerate() {
            assert!((s.values[0] - binom[k] / 32.0).abs() < 1e-12);
        }
        assert_eq!(t.series[5].values[10], 1.0);
    }
}
