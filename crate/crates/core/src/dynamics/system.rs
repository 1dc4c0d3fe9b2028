use num_complex::Complex64;

use super::schedule::AnnealSchedule;
use super::state::{BasisKind, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_lowest, LowestEigen};
use crate::model::DiagonalProblem;

/// Default cap on qubits for the dense instantaneous eigensolve.
pub const DENSE_EIGEN_MAX_QUBITS: usize = 14;

/// A Hamiltonian family `H(s) = A(s) D + B(s) E` with a diagonal problem part
/// `E` and a driver `D`, in whatever basis the implementor works in.
pub trait AnnealingSystem: Sync {
    fn basis(&self) -> BasisKind;

    /// Diagonal of the problem Hamiltonian.
    fn energies(&self) -> &[f64];

    /// `out = D x`.
    fn apply_driver(&self, x: &[Complex64], out: &mut [Complex64]);

    /// `x <- exp(-i theta D) x`.
    fn propagate_driver(&self, theta: f64, x: &mut [Complex64]);

    /// Lowest eigenpair of `a D + b E` for `a > 0`.
    fn lowest_eigenpair(&self, a: f64, b: f64) -> Result<LowestEigen>;

    /// Ground state of the driver, where every anneal starts.
    fn initial_amplitudes(&self) -> Vec<Complex64>;

    fn dim(&self) -> usize {
        self.basis().dim()
    }
}

/// The full `2^M`-dimensional computational basis with driver `-sum_i sigma^x_i`.
#[derive(Debug, Clone, Copy)]
pub struct FullSpace<'a> {
    diag: &'a DiagonalProblem,
    eigen_cap: usize,
}

impl<'a> FullSpace<'a> {
    pub fn new(diag: &'a DiagonalProblem) -> Self {
        Self { diag, eigen_cap: DENSE_EIGEN_MAX_QUBITS }
    }

    pub fn with_eigen_cap(mut self, cap: usize) -> Self {
        self.eigen_cap = cap;
        self
    }

    pub fn diagonal(&self) -> &DiagonalProblem {
        self.diag
    }

    pub fn eigen_cap(&self) -> usize {
        self.eigen_cap
    }
}

impl AnnealingSystem for FullSpace<'_> {
    fn basis(&self) -> BasisKind {
        BasisKind::Full { m: self.diag.m() }
    }

    fn energies(&self) -> &[f64] {
        self.diag.energies()
    }

    fn apply_driver(&self, x: &[Complex64], out: &mut [Complex64]) {
        let m = self.diag.m();
        for (z, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += x[z ^ (1 << i)];
            }
            *o = -acc;
        }
    }

    fn propagate_driver(&self, theta: f64, x: &mut [Complex64]) {
        // exp(i theta sigma^x) on every qubit.
        let (sin, cos) = theta.sin_cos();
        let isin = Complex64::new(0.0, sin);
        for i in 0..self.diag.m() {
            let bit = 1usize << i;
            for z in 0..x.len() {
                if z & bit == 0 {
                    let (a, b) = (x[z], x[z | bit]);
                    x[z] = a * cos + isin * b;
                    x[z | bit] = isin * a + b * cos;
                }
            }
        }
    }

    fn lowest_eigenpair(&self, a: f64, b: f64) -> Result<LowestEigen> {
        let m = self.diag.m();
        if m > self.eigen_cap {
            return Err(Error::SizeCap { size: m, cap: self.eigen_cap });
        }
        let mut h = dense_from_parts(self.diag, a, b);
        symmetric_lowest(&mut h, self.diag.dim())
    }

    fn initial_amplitudes(&self) -> Vec<Complex64> {
        let dim = self.diag.dim();
        vec![Complex64::new((dim as f64).sqrt().recip(), 0.0); dim]
    }
}

fn dense_from_parts(diag: &DiagonalProblem, a: f64, b: f64) -> Vec<f64> {
    let n = diag.dim();
    let mut h = vec![0.0; n * n];
    for (z, &e) in diag.energies().iter().enumerate() {
        h[z * n + z] = b * e;
        for i in 0..diag.m() {
            h[z * n + (z ^ (1 << i))] = -a;
        }
    }
    h
}

/// Lowest eigenpair of `H(s)` by dense Householder reduction.
pub fn dense_lowest_eigenpair(diag: &DiagonalProblem, s: f64) -> Result<LowestEigen> {
    let mut h = dense_hamiltonian(diag, s);
    symmetric_lowest(&mut h, diag.dim())
}

/// Row-major dense `H(s)` (real symmetric). Intended for small `M`.
pub fn dense_hamiltonian(diag: &DiagonalProblem, s: f64) -> Vec<f64> {
    dense_from_parts(diag, AnnealSchedule::a(s), AnnealSchedule::b(s))
}

/// Matrix-free image `H(s) psi`, with `H(s) = A(s) (-sum_i sigma^x_i) + B(s) H_c`.
pub fn apply_hamiltonian(diag: &DiagonalProblem, s: f64, state: &QuantumState) -> Result<QuantumState> {
    let system = FullSpace::new(diag);
    if state.basis() != system.basis() {
        return Err(Error::LengthMismatch { expected: system.dim(), actual: state.dim() });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s = {s} is outside [0, 1]")));
    }
    let x = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    system.apply_driver(x, &mut out);
    let (a, b) = (AnnealSchedule::a(s), AnnealSchedule::b(s));
    for ((o, &xi), &e) in out.iter_mut().zip(x).zip(diag.energies()) {
        *o = *o * a + xi * (b * e);
    }
    QuantumState::unchecked(state.basis(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::state::initial_state;
    use crate::model::{build_diagonal, generate_ising, IsingKind};

    #[test]
    fn endpoint_images() {
        let d = build_diagonal(&generate_ising(3, IsingKind::Fm, 2).unwrap().into()).unwrap();
        let psi = initial_state(3).unwrap();
        let img = apply_hamiltonian(&d, 1.0, &psi).unwrap();
        for (z, v) in img.amplitudes().iter().enumerate() {
            assert!((v - psi.amplitudes()[z] * d.energies()[z]).norm() < 1e-15);
        }
        let img = apply_hamiltonian(&d, 0.0, &psi).unwrap();
        for (v, p) in img.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((v + p * 3.0).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let d = build_diagonal(&generate_ising(3, IsingKind::Fm, 2).unwrap().into()).unwrap();
        assert!(apply_hamiltonian(&d, 0.5, &initial_state(2).unwrap()).is_err());
    }

    #[test]
    fn dense_is_symmetric() {
        let d = build_diagonal(&generate_ising(4, IsingKind::Af, 9).unwrap().into()).unwrap();
        for s in [0.0, 0.3, 0.77, 1.0] {
            let h = dense_hamiltonian(&d, s);
            let n = d.dim();
            for i in 0..n {
                for j in 0..n {
                    assert!((h[i * n + j] - h[j * n + i]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn driver_propagation_is_exact_rotation() {
        // exp(-i theta D) with D = -sigma^x on one qubit maps |0> to cos|0> + i sin|1>.
        let d = build_diagonal(&generate_ising(2, IsingKind::Fm, 0).unwrap().into()).unwrap();
        let sys = FullSpace::new(&d);
        let mut x = vec![Complex64::new(0.0, 0.0); 4];
        x[0] = Complex64::new(1.0, 0.0);
        sys.propagate_driver(0.3, &mut x);
        let (s, c) = 0.3f64.sin_cos();
        assert!((x[0] - Complex64::new(c * c, 0.0)).norm() < 1e-15);
        assert!((x[1] - Complex64::new(0.0, s * c)).norm() < 1e-15);
        assert!((x[3] - Complex64::new(-s * s, 0.0)).norm() < 1e-15);
    }
}
