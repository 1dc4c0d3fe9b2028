use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the full-space simulator will allocate.
pub const MAX_FULL_QUBITS: usize = 24;

/// Tolerance on `|<psi|psi> - 1|` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Computational basis of `m` qubits.
    Full { m: usize },
    /// Maximal-total-spin (Dicke) basis of `n` spins, indexed by up-spin count.
    Collective { n: usize },
}

impl BasisKind {
    pub fn dim(self) -> usize {
        match self {
            BasisKind::Full { m } => 1 << m,
            BasisKind::Collective { n } => n + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    basis: BasisKind,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Wraps amplitudes, rejecting vectors whose norm is off by more than [`NORM_TOL`].
    pub fn new(basis: BasisKind, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(basis, amplitudes)?;
        let drift = (state.norm() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm is off by {drift:e}")));
        }
        Ok(state)
    }

    /// Wraps amplitudes without the norm check (for operator images).
    pub fn unchecked(basis: BasisKind, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::LengthMismatch { expected: basis.dim(), actual: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Total probability of the listed basis states.
    pub fn probability_of(&self, states: &[usize]) -> f64 {
        set_probability(&self.amplitudes, states)
    }
}

pub(crate) fn set_probability(amplitudes: &[Complex64], states: &[usize]) -> f64 {
    states.iter().map(|&z| amplitudes[z].norm_sqr()).sum()
}

/// Uniform superposition over `2^m` basis states, the ground state of `-sum sigma^x`.
pub fn initial_state(m: usize) -> Result<QuantumState> {
    if m > MAX_FULL_QUBITS {
        return Err(Error::SizeCap { size: m, cap: MAX_FULL_QUBITS });
    }
    let dim = 1usize << m;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    Ok(QuantumState { basis: BasisKind::Full { m }, amplitudes: vec![amp; dim] })
}
