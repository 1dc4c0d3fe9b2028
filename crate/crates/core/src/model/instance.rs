use serde::{Deserialize, Serialize};

use super::spin::SpinConfiguration;
use crate::error::{Error, Result};
use crate::rng::InstanceRng;

/// Number of entries in a strictly upper-triangular `n x n` table.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Row-major offset of `(i, j)` with `i < j` in a strictly upper-triangular table.
#[inline]
pub fn pair_offset(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Row-major offset of `(i, j)` with `i <= j` in an upper-triangular table
/// that includes the diagonal.
#[inline]
pub fn upper_offset(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * i.saturating_sub(1) / 2 + j - i
}

/// Minimal number of log-encoded slack bits whose register spans `0..=W`.
pub fn slack_bit_count(capacity: u64) -> Result<u32> {
    if capacity == 0 {
        return Err(Error::InvalidArgument("capacity W must be >= 1".into()));
    }
    Ok(u64::BITS - capacity.leading_zeros())
}

fn check_penalty(mu: f64, lambda: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be finite and > 0, got {mu}")));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    Ok(())
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::InvalidArgument(format!("{name}[{k}] is not finite"))),
        None => Ok(()),
    }
}

/// Energy, objective and constraint residual of one assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    pub objective: f64,
    pub constraint: i64,
}

/// Augmented Lagrangian energy `f + (mu/2) c^2 - lambda c`.
#[inline]
pub fn augmented_energy(objective: f64, constraint: i64, mu: f64, lambda: f64) -> f64 {
    let c = constraint as f64;
    objective + 0.5 * mu * c * c - lambda * c
}

/// Graph bipartitioning on a fully connected weighted graph with a fixed
/// partition imbalance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbpInstance {
    pub n: usize,
    /// Edge weights `w_{i,j}`, `i < j`, row-major.
    pub weights: Vec<f64>,
    /// Required value of `sum_i s_i`.
    pub imbalance: i64,
    pub mu: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GbpInstance {
    pub fn new(n: usize, weights: Vec<f64>, imbalance: i64, mu: f64, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("GBP needs n >= 2".into()));
        }
        if weights.len() != pair_count(n) {
            return Err(Error::LengthMismatch { expected: pair_count(n), actual: weights.len() });
        }
        check_finite("weights", &weights)?;
        check_gbp_imbalance(n, imbalance)?;
        check_penalty(mu, lambda)?;
        Ok(Self { n, weights, imbalance, mu, lambda, seed: None })
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.weights[pair_offset(self.n, a, b)]
    }

    fn evaluate_index(&self, z: usize) -> Evaluation {
        let n = self.n;
        let mut cut = 0.0;
        let mut k = 0;
        for i in 0..n {
            let bi = (z >> i) & 1;
            for j in (i + 1)..n {
                if bi != (z >> j) & 1 {
                    cut += self.weights[k];
                }
                k += 1;
            }
        }
        let objective = cut / n as f64;
        let ones = (z & ((1usize << n) - 1)).count_ones() as i64;
        let constraint = (n as i64 - 2 * ones) - self.imbalance;
        Evaluation { energy: augmented_energy(objective, constraint, self.mu, self.lambda), objective, constraint }
    }
}

fn check_gbp_imbalance(n: usize, c: i64) -> Result<()> {
    if c.unsigned_abs() as usize > n || (n as i64 + c).rem_euclid(2) != 0 {
        return Err(Error::InfeasibleConfiguration(format!(
            "GBP with n = {n} and c = {c} has no feasible partition (need |c| <= n and n + c even)"
        )));
    }
    Ok(())
}

/// Quadratic knapsack with integer weights and a log-encoded slack register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QkpInstance {
    pub n: usize,
    /// Profits `p_{i,j}`, `i <= j`, row-major (diagonal = item values).
    pub profits: Vec<f64>,
    pub item_weights: Vec<u64>,
    pub capacity: u64,
    pub slack_bits: u32,
    pub mu: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl QkpInstance {
    pub fn new(
        n: usize,
        profits: Vec<f64>,
        item_weights: Vec<u64>,
        capacity: u64,
        mu: f64,
        lambda: f64,
    ) -> Result<Self> {
        let slack_bits = slack_bit_count(capacity)?;
        Self::with_slack_bits(n, profits, item_weights, capacity, slack_bits, mu, lambda)
    }

    /// Constructor with an explicit slack width (must still span `0..=W`).
    pub fn with_slack_bits(
        n: usize,
        profits: Vec<f64>,
        item_weights: Vec<u64>,
        capacity: u64,
        slack_bits: u32,
        mu: f64,
        lambda: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("QKP needs n >= 1".into()));
        }
        let expected = n * (n + 1) / 2;
        if profits.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: profits.len() });
        }
        if item_weights.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: item_weights.len() });
        }
        if item_weights.contains(&0) {
            return Err(Error::InvalidArgument("item weights must be positive".into()));
        }
        if capacity == 0 {
            return Err(Error::InvalidArgument("capacity W must be >= 1".into()));
        }
        if slack_bits >= 63 || (1u64 << slack_bits) - 1 < capacity {
            return Err(Error::InfeasibleConfiguration(format!(
                "{slack_bits} slack bits cannot represent slack values up to W = {capacity}"
            )));
        }
        check_finite("profits", &profits)?;
        check_penalty(mu, lambda)?;
        Ok(Self { n, profits, item_weights, capacity, slack_bits, mu, lambda, seed: None })
    }

    pub fn profit(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.profits[upper_offset(self.n, a, b)]
    }

    fn evaluate_index(&self, z: usize) -> Evaluation {
        let n = self.n;
        // x_i = (1 + s_i) / 2 = 1 - b_i
        let x = |i: usize| ((z >> i) & 1) ^ 1;
        let mut value = 0.0;
        let mut k = 0;
        for i in 0..n {
            let xi = x(i);
            for j in i..n {
                if xi == 1 && x(j) == 1 {
                    value += self.profits[k];
                }
                k += 1;
            }
        }
        let objective = -value / n as f64;
        let load: i64 = (0..n).filter(|&i| x(i) == 1).map(|i| self.item_weights[i] as i64).sum();
        let slack: i64 = (0..self.slack_bits as usize)
            .map(|d| (x(n + d) as i64) << d)
            .sum();
        let offset = (1i64 << self.slack_bits) - 1 - self.capacity as i64;
        let constraint = slack - offset - load;
        Evaluation { energy: augmented_energy(objective, constraint, self.mu, self.lambda), objective, constraint }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsingKind {
    /// Ferromagnetic couplings, `J ~ U[0, 1]`.
    Fm,
    /// Antiferromagnetic couplings, `J ~ U[-1, 0]`.
    Af,
}

impl IsingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IsingKind::Fm => "fm",
            IsingKind::Af => "af",
        }
    }
}

/// Fully connected Ising model `-sum J_{ij} s_i s_j [/N] - sum h_i s_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    pub n: usize,
    /// Couplings `J_{i,j}`, `i < j`, row-major.
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
    /// Divide every coupling by `N`.
    pub scale_by_n: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ising_kind: Option<IsingKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl IsingInstance {
    pub fn new(n: usize, couplings: Vec<f64>, fields: Vec<f64>, scale_by_n: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Ising model needs n >= 1".into()));
        }
        if couplings.len() != pair_count(n) {
            return Err(Error::LengthMismatch { expected: pair_count(n), actual: couplings.len() });
        }
        if fields.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: fields.len() });
        }
        check_finite("couplings", &couplings)?;
        check_finite("fields", &fields)?;
        Ok(Self { n, couplings, fields, scale_by_n, ising_kind: None, seed: None })
    }

    /// Uniform model: every coupling `j`, every field `h`, scaled by `1/N`.
    pub fn uniform(n: usize, j: f64, h: f64) -> Result<Self> {
        Self::new(n, vec![j; pair_count(n)], vec![h; n], true)
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.couplings[pair_offset(self.n, a, b)]
    }

    fn evaluate_index(&self, z: usize) -> Evaluation {
        let n = self.n;
        let spin = |i: usize| 1.0 - 2.0 * ((z >> i) & 1) as f64;
        let scale = if self.scale_by_n { 1.0 / n as f64 } else { 1.0 };
        let mut pair = 0.0;
        let mut k = 0;
        for i in 0..n {
            let si = spin(i);
            for j in (i + 1)..n {
                pair += self.couplings[k] * si * spin(j);
                k += 1;
            }
        }
        let field: f64 = (0..n).map(|i| self.fields[i] * spin(i)).sum();
        let energy = -scale * pair - field;
        Evaluation { energy, objective: energy, constraint: 0 }
    }
}

/// Any of the supported problem instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    Gbp(GbpInstance),
    Qkp(QkpInstance),
    Ising(IsingInstance),
}

impl From<GbpInstance> for Instance {
    fn from(v: GbpInstance) -> Self {
        Instance::Gbp(v)
    }
}

impl From<QkpInstance> for Instance {
    fn from(v: QkpInstance) -> Self {
        Instance::Qkp(v)
    }
}

impl From<IsingInstance> for Instance {
    fn from(v: IsingInstance) -> Self {
        Instance::Ising(v)
    }
}

impl Instance {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Instance::Gbp(_) => "gbp",
            Instance::Qkp(_) => "qkp",
            Instance::Ising(_) => "ising",
        }
    }

    /// Total number of binary variables `M`.
    pub fn variable_count(&self) -> usize {
        match self {
            Instance::Gbp(g) => g.n,
            Instance::Qkp(q) => q.n + q.slack_bits as usize,
            Instance::Ising(i) => i.n,
        }
    }

    pub fn is_constrained(&self) -> bool {
        !matches!(self, Instance::Ising(_))
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Instance::Gbp(g) => g.seed,
            Instance::Qkp(q) => q.seed,
            Instance::Ising(i) => i.seed,
        }
    }

    /// `(mu, lambda)` for constrained instances.
    pub fn penalty(&self) -> Option<(f64, f64)> {
        match self {
            Instance::Gbp(g) => Some((g.mu, g.lambda)),
            Instance::Qkp(q) => Some((q.mu, q.lambda)),
            Instance::Ising(_) => None,
        }
    }

    /// Copy with new penalty coefficients. Ising instances are returned unchanged.
    pub fn with_penalty(&self, mu: f64, lambda: f64) -> Result<Self> {
        check_penalty(mu, lambda)?;
        let mut out = self.clone();
        match &mut out {
            Instance::Gbp(g) => {
                g.mu = mu;
                g.lambda = lambda;
            }
            Instance::Qkp(q) => {
                q.mu = mu;
                q.lambda = lambda;
            }
            Instance::Ising(_) => {}
        }
        Ok(out)
    }

    pub fn evaluate_energy(&self, config: &SpinConfiguration) -> Result<Evaluation> {
        let m = self.variable_count();
        if config.len() != m {
            return Err(Error::LengthMismatch { expected: m, actual: config.len() });
        }
        Ok(self.evaluate_index(config.index()))
    }

    /// Evaluation of basis state `z` (no length check).
    pub fn evaluate_index(&self, z: usize) -> Evaluation {
        match self {
            Instance::Gbp(g) => g.evaluate_index(z),
            Instance::Qkp(q) => q.evaluate_index(z),
            Instance::Ising(i) => i.evaluate_index(z),
        }
    }
}

/// Random GBP instance with `w_{i,j} ~ U[0.8, 1.2]`, drawn in row-major pair order.
pub fn generate_gbp(n: usize, c: i64, mu: f64, lambda: f64, seed: u64) -> Result<GbpInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument("GBP needs n >= 2".into()));
    }
    check_gbp_imbalance(n, c)?;
    let mut rng = InstanceRng::new(seed);
    let weights = (0..pair_count(n)).map(|_| rng.uniform(0.8, 1.2)).collect();
    let mut g = GbpInstance::new(n, weights, c, mu, lambda)?;
    g.seed = Some(seed);
    Ok(g)
}

/// Random QKP instance with unit item weights and `p_{i,j} ~ U[0.8, 1.2]`
/// for all `i <= j`, drawn in row-major order.
pub fn generate_qkp(n: usize, capacity: u64, mu: f64, lambda: f64, seed: u64) -> Result<QkpInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("QKP needs n >= 1".into()));
    }
    let mut rng = InstanceRng::new(seed);
    let profits = (0..n * (n + 1) / 2).map(|_| rng.uniform(0.8, 1.2)).collect();
    let mut q = QkpInstance::new(n, profits, vec![1; n], capacity, mu, lambda)?;
    q.seed = Some(seed);
    Ok(q)
}

/// Random Ising instance: couplings first (row-major pairs), then fields.
pub fn generate_ising(n: usize, kind: IsingKind, seed: u64) -> Result<IsingInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument("Ising generation needs n >= 2".into()));
    }
    let mut rng = InstanceRng::new(seed);
    let (lo, hi) = match kind {
        IsingKind::Fm => (0.0, 1.0),
        IsingKind::Af => (-1.0, 0.0),
    };
    let couplings = (0..pair_count(n)).map(|_| rng.uniform(lo, hi)).collect();
    let fields = (0..n).map(|_| rng.uniform(0.0, 2.0)).collect();
    let mut inst = IsingInstance::new(n, couplings, fields, true)?;
    inst.ising_kind = Some(kind);
    inst.seed = Some(seed);
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_gbp(lambda: f64) -> Instance {
        GbpInstance::new(2, vec![1.0], 0, 1.0, lambda).unwrap().into()
    }

    #[test]
    fn offsets_are_dense_and_ordered() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_offset(n, i, j), k);
                k += 1;
            }
        }
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                assert_eq!(upper_offset(n, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn slack_bits() {
        assert_eq!(slack_bit_count(1).unwrap(), 1);
        assert_eq!(slack_bit_count(2).unwrap(), 2);
        assert_eq!(slack_bit_count(3).unwrap(), 2);
        assert_eq!(slack_bit_count(4).unwrap(), 3);
        assert_eq!(slack_bit_count(7).unwrap(), 3);
        assert_eq!(slack_bit_count(8).unwrap(), 4);
        assert!(slack_bit_count(0).is_err());
        for w in 1..200u64 {
            let d = slack_bit_count(w).unwrap();
            assert!((1u64 << d) - 1 >= w);
            assert!(d == 0 || (1u64 << (d - 1)) - 1 < w);
        }
    }

    #[test]
    fn gbp_hand_values() {
        let inst = toy_gbp(0.0);
        let mixed = SpinConfiguration::from_spins(&[1, -1]).unwrap();
        let e = inst.evaluate_energy(&mixed).unwrap();
        assert_eq!((e.energy, e.objective, e.constraint), (0.5, 0.5, 0));
        let up = SpinConfiguration::from_spins(&[1, 1]).unwrap();
        let e = inst.evaluate_energy(&up).unwrap();
        assert_eq!((e.energy, e.objective, e.constraint), (2.0, 0.0, 2));

        let e = toy_gbp(1.0).evaluate_energy(&up).unwrap();
        assert_eq!(e.energy, 0.0);
    }

    #[test]
    fn qkp_hand_values() {
        let inst: Instance = QkpInstance::new(1, vec![1.0], vec![1], 1, 1.0, 0.0).unwrap().into();
        assert_eq!(inst.variable_count(), 2);
        // x = 1, y = 1
        let c = SpinConfiguration::from_spins(&[1, 1]).unwrap();
        let e = inst.evaluate_energy(&c).unwrap();
        assert_eq!((e.energy, e.objective, e.constraint), (-1.0, -1.0, 0));
        // x = 0, y = 1
        let c = SpinConfiguration::from_spins(&[-1, 1]).unwrap();
        let e = inst.evaluate_energy(&c).unwrap();
        assert_eq!((e.energy, e.objective, e.constraint), (0.5, 0.0, 1));
    }

    #[test]
    fn ising_scaling_flag() {
        let mut inst = IsingInstance::new(2, vec![2.0], vec![0.5, -0.25], false).unwrap();
        let c = SpinConfiguration::from_spins(&[1, -1]).unwrap();
        let e = Instance::from(inst.clone()).evaluate_energy(&c).unwrap();
        assert_eq!(e.energy, 2.0 - 0.5 - 0.25);
        inst.scale_by_n = true;
        let e = Instance::from(inst).evaluate_energy(&c).unwrap();
        assert_eq!(e.energy, 1.0 - 0.75);
        assert_eq!(e.constraint, 0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let c = SpinConfiguration::from_index(0, 3);
        assert!(matches!(toy_gbp(0.0).evaluate_energy(&c), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn generate_gbp_contract() {
        let g = generate_gbp(6, 0, 1.0, 0.0, 42).unwrap();
        assert_eq!(g.weights.len(), 15);
        assert!(g.weights.iter().all(|w| (0.8..=1.2).contains(w)));
        assert_eq!(g, generate_gbp(6, 0, 1.0, 0.0, 42).unwrap());
        assert_ne!(g.weights, generate_gbp(6, 0, 1.0, 0.0, 43).unwrap().weights);
        assert!(matches!(generate_gbp(6, 1, 1.0, 0.0, 42), Err(Error::InfeasibleConfiguration(_))));
        assert!(matches!(generate_gbp(6, 8, 1.0, 0.0, 42), Err(Error::InfeasibleConfiguration(_))));
    }

    #[test]
    fn generate_qkp_contract() {
        let q = generate_qkp(5, 1, 1.0, 0.0, 7).unwrap();
        assert_eq!(q.profits.len(), 15);
        assert!(q.profits.iter().all(|p| (0.8..=1.2).contains(p)));
        assert_eq!(q.item_weights, vec![1; 5]);
        assert_eq!(q.slack_bits, 1);
        assert_eq!(q, generate_qkp(5, 1, 1.0, 0.0, 7).unwrap());

        let q = generate_qkp(1, 1, 1.0, 0.0, 0).unwrap();
        assert_eq!((q.profits.len(), q.slack_bits), (1, 1));
        assert_eq!(generate_qkp(5, 4, 1.0, 0.0, 0).unwrap().slack_bits, 3);
    }

    #[test]
    fn generate_ising_contract() {
        let fm = generate_ising(4, IsingKind::Fm, 1).unwrap();
        assert_eq!(fm.couplings.len(), 6);
        assert!(fm.couplings.iter().all(|j| (0.0..=1.0).contains(j)));
        assert!(fm.fields.iter().all(|h| (0.0..=2.0).contains(h)));
        assert!(fm.scale_by_n);
        let af = generate_ising(4, IsingKind::Af, 1).unwrap();
        assert!(af.couplings.iter().all(|j| (-1.0..=0.0).contains(j)));
        assert_eq!(af, generate_ising(4, IsingKind::Af, 1).unwrap());
    }

    #[test]
    fn constructors_validate() {
        assert!(GbpInstance::new(3, vec![1.0; 2], 1, 1.0, 0.0).is_err());
        assert!(GbpInstance::new(2, vec![f64::NAN], 0, 1.0, 0.0).is_err());
        assert!(GbpInstance::new(2, vec![1.0], 0, 0.0, 0.0).is_err());
        assert!(QkpInstance::with_slack_bits(1, vec![1.0], vec![1], 1, 0, 1.0, 0.0).is_err());
        assert!(QkpInstance::with_slack_bits(1, vec![1.0], vec![1], 4, 2, 1.0, 0.0).is_err());
        assert!(QkpInstance::new(1, vec![1.0], vec![0], 1, 1.0, 0.0).is_err());
    }
}
