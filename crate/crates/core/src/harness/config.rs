//! Experiment configuration, read from JSON.

use serde::{Deserialize, Serialize};

use crate::dynamics::TauMode;
use crate::error::{Error, Result};
use crate::model::IsingKind;
use crate::spectrum::{RootChoice, TailRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    LambdaMuMap,
    MuSlices,
    DeltaEfSweep,
    ConstraintSweep,
    P0VsMaxqd,
    DeltaEhcScan,
    HdScan,
    SizeScan,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::LambdaMuMap,
        ExperimentId::MuSlices,
        ExperimentId::DeltaEfSweep,
        ExperimentId::ConstraintSweep,
        ExperimentId::P0VsMaxqd,
        ExperimentId::DeltaEhcScan,
        ExperimentId::HdScan,
        ExperimentId::SizeScan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::LambdaMuMap => "lambda_mu_map",
            ExperimentId::MuSlices => "mu_slices",
            ExperimentId::DeltaEfSweep => "delta_ef_sweep",
            ExperimentId::ConstraintSweep => "constraint_sweep",
            ExperimentId::P0VsMaxqd => "p0_vs_maxqd",
            ExperimentId::DeltaEhcScan => "delta_ehc_scan",
            ExperimentId::HdScan => "hd_scan",
            ExperimentId::SizeScan => "size_scan",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == name)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{name}'")))
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemFamily {
    Gbp,
    Qkp,
    Ising,
}

impl ProblemFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemFamily::Gbp => "gbp",
            ProblemFamily::Qkp => "qkp",
            ProblemFamily::Ising => "ising",
        }
    }
}

/// Inclusive uniform range; `points == 1` gives just `from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.to } else { self.from + step * k as f64 })
            .collect()
    }

    fn check(&self, what: &str) -> Result<()> {
        if self.points == 0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::Config(format!("{what}: range needs finite bounds and at least one point")));
        }
        Ok(())
    }
}

/// Penalty values to sweep, either as multiples of the instance's `mu*` or
/// as absolute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuGrid {
    Relative(Range),
    Absolute(Range),
    List(Vec<f64>),
}

impl Default for MuGrid {
    fn default() -> Self {
        MuGrid::Relative(Range { from: 0.5, to: 1.5, points: 101 })
    }
}

impl MuGrid {
    /// Concrete penalty values for an instance whose boundary is `mu_star`.
    pub fn values(&self, mu_star: f64) -> Vec<f64> {
        match self {
            MuGrid::Relative(r) => r.values().into_iter().map(|f| f * mu_star).collect(),
            MuGrid::Absolute(r) => r.values(),
            MuGrid::List(v) => v.clone(),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            MuGrid::Relative(r) | MuGrid::Absolute(r) => r.check("mu")?,
            MuGrid::List(v) if v.is_empty() => return Err(Error::Config("mu list is empty".into())),
            MuGrid::List(_) => {}
        }
        if self.values(1.0).iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Config("every mu must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Either a fixed `lambda` or `"calibrated"`, meaning the root of
/// `mu*(lambda) = target_mu_star` chosen by `lambda_root`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Calibrated,
    Fixed(f64),
}

impl Serialize for LambdaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LambdaSpec::Calibrated => s.serialize_str("calibrated"),
            LambdaSpec::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Value(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Name(s) if s == "calibrated" => Ok(LambdaSpec::Calibrated),
            Raw::Name(s) => Err(serde::de::Error::custom(format!("expected \"calibrated\" or a number, got \"{s}\""))),
            Raw::Value(v) => Ok(LambdaSpec::Fixed(v)),
        }
    }
}

fn default_instance_count() -> usize {
    10
}
fn default_grid_points() -> usize {
    1001
}
fn default_taus() -> Vec<TauMode> {
    vec![TauMode::Static]
}
fn default_target_mu_star() -> f64 {
    1.0
}
fn default_lambda_search() -> (f64, f64) {
    (-3.0, 3.0)
}
fn default_mu_factors() -> Vec<f64> {
    vec![0.9, 1.0, 1.1]
}
fn default_ising_kinds() -> Vec<IsingKind> {
    vec![IsingKind::Fm, IsingKind::Af]
}
fn default_sizes() -> Vec<usize> {
    (2..=10).map(|k| 1 << k).collect()
}
fn default_field() -> f64 {
    2.5
}
fn default_couplings() -> Vec<f64> {
    vec![1.0, -1.0]
}
fn default_bin_width() -> f64 {
    0.01
}
fn default_lambda() -> LambdaSpec {
    LambdaSpec::Calibrated
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Problem family; the Ising experiments ignore it.
    #[serde(default)]
    pub kind: Option<ProblemFamily>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Imbalance `c` for GBP or capacity `W` for QKP.
    #[serde(default)]
    pub constraint: Option<i64>,
    /// Constraint values for the sweeps over constraint settings.
    #[serde(default)]
    pub constraint_values: Vec<i64>,
    #[serde(default)]
    pub mu: MuGrid,
    /// Multiples of `mu*` for `mu_slices`.
    #[serde(default = "default_mu_factors")]
    pub mu_factors: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: LambdaSpec,
    /// Lambda axis of `lambda_mu_map`.
    #[serde(default)]
    pub lambda_grid: Option<Range>,
    #[serde(default = "default_target_mu_star")]
    pub target_mu_star: f64,
    #[serde(default = "default_lambda_search")]
    pub lambda_search: (f64, f64),
    #[serde(default)]
    pub lambda_root: RootChoice,
    #[serde(default = "default_taus")]
    pub taus: Vec<TauMode>,
    #[serde(default = "default_instance_count")]
    pub instance_count: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_ising_kinds")]
    pub ising_kinds: Vec<IsingKind>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_field")]
    pub field: f64,
    #[serde(default = "default_couplings")]
    pub couplings: Vec<f64>,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    /// Placement of the upper levels in `hd_scan`.
    #[serde(default)]
    pub hd_tail: TailRule,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// A configuration with every optional field at its default.
    pub fn new(experiment: ExperimentId) -> Self {
        serde_json::from_value(serde_json::json!({ "experiment": experiment.as_str() }))
            .expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Seed of instance `index`: `master_seed + index`, wrapping.
    pub fn instance_seed(&self, index: usize) -> u64 {
        self.master_seed.wrapping_add(index as u64)
    }

    pub(crate) fn problem(&self) -> Result<(ProblemFamily, usize)> {
        let kind = self.kind.ok_or_else(|| Error::Config(format!("{} needs \"kind\"", self.experiment)))?;
        let n = self.n.ok_or_else(|| Error::Config(format!("{} needs \"n\"", self.experiment)))?;
        Ok((kind, n))
    }

    pub(crate) fn single_constraint(&self) -> Result<i64> {
        self.constraint.ok_or_else(|| Error::Config(format!("{} needs \"constraint\"", self.experiment)))
    }

    /// Schema and range checks; no numerical work.
    pub fn validate(&self) -> Result<()> {
        use ExperimentId::*;
        let fail = |msg: String| Err(Error::Config(msg));
        if self.grid_points < 2 {
            return fail(format!("grid_points must be >= 2, got {}", self.grid_points));
        }
        if self.taus.is_empty() {
            return fail("taus is empty".into());
        }
        if self.threads == Some(0) {
            return fail("threads must be >= 1".into());
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return fail("bin_width must be > 0".into());
        }
        if !(self.target_mu_star.is_finite() && self.target_mu_star > 0.0) {
            return fail("target_mu_star must be > 0".into());
        }
        let (lo, hi) = self.lambda_search;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return fail("lambda_search must be an increasing finite pair".into());
        }
        if let LambdaSpec::Fixed(v) = self.lambda {
            if !v.is_finite() {
                return fail("lambda must be finite".into());
            }
        }
        self.mu.check()?;

        match self.experiment {
            LambdaMuMap | MuSlices | DeltaEfSweep | ConstraintSweep | P0VsMaxqd => {
                let (kind, n) = self.problem()?;
                if kind == ProblemFamily::Ising {
                    return fail(format!("{} needs a constrained problem (gbp or qkp)", self.experiment));
                }
                if n < 2 {
                    return fail(format!("n must be >= 2, got {n}"));
                }
                if self.instance_count == 0 {
                    return fail("instance_count must be >= 1".into());
                }
                match self.experiment {
                    ConstraintSweep | P0VsMaxqd => {
                        if self.constraint_values.is_empty() {
                            return fail(format!("{} needs \"constraint_values\"", self.experiment));
                        }
                    }
                    _ => {
                        self.single_constraint()?;
                    }
                }
                let constraints: Vec<i64> = match self.experiment {
                    ConstraintSweep | P0VsMaxqd => self.constraint_values.clone(),
                    _ => vec![self.single_constraint()?],
                };
                if kind == ProblemFamily::Qkp && constraints.iter().any(|&w| w < 0) {
                    return fail("QKP capacity must be >= 0".into());
                }
                if self.experiment == LambdaMuMap {
                    match &self.lambda_grid {
                        Some(r) => r.check("lambda_grid")?,
                        None => return fail("lambda_mu_map needs \"lambda_grid\"".into()),
                    }
                    if matches!(self.mu, MuGrid::Relative(_)) {
                        return fail("lambda_mu_map needs an absolute or list mu grid".into());
                    }
                }
                if self.experiment == MuSlices
                    && (self.mu_factors.is_empty() || self.mu_factors.iter().any(|f| !(f.is_finite() && *f > 0.0)))
                {
                    return fail("mu_factors must be non-empty and positive".into());
                }
            }
            DeltaEhcScan | HdScan => {
                let n = self.n.ok_or_else(|| Error::Config(format!("{} needs \"n\"", self.experiment)))?;
                if n < 2 {
                    return fail(format!("n must be >= 2, got {n}"));
                }
                if self.ising_kinds.is_empty() {
                    return fail("ising_kinds is empty".into());
                }
                if self.experiment == DeltaEhcScan && self.instance_count == 0 {
                    return fail("instance_count must be >= 1".into());
                }
            }
            SizeScan => {
                if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
                    return fail("sizes must be non-empty with every size >= 2".into());
                }
                if self.couplings.is_empty() || self.couplings.iter().any(|j| !j.is_finite()) {
                    return fail("couplings must be non-empty and finite".into());
                }
                if !self.field.is_finite() {
                    return fail("field must be finite".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "delta_ef_sweep", "kind": "gbp", "n": 6, "constraint": 0}"#)
            .unwrap();
        assert_eq!(cfg.grid_points, 1001);
        assert_eq!(cfg.instance_count, 10);
        assert_eq!(cfg.lambda, LambdaSpec::Calibrated);
        assert_eq!(cfg.mu.values(2.0).len(), 101);
        assert_eq!(cfg.mu.values(2.0)[0], 1.0);
        assert_eq!(cfg.mu.values(2.0)[100], 3.0);
        assert_eq!(cfg.instance_seed(3), 3);
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn taus_and_lambda_parse() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "mu_slices", "kind": "qkp", "n": 5, "constraint": 1,
                "taus": ["static", 100, 1000.5], "lambda": 0.7}"#,
        )
        .unwrap();
        assert_eq!(cfg.taus, vec![TauMode::Static, TauMode::Finite(100.0), TauMode::Finite(1000.5)]);
        assert_eq!(cfg.lambda, LambdaSpec::Fixed(0.7));
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"experiment": "nope"}"#,
            r#"{"experiment": "delta_ef_sweep", "kind": "gbp", "n": 6}"#,
            r#"{"experiment": "delta_ef_sweep", "kind": "ising", "n": 6, "constraint": 0}"#,
            r#"{"experiment": "delta_ef_sweep", "kind": "gbp", "n": 6, "constraint": 0, "grid_points": 1}"#,
            r#"{"experiment": "delta_ef_sweep", "kind": "gbp", "n": 6, "constraint": 0, "taus": []}"#,
            r#"{"experiment": "delta_ef_sweep", "kind": "gbp", "n": 6, "constraint": 0, "lambda": "auto"}"#,
            r#"{"experiment": "delta_ef_sweep", "kind": "gbp", "n": 6, "constraint": 0, "mu": {"list": []}}"#,
            r#"{"experiment": "lambda_mu_map", "kind": "qkp", "n": 5, "constraint": 1}"#,
            r#"{"experiment": "constraint_sweep", "kind": "gbp", "n": 6}"#,
            r#"{"experiment": "size_scan", "sizes": []}"#,
            r#"{"experiment": "hd_scan"}"#,
            r#"{"experiment": "hd_scan", "n": 4, "typo": 1}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn range_endpoints_exact() {
        let r = Range { from: 0.0, to: 1.4, points: 71 };
        let v = r.values();
        assert_eq!(v.len(), 71);
        assert_eq!((v[0], v[70]), (0.0, 1.4));
        assert!((v[35] - 0.7).abs() < 1e-15);
    }
}
