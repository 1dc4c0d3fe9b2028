use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::DiagonalProblem;
use crate::numfmt::{csv_float, to_json_with_digits};
use crate::rng::PRNG_ID;
use crate::spectrum::SpectrumSummary;

/// Either the adiabatic limit or a finite annealing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    Static,
    Finite(f64),
}

impl fmt::Display for TauMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauMode::Static => f.write_str("static"),
            TauMode::Finite(t) => f.write_str(&csv_float(*t)),
        }
    }
}

impl Serialize for TauMode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TauMode::Static => s.serialize_str("static"),
            TauMode::Finite(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for TauMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) if t.is_finite() && t > 0.0 => Ok(TauMode::Finite(t)),
            Raw::Num(t) => Err(serde::de::Error::custom(format!("annealing time must be > 0, got {t}"))),
            Raw::Text(s) if s == "static" => Ok(TauMode::Static),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected \"static\" or a number, got {s:?}"))),
        }
    }
}

/// A labelled set of basis indices (or collective levels) whose total
/// probability is tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub label: String,
    pub states: Vec<usize>,
}

impl TargetSet {
    pub fn new(label: impl Into<String>, states: Vec<usize>) -> Self {
        Self { label: label.into(), states }
    }

    pub fn feasible(diag: &DiagonalProblem) -> Self {
        Self::new("feasible", diag.feasible_states())
    }

    pub fn optimal(diag: &DiagonalProblem) -> Self {
        Self::new("optimal", diag.optimal_states())
    }

    pub fn first_excited(summary: &SpectrumSummary) -> Self {
        Self::new("first_excited", summary.e1_states.clone())
    }

    pub(crate) fn check(targets: &[TargetSet], dim: usize) -> Result<()> {
        for t in targets {
            if let Some(&bad) = t.states.iter().find(|&&z| z >= dim) {
                return Err(Error::InvalidArgument(format!(
                    "target '{}' contains state {bad} outside dimension {dim}",
                    t.label
                )));
            }
        }
        Ok(())
    }
}

/// Probability series of one target set on the trajectory grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

impl Series {
    /// Largest change between neighbouring grid points. Bounds how much the
    /// true maximum can exceed the maximum sampled on this grid.
    pub fn max_step_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMeta {
    pub instance_id: Option<String>,
    pub seed: Option<u64>,
    /// Integrator step for finite-time runs.
    pub step: Option<f64>,
    /// Largest `| ||psi|| - 1 |` seen at a record point.
    pub max_norm_drift: f64,
    /// Grid points where the instantaneous ground level was degenerate.
    pub degenerate_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: TauMode,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
    pub meta: TrajectoryMeta,
}

/// `points` uniformly spaced values from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 grid points, got {points}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|k| k as f64 / last).collect())
}

impl Trajectory {
    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for s in &self.series {
            out.push(',');
            out.push_str(&s.label);
        }
        out.push('\n');
        for (k, &s) in self.grid.iter().enumerate() {
            out.push_str(&csv_float(s));
            for series in &self.series {
                out.push(',');
                out.push_str(&csv_float(series.values[k]));
            }
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing how the trajectory was produced.
    pub fn sidecar_json(&self) -> String {
        let variation: serde_json::Map<String, serde_json::Value> = self
            .series
            .iter()
            .map(|s| (s.label.clone(), serde_json::json!(s.max_step_variation())))
            .collect();
        let doc = serde_json::json!({
            "instance_id": self.meta.instance_id,
            "tau": self.mode,
            "grid_points": self.grid.len(),
            "step_size": self.meta.step,
            "seed": self.meta.seed,
            "prng_id": PRNG_ID,
            "labels": self.series.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
            "max_step_variation": variation,
            "max_norm_drift": self.meta.max_norm_drift,
            "degenerate_points": self.meta.degenerate_points,
        });
        to_json_with_digits(&doc, 12).expect("json value serializes")
    }
}
