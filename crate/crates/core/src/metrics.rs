//! The mid-anneal effectiveness metric and the statistics used to aggregate it.
//!
//! For a probability series `P(s)`,
//! `Q_d = chi (max P - P(0)) (max P - P(1))` with `chi = 1 / (1 - P(0))`.
//! The maximum is taken over the recorded grid, so it can underestimate the
//! true maximum by at most the largest step-to-step variation of the series.

use serde::Serialize;

use crate::dynamics::{Series, Trajectory};
use crate::error::{Error, Result};
use crate::numfmt::csv_float;

/// Slack allowed on probabilities before a series is rejected as corrupt.
const PROB_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QdReport {
    pub label: String,
    pub p0: f64,
    pub p_max: f64,
    /// Earliest grid point where the maximum is attained.
    pub s_max: f64,
    pub p_end: f64,
    pub chi: f64,
    pub qd: f64,
}

impl QdReport {
    pub const CSV_HEADER: &'static str = "instance_id,label,tau_or_static,p0,p_max,s_max,p_end,chi,qd";

    pub fn csv_row(&self, instance_id: &str, tau: &str) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            instance_id,
            self.label,
            tau,
            csv_float(self.p0),
            csv_float(self.p_max),
            csv_float(self.s_max),
            csv_float(self.p_end),
            csv_float(self.chi),
            csv_float(self.qd)
        )
    }
}

/// `Q_d` of a series sampled on `grid`.
pub fn compute_qd(label: &str, grid: &[f64], values: &[f64]) -> Result<QdReport> {
    if values.is_empty() || grid.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "series of length {} does not match grid of length {}",
            values.len(),
            grid.len()
        )));
    }
    if let Some(bad) = values.iter().find(|p| !p.is_finite() || **p < -PROB_SLACK || **p > 1.0 + PROB_SLACK) {
        return Err(Error::DataCorruption(format!("probability {bad} outside [0, 1]")));
    }
    let p0 = values[0];
    if p0 >= 1.0 {
        return Err(Error::UndefinedChi(p0));
    }
    let p_end = values[values.len() - 1];
    let (mut k_max, mut p_max) = (0, p0);
    for (k, &p) in values.iter().enumerate() {
        if p > p_max {
            k_max = k;
            p_max = p;
        }
    }
    let chi = 1.0 / (1.0 - p0);
    let qd = (chi * (p_max - p0) * (p_max - p_end)).clamp(0.0, 1.0);
    Ok(QdReport { label: label.to_string(), p0, p_max, s_max: grid[k_max], p_end, chi, qd })
}

/// `Q_d` of one labelled series of a trajectory.
pub fn qd_of(trajectory: &Trajectory, series: &Series) -> Result<QdReport> {
    compute_qd(&series.label, &trajectory.grid, &series.values)
}

/// One bin of [`bin_aggregate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub center: f64,
    pub mean: f64,
    /// Population (divide-by-count) standard deviation.
    pub std: f64,
    pub count: usize,
}

/// Groups `(x, y)` points into half-open bins `[k w, (k+1) w)` and reports
/// the mean and population standard deviation of `y` in each non-empty bin,
/// ordered by `x`.
pub fn bin_aggregate(points: &[(f64, f64)], width: f64) -> Result<Vec<Bin>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidArgument(format!("bin width must be > 0, got {width}")));
    }
    let mut keyed: Vec<(i64, f64)> = points.iter().map(|&(x, y)| ((x / width).floor() as i64, y)).collect();
    keyed.sort_by_key(|&(k, _)| k);
    let mut bins = Vec::new();
    for chunk in keyed.chunk_by(|a, b| a.0 == b.0) {
        let count = chunk.len();
        let mean = chunk.iter().map(|p| p.1).sum::<f64>() / count as f64;
        let var = chunk.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / count as f64;
        bins.push(Bin { center: (chunk[0].0 as f64 + 0.5) * width, mean, std: var.sqrt(), count });
    }
    Ok(bins)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Ranks starting at 1, tied values sharing their average rank.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), actual: ys.len() });
    }
    if xs.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 points, got {}", xs.len())));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("a series is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
