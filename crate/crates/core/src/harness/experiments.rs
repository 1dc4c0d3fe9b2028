//! The experiment runners. Each one returns typed records, a table of
//! aggregates and a log; [`super::output`] turns them into files.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentId, LambdaSpec, ProblemFamily};
use crate::collective::{build_collective, collective_trajectories};
use crate::dynamics::{adiabatic_trajectory, evolve, AnnealSchedule, TargetSet, TauMode, Trajectory};
use crate::error::{Error, Result};
use crate::metrics::{bin_aggregate, compute_qd, mean_std, spearman, QdReport};
use crate::model::{
    build_diagonal, generate_gbp, generate_ising, generate_qkp, DiagonalProblem, Instance, IsingKind,
    SpinConfiguration,
};
use crate::numfmt::csv_float;
use crate::spectrum::{calibrate_profile, hamming_distance, permute_spectrum_with, select_root, summarize, PenaltyProfile};

/// A CSV table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per-(instance, mu, tau) result of the penalty sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub instance_id: String,
    pub seed: u64,
    pub constraint: i64,
    pub lambda: f64,
    pub mu: f64,
    pub mu_star: f64,
    pub delta_ef: f64,
    pub tau: TauMode,
    pub feasible: QdReport,
    pub optimal: QdReport,
}

/// Per-(instance, constraint) summary of a constraint sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct P0Record {
    pub instance_id: String,
    pub seed: u64,
    pub constraint: i64,
    pub p_f0: f64,
    pub max_qd_f: f64,
    pub p_opt0: f64,
    pub max_qd_opt: f64,
}

/// Random Ising instance scored against its first excited level.
#[derive(Debug, Clone, PartialEq)]
pub struct EhcRecord {
    pub instance_id: String,
    pub seed: u64,
    pub ising_kind: IsingKind,
    pub delta_ehc: f64,
    pub tau: TauMode,
    pub report: QdReport,
}

/// One relabelled spectrum of the Hamming-distance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct HdRecord {
    pub ising_kind: IsingKind,
    pub seed: u64,
    pub gs_state: usize,
    pub e1_state: usize,
    pub hd: usize,
    pub report: QdReport,
}

/// One size of the uniform collective model.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeRecord {
    pub n: usize,
    pub coupling: f64,
    pub field: f64,
    pub gs_level: usize,
    pub e1_level: usize,
    pub hd: usize,
    pub tau: TauMode,
    pub report: QdReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    /// `lambda_mu_map`, `delta_ef_sweep`, `constraint_sweep`, `mu_slices`.
    Sweep(Vec<SweepRecord>),
    P0(Vec<P0Record>),
    Ehc(Vec<EhcRecord>),
    Hd(Vec<HdRecord>),
    Size(Vec<SizeRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Sweep(v) => v.len(),
            Records::P0(v) => v.len(),
            Records::Ehc(v) => v.len(),
            Records::Hd(v) => v.len(),
            Records::Size(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_table(&self) -> Table {
        let qd_cols = |r: &QdReport| {
            [r.p0, r.p_max, r.s_max, r.p_end, r.chi, r.qd].into_iter().map(csv_float).collect::<Vec<_>>()
        };
        match self {
            Records::Sweep(v) => {
                let mut t = Table::new(&[
                    "instance_id", "seed", "constraint", "lambda", "mu", "mu_star", "delta_ef", "tau_or_static",
                    "p_f0", "p_f_max", "s_f_max", "p_f_end", "chi_f", "qd_f",
                    "p_opt0", "p_opt_max", "s_opt_max", "p_opt_end", "chi_opt", "qd_opt",
                ]);
                for r in v {
                    let mut row = vec![
                        r.instance_id.clone(),
                        r.seed.to_string(),
                        r.constraint.to_string(),
                        csv_float(r.lambda),
                        csv_float(r.mu),
                        csv_float(r.mu_star),
                        csv_float(r.delta_ef),
                        r.tau.to_string(),
                    ];
                    row.extend(qd_cols(&r.feasible));
                    row.extend(qd_cols(&r.optimal));
                    t.rows.push(row);
                }
                t
            }
            Records::P0(v) => {
                let mut t = Table::new(&["instance_id", "seed", "constraint", "p_f0", "max_qd_f", "p_opt0", "max_qd_opt"]);
                for r in v {
                    t.rows.push(vec![
                        r.instance_id.clone(),
                        r.seed.to_string(),
                        r.constraint.to_string(),
                        csv_float(r.p_f0),
                        csv_float(r.max_qd_f),
                        csv_float(r.p_opt0),
                        csv_float(r.max_qd_opt),
                    ]);
                }
                t
            }
            Records::Ehc(v) => {
                let mut t = Table::new(&[
                    "instance_id", "seed", "ising_kind", "delta_ehc", "tau_or_static",
                    "p0", "p_max", "s_max", "p_end", "chi", "qd_e1",
                ]);
                for r in v {
                    let mut row = vec![
                        r.instance_id.clone(),
                        r.seed.to_string(),
                        r.ising_kind.as_str().to_string(),
                        csv_float(r.delta_ehc),
                        r.tau.to_string(),
                    ];
                    row.extend(qd_cols(&r.report));
                    t.rows.push(row);
                }
                t
            }
            Records::Hd(v) => {
                let mut t = Table::new(&[
                    "ising_kind", "seed", "gs_state", "e1_state", "hd", "tau_or_static",
                    "p0", "p_max", "s_max", "p_end", "chi", "qd_e1",
                ]);
                for r in v {
                    let mut row = vec![
                        r.ising_kind.as_str().to_string(),
                        r.seed.to_string(),
                        r.gs_state.to_string(),
                        r.e1_state.to_string(),
                        r.hd.to_string(),
                        TauMode::Static.to_string(),
                    ];
                    row.extend(qd_cols(&r.report));
                    t.rows.push(row);
                }
                t
            }
            Records::Size(v) => {
                let mut t = Table::new(&[
                    "n", "inv_n", "coupling", "field", "gs_level", "e1_level", "hd", "tau_or_static",
                    "p0", "p_max", "s_max", "p_end", "chi", "qd_e1",
                ]);
                for r in v {
                    let mut row = vec![
                        r.n.to_string(),
                        csv_float(1.0 / r.n as f64),
                        csv_float(r.coupling),
                        csv_float(r.field),
                        r.gs_level.to_string(),
                        r.e1_level.to_string(),
                        r.hd.to_string(),
                        r.tau.to_string(),
                    ];
                    row.extend(qd_cols(&r.report));
                    t.rows.push(row);
                }
                t
            }
        }
    }
}

/// Everything one experiment run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub experiment: ExperimentId,
    pub records: Records,
    pub bins: Table,
    /// Experiment-specific entries merged into `meta.json`.
    pub meta: serde_json::Map<String, serde_json::Value>,
    pub log: Vec<String>,
    /// Additional files, as `(relative path, contents)`.
    pub extra_files: Vec<(String, String)>,
}

impl ExperimentOutput {
    fn new(experiment: ExperimentId, records: Records, bins: Table, log: Vec<String>) -> Self {
        Self { experiment, records, bins, meta: serde_json::Map::new(), log, extra_files: Vec::new() }
    }
}

fn note(log: &mut Vec<String>, line: String) {
    log::warn!("{line}");
    log.push(line);
}

/// Static or finite-time trajectory of a full-space problem.
pub fn trajectory(diag: &DiagonalProblem, mode: TauMode, targets: &[TargetSet], grid_points: usize) -> Result<Trajectory> {
    match mode {
        TauMode::Static => adiabatic_trajectory(diag, targets, grid_points),
        TauMode::Finite(tau) => evolve(diag, &AnnealSchedule::new(tau)?, targets, grid_points),
    }
}

fn qd_of_label(traj: &Trajectory, label: &str) -> Result<QdReport> {
    let series = traj
        .series(label)
        .ok_or_else(|| Error::InvalidArgument(format!("trajectory has no series '{label}'")))?;
    compute_qd(label, &traj.grid, &series.values)
}

fn constrained_instance(kind: ProblemFamily, n: usize, constraint: i64, seed: u64) -> Result<Instance> {
    match kind {
        ProblemFamily::Gbp => Ok(generate_gbp(n, constraint, 1.0, 0.0, seed)?.into()),
        ProblemFamily::Qkp => {
            let w = u64::try_from(constraint)
                .map_err(|_| Error::InvalidArgument(format!("QKP capacity must be >= 0, got {constraint}")))?;
            Ok(generate_qkp(n, w, 1.0, 0.0, seed)?.into())
        }
        ProblemFamily::Ising => Err(Error::Config("expected a constrained problem family".into())),
    }
}

fn instance_id(kind: ProblemFamily, n: usize, constraint: i64, index: usize) -> String {
    format!("{}_n{}_k{}_i{}", kind.as_str(), n, constraint, index)
}

/// Lambda for an instance: fixed, or the selected root of
/// `mu*(lambda) = target`.
fn resolve_lambda(cfg: &ExperimentConfig, profile: &PenaltyProfile) -> Result<f64> {
    match cfg.lambda {
        LambdaSpec::Fixed(v) => Ok(v),
        LambdaSpec::Calibrated => {
            let roots = calibrate_profile(profile, cfg.target_mu_star, cfg.lambda_search)?;
            select_root(&roots, cfg.lambda_root).ok_or(Error::NoRoot {
                target: cfg.target_mu_star,
                lo: cfg.lambda_search.0,
                hi: cfg.lambda_search.1,
            })
        }
    }
}

/// A generated instance with its resolved penalty boundary.
struct Prepared {
    id: String,
    seed: u64,
    constraint: i64,
    base: Instance,
    lambda: f64,
    mu_star: f64,
}

/// Generates and calibrates instances `0..instance_count` for one
/// constraint value. Instances whose calibration fails are skipped and
/// logged when `skip_failures` is set.
fn prepare_instances(
    cfg: &ExperimentConfig,
    constraint: i64,
    skip_failures: bool,
    log: &mut Vec<String>,
) -> Result<Vec<Prepared>> {
    let (kind, n) = cfg.problem()?;
    let prepared: Vec<Result<Prepared>> = (0..cfg.instance_count)
        .into_par_iter()
        .map(|idx| {
            let seed = cfg.instance_seed(idx);
            let base = constrained_instance(kind, n, constraint, seed)?;
            let profile = PenaltyProfile::from_instance(&base)?;
            let lambda = resolve_lambda(cfg, &profile)?;
            let mu_star = profile.mu_star(lambda);
            Ok(Prepared { id: instance_id(kind, n, constraint, idx), seed, constraint, base, lambda, mu_star })
        })
        .collect();
    let mut out = Vec::with_capacity(prepared.len());
    for (idx, p) in prepared.into_iter().enumerate() {
        match p {
            Ok(p) if p.mu_star > 0.0 => out.push(p),
            Ok(p) => note(log, format!("skipped {}: mu* = 0 at lambda = {}", p.id, csv_float(p.lambda))),
            Err(e @ Error::NoRoot { .. }) if skip_failures => {
                note(log, format!("skipped {}: {e} (seed {})", instance_id(kind, n, constraint, idx), cfg.instance_seed(idx)))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Scores one instance at one penalty for every requested tau mode.
fn sweep_point(p: &Prepared, lambda: f64, mu: f64, mu_star: f64, taus: &[TauMode], grid_points: usize) -> Result<Vec<SweepRecord>> {
    let inst = p.base.with_penalty(mu, lambda)?;
    let diag = build_diagonal(&inst)?;
    let summary = summarize(&diag)?;
    let delta_ef = summary.delta_e_f.ok_or(Error::EmptyFeasibleSet)?;
    let targets = [TargetSet::feasible(&diag), TargetSet::optimal(&diag)];
    taus.iter()
        .map(|&tau| {
            let traj = trajectory(&diag, tau, &targets, grid_points)?;
            Ok(SweepRecord {
                instance_id: p.id.clone(),
                seed: p.seed,
                constraint: p.constraint,
                lambda,
                mu,
                mu_star,
                delta_ef,
                tau,
                feasible: qd_of_label(&traj, "feasible")?,
                optimal: qd_of_label(&traj, "optimal")?,
            })
        })
        .collect()
}

/// Runs `sweep_point` over every instance and mu value, in parallel, and
/// returns the records in (instance, mu, tau) order.
fn mu_sweep(cfg: &ExperimentConfig, prepared: &[Prepared], taus: &[TauMode]) -> Result<Vec<SweepRecord>> {
    let work: Vec<(&Prepared, f64)> =
        prepared.iter().flat_map(|p| cfg.mu.values(p.mu_star).into_iter().map(move |mu| (p, mu))).collect();
    let chunks: Vec<Result<Vec<SweepRecord>>> = work
        .par_iter()
        .map(|&(p, mu)| sweep_point(p, p.lambda, mu, p.mu_star, taus, cfg.grid_points))
        .collect();
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Bins `(delta_ef, qd)` per (constraint, tau, target label).
fn sweep_bins(records: &[SweepRecord], width: f64) -> Result<Table> {
    let mut t = Table::new(&["constraint", "tau_or_static", "label", "bin_center", "mean_qd", "std_qd", "count"]);
    let mut groups: BTreeMap<(i64, usize), (TauMode, Vec<(f64, f64)>, Vec<(f64, f64)>)> = BTreeMap::new();
    let mut tau_order: Vec<TauMode> = Vec::new();
    for r in records {
        let ti = match tau_order.iter().position(|&t| t == r.tau) {
            Some(i) => i,
            None => {
                tau_order.push(r.tau);
                tau_order.len() - 1
            }
        };
        let g = groups.entry((r.constraint, ti)).or_insert_with(|| (r.tau, Vec::new(), Vec::new()));
        g.1.push((r.delta_ef, r.feasible.qd));
        g.2.push((r.delta_ef, r.optimal.qd));
    }
    for ((constraint, _), (tau, f, o)) in groups {
        for (label, pts) in [("feasible", f), ("optimal", o)] {
            for b in bin_aggregate(&pts, width)? {
                t.rows.push(vec![
                    constraint.to_string(),
                    tau.to_string(),
                    label.to_string(),
                    csv_float(b.center),
                    csv_float(b.mean),
                    csv_float(b.std),
                    b.count.to_string(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Q_d,f over a (lambda, mu) grid for one instance, plus the boundary curve
/// `mu*(lambda)` in the aggregates table.
pub fn run_lambda_mu_map(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (kind, n) = cfg.problem()?;
    let constraint = cfg.single_constraint()?;
    let seed = cfg.master_seed;
    let base = constrained_instance(kind, n, constraint, seed)?;
    let profile = PenaltyProfile::from_instance(&base)?;
    let lambdas = cfg.lambda_grid.ok_or_else(|| Error::Config("lambda_mu_map needs \"lambda_grid\"".into()))?.values();
    let mus = cfg.mu.values(1.0);
    let p = Prepared { id: instance_id(kind, n, constraint, 0), seed, constraint, base, lambda: 0.0, mu_star: 0.0 };

    let work: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| mus.iter().map(move |&m| (l, m))).collect();
    let chunks: Vec<Result<Vec<SweepRecord>>> = work
        .par_iter()
        .map(|&(l, m)| sweep_point(&p, l, m, profile.mu_star(l), &[TauMode::Static], cfg.grid_points))
        .collect();
    let mut records = Vec::new();
    for c in chunks {
        records.extend(c?);
    }

    let mut bins = Table::new(&["lambda", "mu_star"]);
    for &l in &lambdas {
        bins.rows.push(vec![csv_float(l), csv_float(profile.mu_star(l))]);
    }
    Ok(ExperimentOutput::new(cfg.experiment, Records::Sweep(records), bins, Vec::new()))
}

/// Full trajectories at `mu = factor * mu*` for each factor, written as
/// extra CSV files with JSON sidecars.
pub fn run_mu_slices(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut log = Vec::new();
    let constraint = cfg.single_constraint()?;
    let prepared = prepare_instances(cfg, constraint, false, &mut log)?;
    let work: Vec<(&Prepared, f64, TauMode)> = prepared
        .iter()
        .flat_map(|p| cfg.mu_factors.iter().flat_map(move |&f| cfg.taus.iter().map(move |&t| (p, f, t))))
        .collect();
    let results: Vec<Result<(SweepRecord, Trajectory)>> = work
        .par_iter()
        .map(|&(p, factor, tau)| {
            let mu = factor * p.mu_star;
            let diag = build_diagonal(&p.base.with_penalty(mu, p.lambda)?)?;
            let delta_ef = summarize(&diag)?.delta_e_f.ok_or(Error::EmptyFeasibleSet)?;
            let targets = [TargetSet::feasible(&diag), TargetSet::optimal(&diag)];
            let mut traj = trajectory(&diag, tau, &targets, cfg.grid_points)?;
            traj.meta.instance_id = Some(p.id.clone());
            traj.meta.seed = Some(p.seed);
            let rec = SweepRecord {
                instance_id: p.id.clone(),
                seed: p.seed,
                constraint: p.constraint,
                lambda: p.lambda,
                mu,
                mu_star: p.mu_star,
                delta_ef,
                tau,
                feasible: qd_of_label(&traj, "feasible")?,
                optimal: qd_of_label(&traj, "optimal")?,
            };
            Ok((rec, traj))
        })
        .collect();

    let mut records = Vec::new();
    let mut extra = Vec::new();
    let mut bins = Table::new(&["instance_id", "mu_factor", "tau_or_static", "file"]);
    for (r, &(_, factor, tau)) in results.into_iter().zip(&work) {
        let (rec, traj) = r?;
        let stem = format!("trajectories/{}_mu{}_{}", rec.instance_id, csv_float(factor), tau);
        bins.rows.push(vec![rec.instance_id.clone(), csv_float(factor), tau.to_string(), format!("{stem}.csv")]);
        extra.push((format!("{stem}.csv"), traj.to_csv()));
        extra.push((format!("{stem}.json"), traj.sidecar_json()));
        records.push(rec);
    }
    let mut out = ExperimentOutput::new(cfg.experiment, Records::Sweep(records), bins, log);
    out.extra_files = extra;
    Ok(out)
}

/// Q_d,f and Q_d,opt against `delta_ef` for every tau mode, binned.
pub fn run_delta_ef_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut log = Vec::new();
    let prepared = prepare_instances(cfg, cfg.single_constraint()?, true, &mut log)?;
    let records = mu_sweep(cfg, &prepared, &cfg.taus)?;
    let bins = sweep_bins(&records, cfg.bin_width)?;
    Ok(ExperimentOutput::new(cfg.experiment, Records::Sweep(records), bins, log))
}

/// Constraint values that admit feasible solutions; the rest are logged.
fn usable_constraints(cfg: &ExperimentConfig, log: &mut Vec<String>) -> Result<Vec<i64>> {
    let (kind, n) = cfg.problem()?;
    let mut out = Vec::new();
    for &c in &cfg.constraint_values {
        if kind == ProblemFamily::Gbp && ((c - n as i64).rem_euclid(2) != 0 || c.unsigned_abs() > n as u64) {
            note(log, format!("skipped c = {c}: no spin configuration of {n} spins has that imbalance"));
            continue;
        }
        out.push(c);
    }
    Ok(out)
}

fn constraint_sweep_records(cfg: &ExperimentConfig, log: &mut Vec<String>) -> Result<Vec<SweepRecord>> {
    if cfg.taus.iter().any(|t| *t != TauMode::Static) {
        note(log, "constraint sweeps run in the adiabatic limit only; finite taus ignored".into());
    }
    let mut records = Vec::new();
    for c in usable_constraints(cfg, log)? {
        let prepared = prepare_instances(cfg, c, true, log)?;
        records.extend(mu_sweep(cfg, &prepared, &[TauMode::Static])?);
    }
    Ok(records)
}

/// The delta_ef pipeline in the adiabatic limit, once per constraint value.
pub fn run_constraint_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut log = Vec::new();
    let records = constraint_sweep_records(cfg, &mut log)?;
    let bins = sweep_bins(&records, cfg.bin_width)?;
    Ok(ExperimentOutput::new(cfg.experiment, Records::Sweep(records), bins, log))
}

/// Initial target probability against the largest Q_d over the mu sweep.
pub fn run_p0_vs_maxqd(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut log = Vec::new();
    let sweep = constraint_sweep_records(cfg, &mut log)?;
    let mut records: Vec<P0Record> = Vec::new();
    for r in &sweep {
        match records.last_mut() {
            Some(last) if last.instance_id == r.instance_id => {
                last.max_qd_f = last.max_qd_f.max(r.feasible.qd);
                last.max_qd_opt = last.max_qd_opt.max(r.optimal.qd);
            }
            _ => records.push(P0Record {
                instance_id: r.instance_id.clone(),
                seed: r.seed,
                constraint: r.constraint,
                p_f0: r.feasible.p0,
                max_qd_f: r.feasible.qd,
                p_opt0: r.optimal.p0,
                max_qd_opt: r.optimal.qd,
            }),
        }
    }

    let mut bins = Table::new(&["label", "p0", "mean_max_qd", "std_max_qd", "count"]);
    for (label, pick) in [
        ("feasible", (|r: &P0Record| (r.p_f0, r.max_qd_f)) as fn(&P0Record) -> (f64, f64)),
        ("optimal", |r: &P0Record| (r.p_opt0, r.max_qd_opt)),
    ] {
        let mut groups: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
        for r in &records {
            let (p0, q) = pick(r);
            // P(0) is a count over 2^M, so equal values are bit-identical
            groups.entry(p0.to_bits()).or_insert_with(|| (p0, Vec::new())).1.push(q);
        }
        for (p0, qs) in groups.into_values() {
            let (mean, std) = mean_std(&qs);
            bins.rows.push(vec![label.into(), csv_float(p0), csv_float(mean), csv_float(std), qs.len().to_string()]);
        }
    }
    Ok(ExperimentOutput::new(cfg.experiment, Records::P0(records), bins, log))
}

/// Q_d,e1 and its timing against the classical gap for random Ising
/// instances.
pub fn run_delta_ehc_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n = cfg.n.ok_or_else(|| Error::Config("delta_ehc_scan needs \"n\"".into()))?;
    let mut log = Vec::new();
    let work: Vec<(IsingKind, usize)> =
        cfg.ising_kinds.iter().flat_map(|&k| (0..cfg.instance_count).map(move |i| (k, i))).collect();
    let results: Vec<Result<Option<Vec<EhcRecord>>>> = work
        .par_iter()
        .map(|&(kind, idx)| {
            let seed = cfg.instance_seed(idx);
            let diag = build_diagonal(&generate_ising(n, kind, seed)?.into())?;
            let summary = summarize(&diag)?;
            if summary.has_degenerate_low_levels() {
                return Ok(None);
            }
            let delta_ehc = summary.delta_e_hc.ok_or_else(|| Error::DegenerateSpectrum("single level".into()))?;
            let targets = [TargetSet::first_excited(&summary)];
            let id = format!("ising_{}_n{}_i{}", kind.as_str(), n, idx);
            cfg.taus
                .iter()
                .map(|&tau| {
                    let traj = trajectory(&diag, tau, &targets, cfg.grid_points)?;
                    Ok(EhcRecord {
                        instance_id: id.clone(),
                        seed,
                        ising_kind: kind,
                        delta_ehc,
                        tau,
                        report: qd_of_label(&traj, "first_excited")?,
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect();
    let mut records = Vec::new();
    for (r, &(kind, idx)) in results.into_iter().zip(&work) {
        match r? {
            Some(v) => records.extend(v),
            None => note(
                &mut log,
                format!("skipped ising {} instance {idx} (seed {}): degenerate ground or first excited level", kind.as_str(), cfg.instance_seed(idx)),
            ),
        }
    }

    let mut bins = Table::new(&["ising_kind", "tau_or_static", "count", "spearman_qd_delta_ehc", "spearman_smax_delta_ehc"]);
    for &kind in &cfg.ising_kinds {
        for &tau in &cfg.taus {
            let sel: Vec<&EhcRecord> = records.iter().filter(|r| r.ising_kind == kind && r.tau == tau).collect();
            let gap: Vec<f64> = sel.iter().map(|r| r.delta_ehc).collect();
            let qd: Vec<f64> = sel.iter().map(|r| r.report.qd).collect();
            let smax: Vec<f64> = sel.iter().map(|r| r.report.s_max).collect();
            let mut corr = |ys: &[f64], what: &str| match spearman(ys, &gap) {
                Ok(v) => csv_float(v),
                Err(e) => {
                    note(&mut log, format!("{} {tau}: no {what} correlation: {e}", kind.as_str()));
                    String::new()
                }
            };
            let (cq, cs) = (corr(&qd, "Q_d"), corr(&smax, "s_max"));
            bins.rows.push(vec![kind.as_str().into(), tau.to_string(), sel.len().to_string(), cq, cs]);
        }
    }
    Ok(ExperimentOutput::new(cfg.experiment, Records::Ehc(records), bins, log))
}

/// Q_d,e1 for every placement of the two lowest levels on basis states,
/// grouped by their Hamming distance.
pub fn run_hd_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n = cfg.n.ok_or_else(|| Error::Config("hd_scan needs \"n\"".into()))?;
    let seed = cfg.master_seed;
    let mut records = Vec::new();
    for &kind in &cfg.ising_kinds {
        let diag = build_diagonal(&generate_ising(n, kind, seed)?.into())?;
        let dim = diag.dim();
        let pairs: Vec<(usize, usize)> =
            (0..dim).flat_map(|g| (0..dim).filter(move |&e| e != g).map(move |e| (g, e))).collect();
        let chunk: Vec<Result<HdRecord>> = pairs
            .par_iter()
            .map(|&(g, e)| {
                let permuted = permute_spectrum_with(&diag, g, e, cfg.hd_tail)?;
                let traj = adiabatic_trajectory(&permuted, &[TargetSet::new("first_excited", vec![e])], cfg.grid_points)?;
                let hd = hamming_distance(&SpinConfiguration::from_index(g, n), &SpinConfiguration::from_index(e, n))?;
                Ok(HdRecord { ising_kind: kind, seed, gs_state: g, e1_state: e, hd, report: qd_of_label(&traj, "first_excited")? })
            })
            .collect();
        for r in chunk {
            records.push(r?);
        }
    }

    let mut bins = Table::new(&["ising_kind", "hd", "mean_qd", "std_qd", "count"]);
    for &kind in &cfg.ising_kinds {
        for hd in 1..=n {
            let qs: Vec<f64> = records.iter().filter(|r| r.ising_kind == kind && r.hd == hd).map(|r| r.report.qd).collect();
            if qs.is_empty() {
                continue;
            }
            let (mean, std) = mean_std(&qs);
            bins.rows.push(vec![kind.as_str().into(), hd.to_string(), csv_float(mean), csv_float(std), qs.len().to_string()]);
        }
    }
    Ok(ExperimentOutput::new(cfg.experiment, Records::Hd(records), bins, Vec::new()))
}

/// Q_d,e1 of the uniform model in the symmetric sector for each size.
pub fn run_size_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut log = Vec::new();
    let work: Vec<(usize, f64, TauMode)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| cfg.couplings.iter().flat_map(move |&j| cfg.taus.iter().map(move |&t| (n, j, t))))
        .collect();
    let results: Vec<Result<Option<SizeRecord>>> = work
        .par_iter()
        .map(|&(n, j, tau)| {
            let model = build_collective(n, j, cfg.field)?;
            let (gs, e1) = (model.ground_levels(), model.first_excited_levels());
            if gs.len() != 1 || e1.len() != 1 {
                return Ok(None);
            }
            let traj = collective_trajectories(&model, tau, &[TargetSet::new("first_excited", e1.clone())], cfg.grid_points)?;
            Ok(Some(SizeRecord {
                n,
                coupling: j,
                field: cfg.field,
                gs_level: gs[0],
                e1_level: e1[0],
                hd: gs[0].abs_diff(e1[0]),
                tau,
                report: qd_of_label(&traj, "first_excited")?,
            }))
        })
        .collect();
    let mut records = Vec::new();
    for (r, &(n, j, _)) in results.into_iter().zip(&work) {
        match r? {
            Some(rec) => records.push(rec),
            None => note(&mut log, format!("skipped n = {n}, J = {}: degenerate low collective levels", csv_float(j))),
        }
    }

    let mut bins = Table::new(&["coupling", "tau_or_static", "n_last", "qd_last", "n_prev", "qd_prev", "abs_change"]);
    for &j in &cfg.couplings {
        for &tau in &cfg.taus {
            let sel: Vec<&SizeRecord> = records.iter().filter(|r| r.coupling == j && r.tau == tau).collect();
            if let [.., prev, last] = sel.as_slice() {
                bins.rows.push(vec![
                    csv_float(j),
                    tau.to_string(),
                    last.n.to_string(),
                    csv_float(last.report.qd),
                    prev.n.to_string(),
                    csv_float(prev.report.qd),
                    csv_float((last.report.qd - prev.report.qd).abs()),
                ]);
            }
        }
    }
    Ok(ExperimentOutput::new(cfg.experiment, Records::Size(records), bins, log))
}

/// Validates `cfg` and dispatches to its runner on a pool of
/// `cfg.threads` workers (all cores when unset).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cfg.experiment {
        ExperimentId::LambdaMuMap => run_lambda_mu_map(cfg),
        ExperimentId::MuSlices => run_mu_slices(cfg),
        ExperimentId::DeltaEfSweep => run_delta_ef_sweep(cfg),
        ExperimentId::ConstraintSweep => run_constraint_sweep(cfg),
        ExperimentId::P0VsMaxqd => run_p0_vs_maxqd(cfg),
        ExperimentId::DeltaEhcScan => run_delta_ehc_scan(cfg),
        ExperimentId::HdScan => run_hd_scan(cfg),
        ExperimentId::SizeScan => run_size_scan(cfg),
    })
}
