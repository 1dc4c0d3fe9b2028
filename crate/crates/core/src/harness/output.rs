//! Writes an experiment's files: `records.csv`, `bins.csv`, `meta.json`,
//! `log.txt` and any extra trajectory files. Nothing time- or host-dependent
//! goes into them, so identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::experiments::ExperimentOutput;
use crate::dynamics::DENSE_EIGEN_MAX_QUBITS;
use crate::error::{Error, Result};
use crate::numfmt::to_json_with_digits;
use crate::rng::PRNG_ID;

/// Directory used when neither the command line nor the config names one.
pub fn default_output_dir(cfg: &ExperimentConfig) -> PathBuf {
    match &cfg.output_dir {
        Some(dir) => PathBuf::from(dir),
        None => Path::new("results").join(cfg.experiment.as_str()),
    }
}

/// The `meta.json` document.
pub fn meta_document(cfg: &ExperimentConfig, out: &ExperimentOutput) -> Value {
    let mut config = serde_json::to_value(cfg).expect("config serializes");
    if let Value::Object(map) = &mut config {
        // scheduling and placement do not affect results
        map.remove("threads");
        map.remove("output_dir");
    }
    let mut doc = json!({
        "experiment": cfg.experiment.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "prng_id": PRNG_ID,
        "seed_rule": "instance seed = master_seed + instance index",
        "grid": { "points": cfg.grid_points, "spacing": "uniform in s, endpoints included" },
        "adiabatic_limit": {
            "eigensolver": "dense Householder tridiagonalization, Sturm bisection, inverse iteration",
            "max_qubits": DENSE_EIGEN_MAX_QUBITS,
            "degenerate_classical_ground_level": "lowest basis index",
        },
        "finite_time": {
            "integrator": "split operator, Suzuki fourth-order composition of Strang steps",
            "step": "min(0.01, tau / 10000)",
            "norm_tolerance": crate::dynamics::NORM_TOL,
        },
        "qd": { "argmax_ties": "earliest grid point", "std": "population" },
        "record_count": out.records.len(),
        "log_lines": out.log.len(),
    });
    if let Value::Object(map) = &mut doc {
        for (k, v) in &out.meta {
            map.insert(k.clone(), v.clone());
        }
    }
    doc
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_output(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> Result<()> {
    write(&dir.join("records.csv"), &out.records.to_table().to_csv())?;
    write(&dir.join("bins.csv"), &out.bins.to_csv())?;
    let meta = to_json_with_digits(&meta_document(cfg, out), 12)?;
    write(&dir.join("meta.json"), &meta)?;
    let mut log = out.log.join("\n");
    if !log.is_empty() {
        log.push('\n');
    }
    write(&dir.join("log.txt"), &log)?;
    for (rel, contents) in &out.extra_files {
        write(&dir.join(rel), contents)?;
    }
    Ok(())
}
