use midanneal::dynamics::TauMode;
use midanneal::harness::oracles::mu_star_bisection;
use midanneal::harness::*;
use midanneal::model::*;

fn sweep(records: &Records) -> &[SweepRecord] {
    match records {
        Records::Sweep(v) => v,
        _ => panic!("expected sweep records"),
    }
}

fn small(id: ExperimentId) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(id);
    cfg.grid_points = 201;
    cfg.threads = Some(2);
    cfg
}

#[test]
fn lambda_mu_map_boundary() {
    let mut cfg = small(ExperimentId::LambdaMuMap);
    cfg.kind = Some(ProblemFamily::Qkp);
    cfg.n = Some(3);
    cfg.constraint = Some(1);
    cfg.lambda_grid = Some(Range { from: 0.0, to: 1.0, points: 5 });
    cfg.mu = MuGrid::Absolute(Range { from: 0.1, to: 2.0, points: 12 });
    let out = run_experiment(&cfg).unwrap();
    let recs = sweep(&out.records);
    assert_eq!(recs.len(), 60);

    let base: Instance = generate_qkp(3, 1, 1.0, 0.0, cfg.master_seed).unwrap().into();
    for row in &out.bins.rows {
        let lambda: f64 = row[0].parse().unwrap();
        let boundary: f64 = row[1].parse().unwrap();
        assert!((boundary - mu_star_bisection(&base, lambda).unwrap()).abs() < 1e-9);
    }
    for r in recs {
        if r.mu > r.mu_star * (1.0 + 1e-9) {
            assert_eq!(r.feasible.qd, 0.0);
            assert_eq!(r.feasible.p_end, 1.0);
        }
    }
}

#[test]
fn mu_slices_endpoints_and_files() {
    let mut cfg = small(ExperimentId::MuSlices);
    cfg.kind = Some(ProblemFamily::Gbp);
    cfg.n = Some(4);
    cfg.constraint = Some(0);
    cfg.instance_count = 2;
    cfg.taus = vec![TauMode::Static, TauMode::Finite(20.0)];
    let out = run_experiment(&cfg).unwrap();
    let recs = sweep(&out.records);
    assert_eq!(recs.len(), 2 * 3 * 2);
    for r in recs.iter().filter(|r| r.tau == TauMode::Static) {
        let factor = r.mu / r.mu_star;
        if factor > 1.05 {
            assert!((r.feasible.p_end - 1.0).abs() < 1e-12);
        } else if factor < 0.95 {
            assert!(r.feasible.p_end.abs() < 1e-12);
        }
    }
    assert_eq!(out.extra_files.len(), 2 * recs.len());
    assert!(out.extra_files.iter().all(|(p, _)| p.starts_with("trajectories/")));
}

#[test]
fn constraint_sweep_initial_probabilities() {
    let mut cfg = small(ExperimentId::ConstraintSweep);
    cfg.kind = Some(ProblemFamily::Gbp);
    cfg.n = Some(6);
    cfg.constraint_values = vec![0, 1, 2, 4, 8];
    cfg.instance_count = 2;
    cfg.mu = MuGrid::List(vec![0.9, 1.1]);
    let out = run_experiment(&cfg).unwrap();
    let recs = sweep(&out.records);
    for (c, want) in [(0, 20.0 / 64.0), (2, 15.0 / 64.0), (4, 6.0 / 64.0)] {
        let sel: Vec<_> = recs.iter().filter(|r| r.constraint == c).collect();
        assert!(!sel.is_empty());
        assert!(sel.iter().all(|r| (r.feasible.p0 - want).abs() < 1e-12));
    }
    assert!(recs.iter().all(|r| r.constraint != 1 && r.constraint != 8));
    assert!(out.log.iter().any(|l| l.contains("c = 1")));
    assert!(out.log.iter().any(|l| l.contains("c = 8")));
}

#[test]
fn p0_summary_matches_sweep_maxima() {
    let mut cfg = small(ExperimentId::ConstraintSweep);
    cfg.kind = Some(ProblemFamily::Qkp);
    cfg.n = Some(3);
    cfg.constraint_values = vec![1, 2];
    cfg.instance_count = 3;
    cfg.mu = MuGrid::Relative(Range { from: 0.5, to: 1.5, points: 5 });
    let sweep_out = run_experiment(&cfg).unwrap();
    cfg.experiment = ExperimentId::P0VsMaxqd;
    let p0_out = run_experiment(&cfg).unwrap();
    let Records::P0(p0) = &p0_out.records else { panic!() };
    assert_eq!(p0.len(), 6);
    for r in p0 {
        let sel: Vec<_> = sweep(&sweep_out.records).iter().filter(|s| s.instance_id == r.instance_id).collect();
        let max_f = sel.iter().map(|s| s.feasible.qd).fold(0.0, f64::max);
        let max_o = sel.iter().map(|s| s.optimal.qd).fold(0.0, f64::max);
        assert_eq!(r.max_qd_f, max_f);
        assert_eq!(r.max_qd_opt, max_o);
        assert_eq!(r.p_f0, sel[0].feasible.p0);
    }
}

#[test]
fn hd_scan_pair_counts() {
    let mut cfg = small(ExperimentId::HdScan);
    cfg.n = Some(3);
    cfg.grid_points = 101;
    let out = run_experiment(&cfg).unwrap();
    let Records::Hd(recs) = &out.records else { panic!() };
    assert_eq!(recs.len(), 2 * 8 * 7);
    for kind in [IsingKind::Fm, IsingKind::Af] {
        for (d, choose) in [(1, 3), (2, 3), (3, 1)] {
            let count = recs.iter().filter(|r| r.ising_kind == kind && r.hd == d).count();
            assert_eq!(count, 8 * choose);
        }
    }
    assert!(recs.iter().all(|r| r.report.p_end == 0.0));
}

#[test]
fn size_scan_adjacent_levels() {
    let mut cfg = small(ExperimentId::SizeScan);
    cfg.sizes = vec![4, 8, 16, 32];
    let out = run_experiment(&cfg).unwrap();
    let Records::Size(recs) = &out.records else { panic!() };
    assert_eq!(recs.len(), 8);
    assert!(recs.iter().all(|r| r.hd == 1));
    assert_eq!(out.bins.rows.len(), 2);
}

#[test]
fn delta_ehc_scan_reports_correlations() {
    let mut cfg = small(ExperimentId::DeltaEhcScan);
    cfg.n = Some(3);
    cfg.instance_count = 12;
    let out = run_experiment(&cfg).unwrap();
    let Records::Ehc(recs) = &out.records else { panic!() };
    assert!(recs.len() >= 12);
    assert!(recs.iter().all(|r| r.delta_ehc > 0.0));
    assert_eq!(out.bins.rows.len(), 2);
}

#[test]
fn output_directory_layout() {
    let mut cfg = small(ExperimentId::SizeScan);
    cfg.sizes = vec![4, 8];
    let out = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_output(&cfg, &out, dir.path()).unwrap();
    for f in ["records.csv", "bins.csv", "meta.json", "log.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["experiment"], "size_scan");
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + out.records.len());
}

#[test]
fn thread_count_does_not_change_records() {
    let mut cfg = small(ExperimentId::DeltaEfSweep);
    cfg.kind = Some(ProblemFamily::Gbp);
    cfg.n = Some(4);
    cfg.constraint = Some(0);
    cfg.instance_count = 3;
    cfg.mu = MuGrid::Relative(Range { from: 0.5, to: 1.5, points: 7 });
    cfg.threads = Some(1);
    let a = run_experiment(&cfg).unwrap().records.to_table().to_csv();
    cfg.threads = Some(4);
    let b = run_experiment(&cfg).unwrap().records.to_table().to_csv();
    assert_eq!(a, b);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = small(ExperimentId::DeltaEfSweep);
    assert!(matches!(run_experiment(&cfg), Err(midanneal::Error::Config(_))));
    cfg.kind = Some(ProblemFamily::Gbp);
    cfg.n = Some(4);
    cfg.constraint = Some(0);
    cfg.grid_points = 1;
    assert!(run_experiment(&cfg).is_err());
}
