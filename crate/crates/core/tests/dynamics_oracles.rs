use midanneal::collective::{build_collective, collective_trajectories, expand_to_full};
use midanneal::dynamics::*;
use midanneal::harness::oracles::{level_states, piecewise_exponential};
use midanneal::model::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn ising(n: usize, kind: IsingKind, seed: u64) -> DiagonalProblem {
    build_diagonal(&generate_ising(n, kind, seed).unwrap().into()).unwrap()
}

fn max_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.series
        .iter()
        .zip(&b.series)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matrix_free_matches_dense(m in 2usize..=8, seed in 0u64..1000, s in 0.0f64..=1.0,
                                 raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256)) {
        let diag = ising(m, IsingKind::Af, seed);
        let dim = diag.dim();
        let amps: Vec<Complex64> = raw[..dim].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amps: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
        let psi = QuantumState::new(BasisKind::Full { m }, amps.clone()).unwrap();
        let image = apply_hamiltonian(&diag, s, &psi).unwrap();
        let h = dense_hamiltonian(&diag, s);
        for i in 0..dim {
            let want: Complex64 = (0..dim).map(|j| amps[j] * h[i * dim + j]).sum();
            prop_assert!((image.amplitudes()[i] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn dense_hamiltonian_is_hermitian() {
    let diag = build_diagonal(&generate_qkp(4, 3, 1.3, 0.4, 5).unwrap().into()).unwrap();
    let n = diag.dim();
    for k in 0..=10 {
        let h = dense_hamiltonian(&diag, k as f64 / 10.0);
        for i in 0..n {
            for j in 0..n {
                assert!((h[i * n + j] - h[j * n + i]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn splitting_matches_piecewise_exponential() {
    for seed in 10..13 {
        let diag = ising(2, IsingKind::Fm, seed);
        let schedule = AnnealSchedule::new(5.0).unwrap();
        let (_, psi) = evolve_system(&FullSpace::new(&diag), &schedule, &[], 11, &EvolveOptions::default()).unwrap();
        let reference = piecewise_exponential(&diag, 5.0, 5000).unwrap();
        let err = psi.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "seed {seed}: {err:e}");
    }
}

#[test]
fn both_splittings_agree() {
    let diag = ising(3, IsingKind::Af, 4);
    let schedule = AnnealSchedule::new(20.0).unwrap();
    let t = [TargetSet::new("gs", vec![0, 1])];
    let sys = FullSpace::new(&diag);
    let (a, _) = evolve_system(&sys, &schedule, &t, 101, &EvolveOptions { splitting: Splitting::Suzuki4, step: None }).unwrap();
    let (b, _) = evolve_system(&sys, &schedule, &t, 101, &EvolveOptions { splitting: Splitting::Yoshida4, step: None }).unwrap();
    assert!(max_diff(&a, &b) < 1e-7);
}

#[test]
fn zero_problem_hamiltonian_keeps_probabilities_constant() {
    let m = 3;
    let diag = DiagonalProblem::from_parts(ProblemKind::Unconstrained, m, vec![0.0; 8], vec![0.0; 8], vec![0; 8]).unwrap();
    let targets = [TargetSet::new("one", vec![5]), TargetSet::new("three", vec![0, 2, 7])];
    for tau in [1.0, 37.0] {
        let traj = evolve(&diag, &AnnealSchedule::new(tau).unwrap(), &targets, 51).unwrap();
        for (series, want) in traj.series.iter().zip([0.125, 0.375]) {
            assert!(series.values.iter().all(|p| (p - want).abs() < 1e-12));
        }
    }
}

#[test]
fn step_halving_and_norm_contract() {
    let inst: Instance = generate_qkp(5, 1, 1.0, 0.7, 2).unwrap().into();
    let diag = build_diagonal(&inst).unwrap();
    let targets = [TargetSet::feasible(&diag), TargetSet::optimal(&diag)];
    let sys = FullSpace::new(&diag);
    for tau in [10.0, 100.0] {
        let schedule = AnnealSchedule::new(tau).unwrap();
        let h = default_step(tau);
        let (a, _) = evolve_system(&sys, &schedule, &targets, 1001, &EvolveOptions { step: Some(h), ..Default::default() }).unwrap();
        let (b, _) =
            evolve_system(&sys, &schedule, &targets, 1001, &EvolveOptions { step: Some(h / 2.0), ..Default::default() }).unwrap();
        assert!(max_diff(&a, &b) < 1e-6);
        assert!(a.meta.max_norm_drift < 1e-6 && b.meta.max_norm_drift < 1e-6);
        assert_eq!(a.meta.step, Some(h));
    }
}

#[test]
fn long_anneal_approaches_adiabatic_limit() {
    for (kind, seed) in [(IsingKind::Fm, 3), (IsingKind::Af, 8)] {
        let diag = ising(3, kind, seed);
        let summary = midanneal::spectrum::summarize(&diag).unwrap();
        let targets = [TargetSet::new("gs", summary.gs_states.clone()), TargetSet::first_excited(&summary)];
        let fixed = adiabatic_trajectory(&diag, &targets, 201).unwrap();
        let slow = evolve(&diag, &AnnealSchedule::new(2000.0).unwrap(), &targets, 201).unwrap();
        assert!(max_diff(&fixed, &slow) < 0.02, "{kind:?}: {}", max_diff(&fixed, &slow));
    }
}

#[test]
fn static_endpoints() {
    let diag = ising(4, IsingKind::Af, 1);
    let summary = midanneal::spectrum::summarize(&diag).unwrap();
    let targets = [TargetSet::new("gs", summary.gs_states.clone()), TargetSet::new("pair", vec![3, 9])];
    let traj = adiabatic_trajectory(&diag, &targets, 11).unwrap();
    assert!((traj.series[0].values[0] - summary.gs_states.len() as f64 / 16.0).abs() < 1e-12);
    assert!((traj.series[1].values[0] - 2.0 / 16.0).abs() < 1e-12);
    assert_eq!(*traj.series[0].values.last().unwrap(), 1.0);
}

#[test]
fn collective_matches_full_space() {
    for n in [2usize, 4, 8] {
        for j in [1.0, -1.0] {
            let model = build_collective(n, j, 2.5).unwrap();
            let diag = build_diagonal(&IsingInstance::uniform(n, j, 2.5).unwrap().into()).unwrap();
            let lt: Vec<TargetSet> = (0..=n).map(|k| TargetSet::new(format!("k{k}"), vec![k])).collect();
            let ft: Vec<TargetSet> = (0..=n).map(|k| TargetSet::new(format!("k{k}"), level_states(n, k))).collect();
            let a = collective_trajectories(&model, TauMode::Static, &lt, 101).unwrap();
            let b = adiabatic_trajectory(&diag, &ft, 101).unwrap();
            assert!(max_diff(&a, &b) < 1e-8, "static n={n} J={j}");
            let a = collective_trajectories(&model, TauMode::Finite(100.0), &lt, 101).unwrap();
            let b = evolve(&diag, &AnnealSchedule::new(100.0).unwrap(), &ft, 101).unwrap();
            assert!(max_diff(&a, &b) < 1e-8, "tau=100 n={n} J={j}");
        }
    }
}

#[test]
fn collective_final_state_expands_to_full_final_state() {
    let (n, j, tau) = (4, -1.0, 30.0);
    let model = build_collective(n, j, 2.5).unwrap();
    let diag = build_diagonal(&IsingInstance::uniform(n, j, 2.5).unwrap().into()).unwrap();
    let schedule = AnnealSchedule::new(tau).unwrap();
    let (_, reduced) = evolve_system(&model, &schedule, &[], 11, &EvolveOptions::default()).unwrap();
    let (_, full) = evolve_system(&FullSpace::new(&diag), &schedule, &[], 11, &EvolveOptions::default()).unwrap();
    let reduced = QuantumState::new(BasisKind::Collective { n }, reduced).unwrap();
    let expanded = expand_to_full(&reduced).unwrap();
    for (a, b) in expanded.amplitudes().iter().zip(&full) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn large_collective_static_run() {
    let model = build_collective(1024, -1.0, 2.5).unwrap();
    let e1 = model.first_excited_levels();
    let traj = collective_trajectories(&model, TauMode::Static, &[TargetSet::new("e1", e1)], 1001).unwrap();
    let v = &traj.series[0].values;
    assert_eq!(v.len(), 1001);
    assert_eq!(*v.last().unwrap(), 0.0);
    assert!(v.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
}
