use num_complex::Complex64;

use qprobe::fixtures::{
    random_pauli_hamiltonian, random_spin_model, two_level_model, water_analog_model,
};
use qprobe::linalg::{CMatrix, ONE};
use qprobe::oracle::{
    detect_degeneracy, eigendecompose, lift_degeneracies, transition_table, validate_spectrum,
};
use qprobe::spectroscopy::{
    detect_peaks, predict_spectrum, prepare_eigenstate_chain, run_sweep, ChainStep, Method,
    PrepareOptions, SweepMode, SweepPlan, ThresholdPolicy,
};
use qprobe::{
    assemble_total, embed_dense, exact_propagate, trotter_propagate, CouplingOperator,
    CouplingPreset, Error, PauliSum, ProbeConfig, ProbeState, Statevector, SystemHamiltonian,
    TrotterOrder, TrotterPlan,
};

/// `exp(-iHt)` by a Taylor series with scaling and squaring.
fn taylor_expm(h: &CMatrix, t: f64) -> CMatrix {
    let norm: f64 = h.iter().map(|z| z.norm()).sum::<f64>() * t;
    let mut s = 0;
    while norm / f64::from(1u32 << s) > 0.1 {
        s += 1;
    }
    let a = h * Complex64::new(0.0, -t / f64::from(1u32 << s));
    let mut sum = CMatrix::identity(h.nrows(), h.ncols());
    let mut term = sum.clone();
    for k in 1..=20 {
        term = &term * &a / Complex64::from(k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn random_total(seed: u64, omega: f64, c: f64) -> qprobe::TotalHamiltonian {
    let hs = SystemHamiltonian::from_pauli(random_pauli_hamiltonian(3, 10, seed).unwrap()).unwrap();
    let a = CouplingOperator::new(random_pauli_hamiltonian(3, 3, seed + 1).unwrap(), "a").unwrap();
    let probe = ProbeConfig {
        omega,
        c,
        tau: 1.0,
        init: ProbeState::Excited,
    };
    assemble_total(hs, probe, a).unwrap()
}

fn as_dense_system(sys: &SystemHamiltonian) -> SystemHamiltonian {
    embed_dense(sys.to_dense().unwrap(), sys.width(), 0.0).unwrap()
}

#[test]
fn exact_propagation_matches_taylor_series() {
    for seed in 0..5 {
        let h = random_total(10 * seed, 0.8, 0.3);
        let psi = Statevector::basis(4, 3).unwrap();
        let tau = 7.5;
        let out = exact_propagate(&h, tau, &psi).unwrap();
        let reference = taylor_expm(&h.to_dense().unwrap(), tau) * psi.to_cvector();
        let err = (out.to_cvector() - reference).norm();
        assert!(err < 1e-10, "seed {seed}: {err:.3e}");
    }
}

fn convergence_order(h: &qprobe::TotalHamiltonian, order: TrotterOrder) -> f64 {
    let psi = Statevector::basis(h.width(), 1).unwrap();
    let tau = 2.0;
    let exact = exact_propagate(h, tau, &psi).unwrap();
    let errs: Vec<f64> = [32usize, 64, 128, 256]
        .iter()
        .map(|&r| {
            let plan = TrotterPlan::new(order, r).unwrap();
            trotter_propagate(h, tau, plan, &psi)
                .unwrap()
                .distance(&exact)
                .unwrap()
        })
        .collect();
    -(errs[3] / errs[0]).ln() / 8f64.ln()
}

#[test]
fn first_order_trotter_converges_linearly() {
    let order = convergence_order(&random_total(3, 1.0, 0.2), TrotterOrder::First);
    assert!((order - 1.0).abs() < 0.2, "order {order}");
}

#[test]
fn dense_split_trotter_converges_quadratically() {
    let h = random_total(5, 1.0, 0.2);
    let dense = assemble_total(as_dense_system(&h.system), h.probe, h.coupling.clone()).unwrap();
    assert!(dense.to_pauli().is_none());
    let order = convergence_order(&dense, TrotterOrder::Second);
    assert!((order - 2.0).abs() < 0.2, "order {order}");
}

#[test]
fn dense_and_pauli_forms_sweep_identically() {
    let model = random_spin_model(3, 11, 0.005, 300.0).unwrap();
    let mut dense = model.clone();
    dense.system = as_dense_system(&model.system);
    let plan = SweepPlan::new(0.4, 2.0, 40);
    let a = run_sweep(&model, &plan).unwrap();
    let b = run_sweep(&dense, &plan).unwrap();
    for (x, y) in a.points.iter().zip(&b.points) {
        assert!((x.probability - y.probability).abs() < 1e-10);
    }
    let trotter = plan.clone().with_method(Method::Trotter {
        order: TrotterOrder::Second,
        steps: None,
    });
    let c = run_sweep(&model, &trotter).unwrap();
    let d = run_sweep(&dense, &trotter).unwrap();
    for ((x, y), z) in a.points.iter().zip(&c.points).zip(&d.points) {
        assert!((x.probability - y.probability).abs() < 1e-3);
        assert!((x.probability - z.probability).abs() < 1e-3);
    }
}

#[test]
fn two_level_peak_sits_on_the_gap() {
    let model = two_level_model(0.005, 300.0).unwrap();
    let plan = SweepPlan::new(0.5, 1.5, 101);
    let s = run_sweep(&model, &plan).unwrap();
    let peaks = detect_peaks(&s, &ThresholdPolicy::default());
    assert_eq!(peaks.len(), 1);
    assert!((peaks[0].center - 1.0).abs() <= 0.5 * s.delta_omega() + 1e-12);

    let eig = eigendecompose(&model.system).unwrap();
    let table = transition_table(
        &eig,
        model.coupling.op(),
        &model.initial,
        (0.5, 1.5),
        SweepMode::Absorption,
    )
    .unwrap();
    let predicted = predict_spectrum(&table.records, model.c, model.tau, &plan).unwrap();
    let pp = detect_peaks(&predicted, &ThresholdPolicy::default());
    assert_eq!(pp.len(), 1);
    assert!((pp[0].center - peaks[0].center).abs() <= s.delta_omega());
}

#[test]
fn emission_reads_an_excited_system() {
    let mut model = two_level_model(0.005, 300.0).unwrap();
    model.initial = Statevector::basis(1, 1).unwrap();
    let plan = SweepPlan::new(0.5, 1.5, 101).with_mode(SweepMode::Emission);
    let s = run_sweep(&model, &plan).unwrap();
    let peaks = detect_peaks(&s, &ThresholdPolicy::default());
    assert_eq!(peaks.len(), 1);
    assert!((peaks[0].center - 1.0).abs() < 0.01);
    // the same state is dark in absorption
    let dark = run_sweep(&model, &plan.with_mode(SweepMode::Absorption)).unwrap();
    assert!(dark.max_probability() < 1e-3);
}

#[test]
fn zero_coupling_is_flat() {
    let model = two_level_model(0.0, 300.0).unwrap();
    let s = run_sweep(&model, &SweepPlan::new(0.5, 1.5, 50)).unwrap();
    assert!(s.points.iter().all(|p| p.probability == 0.0));
    assert!(detect_peaks(&s, &ThresholdPolicy::default()).is_empty());
}

#[test]
fn single_point_sweep() {
    let model = two_level_model(0.005, 300.0).unwrap();
    let s = run_sweep(&model, &SweepPlan::new(0.5, 1.5, 1)).unwrap();
    assert_eq!(s.points.len(), 1);
    assert_eq!(s.points[0].omega, 1.0);
}

#[test]
fn coarse_grid_warns() {
    let model = two_level_model(0.005, 500.0).unwrap();
    let s = run_sweep(&model, &SweepPlan::new(0.4, 2.0, 200)).unwrap();
    assert_eq!(s.warnings.len(), 1);
    let s = run_sweep(&model, &SweepPlan::new(0.9, 1.1, 200)).unwrap();
    assert!(s.warnings.is_empty());
}

#[test]
fn shot_sweeps_are_reproducible_and_order_independent() {
    let model = two_level_model(0.005, 300.0).unwrap();
    let plan = SweepPlan::new(0.9, 1.1, 30).with_shots(500, 42);
    let a = run_sweep(&model, &plan).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let b = single.install(|| run_sweep(&model, &plan).unwrap());
    assert_eq!(a, b);
    let c = run_sweep(&model, &plan.clone().with_shots(500, 43)).unwrap();
    assert_ne!(a, c);
    for p in &a.points {
        let counts = p.counts.unwrap();
        assert_eq!(counts.shots, 500);
        assert_eq!(p.probability, counts.flips as f64 / 500.0);
    }
}

#[test]
fn zero_trotter_steps_are_rejected() {
    let model = two_level_model(0.005, 300.0).unwrap();
    let plan = SweepPlan::new(0.5, 1.5, 5).with_method(Method::Trotter {
        order: TrotterOrder::First,
        steps: Some(0),
    });
    assert!(matches!(run_sweep(&model, &plan), Err(Error::Parameter(_))));
}

#[test]
fn pair_flips_reveal_more_transitions_than_single_flips() {
    let plan = SweepPlan::new(0.4, 2.0, 200);
    let count = |preset| {
        let m = water_analog_model(preset, 0.005, 500.0, "00010").unwrap();
        detect_peaks(&run_sweep(&m, &plan).unwrap(), &ThresholdPolicy::default()).len()
    };
    let single = count(CouplingPreset::SingleFlips);
    let pair = count(CouplingPreset::PairFlips);
    assert!(pair > single, "{pair} vs {single}");
}

#[test]
fn vanishing_matrix_element_is_a_selection_rule() {
    // A = Z never connects the two levels
    let mut model = two_level_model(0.005, 300.0).unwrap();
    model.coupling = CouplingOperator::new(PauliSum::parse_lines("1 Z").unwrap(), "Z").unwrap();
    let s = run_sweep(&model, &SweepPlan::new(0.5, 1.5, 51)).unwrap();
    let eig = eigendecompose(&model.system).unwrap();
    let table = transition_table(
        &eig,
        model.coupling.op(),
        &model.initial,
        (0.5, 1.5),
        SweepMode::Absorption,
    )
    .unwrap();
    let report = validate_spectrum(&s, &table, &ThresholdPolicy::default());
    assert!(report.passed());
    // only small off-resonant probe flips of order (c/omega)^2 remain
    assert!(s.max_probability() < 1e-3);
    assert_eq!(report.selection_rule.len(), 1);
}

#[test]
fn degeneracies_are_lifted_within_epsilon() {
    let h = SystemHamiltonian::from_pauli(PauliSum::parse_lines("1 ZI\n1 IZ").unwrap()).unwrap();
    let eig = eigendecompose(&h).unwrap();
    let groups = detect_degeneracy(&eig, 1e-8).unwrap();
    assert!(groups.iter().any(|g| g.len() == 2));
    let lifted = lift_degeneracies(&h, 1e-3, 9).unwrap();
    let e = eigendecompose(&lifted).unwrap();
    assert!(detect_degeneracy(&e, 1e-8)
        .unwrap()
        .iter()
        .all(|g| g.len() == 1));
}

#[test]
fn dense_padding_stays_uncoupled_after_lifting() {
    let mut block = CMatrix::zeros(3, 3);
    block[(0, 0)] = ONE;
    block[(1, 1)] = ONE;
    block[(2, 2)] = Complex64::from(2.0);
    let sys = embed_dense(block, 2, 5.0).unwrap();
    let lifted = lift_degeneracies(&sys, 1e-2, 3).unwrap();
    let d = lifted.to_dense().unwrap();
    assert_eq!(d[(3, 3)], Complex64::from(5.0));
    for k in 0..3 {
        assert_eq!(d[(3, k)], Complex64::from(0.0));
    }
}

#[test]
fn chain_reaches_water_excited_states() {
    let model = water_analog_model(CouplingPreset::SingleFlips, 0.005, 500.0, "00010").unwrap();
    let eig = eigendecompose(&model.system).unwrap();
    let start = eig.dominant(&model.initial).unwrap();
    let table = transition_table(
        &eig,
        model.coupling.op(),
        &model.initial,
        (0.4, 2.0),
        SweepMode::Absorption,
    )
    .unwrap();
    let target = table.visible(0.01).next().unwrap().j;
    let r = prepare_eigenstate_chain(
        &model,
        &[ChainStep::new(start, target)],
        &PrepareOptions::default(),
    )
    .unwrap();
    assert!(r.fidelity > 0.95, "{}", r.fidelity);
    // and back down by emission
    let r = prepare_eigenstate_chain(
        &model,
        &[ChainStep::new(start, target), ChainStep::new(target, start)],
        &PrepareOptions::default(),
    )
    .unwrap();
    assert!(r.fidelity > 0.95, "{}", r.fidelity);
    assert_eq!(r.target, start);
}

#[test]
fn chain_abort_names_the_step() {
    let model = two_level_model(0.01, 100.0).unwrap();
    // the second step asks for another upward move from the top level
    let err = prepare_eigenstate_chain(
        &model,
        &[ChainStep::new(0, 1), ChainStep::new(0, 1)],
        &PrepareOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::StepAborted { step: 1, .. }), "{err}");
}
