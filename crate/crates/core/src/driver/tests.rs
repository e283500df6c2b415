use super::*;
use crate::driver::selftest::{run_selftest, SelftestOptions};

fn quick_config() -> AmrConfig {
    AmrConfig {
        max_iterations: 3,
        ..AmrConfig::default()
    }
}

#[test]
fn single_iteration_produces_one_record() {
    let config = AmrConfig {
        max_iterations: 1,
        ..AmrConfig::default()
    };
    let outcome = run_amr(&config).unwrap();
    assert_eq!(outcome.report.iterations.len(), 1);
    let record = &outcome.report.iterations[0];
    assert_eq!(record.n_free, 22);
    assert_eq!(record.n_elements, 18);
    assert!(record.eta > 0.0);
    assert!(record.hcurl_error > 0.0);
    assert!(record.marked >= 1);
}

#[test]
fn dof_count_strictly_increases() {
    let outcome = run_amr(&quick_config()).unwrap();
    let dofs: Vec<usize> = outcome.report.iterations.iter().map(|r| r.n_free).collect();
    for pair in dofs.windows(2) {
        assert!(pair[1] > pair[0], "DOF counts {dofs:?}");
    }
}

#[test]
fn uniform_run_quadruples_dofs_roughly() {
    let config = AmrConfig {
        max_iterations: 3,
        ..AmrConfig::default()
    };
    let outcome = run_uniform(&config).unwrap();
    let records = &outcome.report.iterations;
    assert_eq!(records.len(), 3);
    for pair in records.windows(2) {
        let ratio = pair[1].n_free as f64 / pair[0].n_free as f64;
        assert!(
            (3.0..5.5).contains(&ratio),
            "growth ratio {ratio} out of the uniform-refinement range"
        );
        assert_eq!(pair[0].marked, pair[0].n_elements);
    }
}

#[test]
fn report_is_deterministic_excluding_wall_times() {
    let config = AmrConfig {
        max_iterations: 2,
        estimator_path: EstimatorPath::QuantumSampled,
        shots_policy: ShotsPolicy::Fixed(500),
        ..AmrConfig::default()
    };
    let a = run_amr(&config).unwrap();
    let b = run_amr(&config).unwrap();
    assert_eq!(
        a.report.redacted().to_json(),
        b.report.redacted().to_json()
    );
}

#[test]
fn forms_path_tracks_classical_eta() {
    let config = AmrConfig {
        max_iterations: 2,
        estimator_path: EstimatorPath::Forms,
        ..AmrConfig::default()
    };
    let outcome = run_amr(&config).unwrap();
    for record in &outcome.report.iterations {
        let discrepancy = (record.eta_forms - record.eta_classical).abs() / record.eta_classical;
        assert!(
            discrepancy < 0.2,
            "projection discrepancy {discrepancy} at iteration {}",
            record.iteration
        );
        assert_eq!(record.eta, record.eta_forms);
    }
}

#[test]
fn quantum_exact_path_reproduces_forms_values() {
    let config = AmrConfig {
        max_iterations: 2,
        estimator_path: EstimatorPath::QuantumExact,
        ..AmrConfig::default()
    };
    let outcome = run_amr(&config).unwrap();
    for record in &outcome.report.iterations {
        let quantum = record.eta_quantum.unwrap();
        assert!(
            (quantum - record.eta_forms).abs() <= 1e-9 * (1.0 + record.eta_forms),
            "iteration {}: quantum {} vs forms {}",
            record.iteration,
            quantum,
            record.eta_forms
        );
        assert!(record.max_alpha.unwrap() > 0.0);
        assert!(record.shots.is_none());
    }
}

#[test]
fn eta_decreases_over_adaptive_iterations() {
    let config = AmrConfig {
        max_iterations: 4,
        ..AmrConfig::default()
    };
    let outcome = run_amr(&config).unwrap();
    let first = &outcome.report.iterations[0];
    let last = outcome.report.iterations.last().unwrap();
    assert!(last.eta < first.eta);
    assert!(last.hcurl_error < first.hcurl_error);
}

#[test]
fn vqls_solver_refuses_when_over_budget() {
    let config = AmrConfig {
        max_iterations: 2,
        solver: SolverChoice::Vqls,
        ..AmrConfig::default()
    };
    // Iteration 1 fits in 5 qubits, iteration 2 does not.
    let err = run_amr(&config).unwrap_err();
    assert!(matches!(err, Error::QubitBudget { .. }), "got {err}");
}

#[test]
fn global_embedding_is_capped_by_qubit_budget() {
    let config = AmrConfig {
        max_iterations: 2,
        estimator_path: EstimatorPath::QuantumExact,
        embedding: Embedding::Global,
        ..AmrConfig::default()
    };
    let err = run_amr(&config).unwrap_err();
    assert!(matches!(err, Error::Quantum(_)), "got {err}");
}

#[test]
fn sampled_path_with_zero_shots_is_rejected() {
    let config = AmrConfig {
        estimator_path: EstimatorPath::QuantumSampled,
        shots_policy: ShotsPolicy::Fixed(0),
        ..AmrConfig::default()
    };
    assert!(run_amr(&config).is_err());
}

#[test]
fn shots_formula_instances() {
    assert_eq!(shots_for(0.1, 1.0, 1.0), 100);
    // Doubling ||E|| multiplies the count by 16.
    assert_eq!(shots_for(0.1, 1.0, 2.0), 1600);
    // Halving epsilon multiplies it by 4.
    assert_eq!(shots_for(0.05, 1.0, 1.0), 400);
}

#[test]
fn eta_target_stops_early() {
    let config = AmrConfig {
        max_iterations: 10,
        eta_target: Some(1e9),
        ..AmrConfig::default()
    };
    let outcome = run_amr(&config).unwrap();
    assert_eq!(outcome.report.iterations.len(), 1);
}

#[test]
fn output_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let config = AmrConfig {
        max_iterations: 2,
        out_dir: Some(dir.path().to_path_buf()),
        dump_solution: true,
        dump_system: true,
        ..AmrConfig::default()
    };
    let outcome = run_amr(&config).unwrap();
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("convergence.csv").exists());
    assert!(dir.path().join("elements_iter01.csv").exists());
    assert!(dir.path().join("solution_iter01.csv").exists());
    assert!(dir.path().join("system_iter01.mtx").exists());
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("iter,Ndof,eta,hcurlError,markedCount"));
    assert_eq!(csv.lines().count(), 1 + outcome.report.iterations.len());
    let elements = std::fs::read_to_string(dir.path().join("elements_iter01.csv")).unwrap();
    assert!(elements.starts_with("elementId,eta1sq,eta2sq,eta3sq,eta4sq,etaK,hcurlErrK"));
}

#[test]
fn selftest_passes_clean_and_catches_injected_fault() {
    let clean = run_selftest(SelftestOptions {
        quick: true,
        inject_jump_sign_flip: false,
    });
    for result in &clean {
        assert!(result.passed, "{}: {}", result.name, result.detail);
    }
    let injected = run_selftest(SelftestOptions {
        quick: true,
        inject_jump_sign_flip: true,
    });
    let face_sum = injected
        .iter()
        .find(|r| r.name == "jump-face-sum")
        .expect("face-sum check present");
    assert!(!face_sum.passed, "injected sign flip went unnoticed");
}

#[test]
fn config_validation() {
    let bad_theta = AmrConfig {
        theta: 1.5,
        ..AmrConfig::default()
    };
    assert!(bad_theta.validate().is_err());
    let bad_iters = AmrConfig {
        max_iterations: 0,
        ..AmrConfig::default()
    };
    assert!(bad_iters.validate().is_err());
    assert!(AmrConfig::default().validate().is_ok());
    assert!(EstimatorPath::parse("quantum-exact").is_ok());
    assert!(EstimatorPath::parse("nope").is_err());
    assert!(SolverChoice::parse("vqls").is_ok());
}
