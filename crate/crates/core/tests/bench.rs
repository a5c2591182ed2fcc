use kmlqg::bench::{
    hessian_signature_check, random_suite, run_experiment, scalar_system, CellOutcome,
    ExperimentConfig, Method,
};
use kmlqg::optimizer::OptimizerConfig;

#[test]
fn scalar_hessian_has_one_null_direction() {
    for h in [1e-4, 5e-5] {
        let report = hessian_signature_check(&scalar_system().plant, h).unwrap();
        assert_eq!(report.signature(), (0, 1, 2), "{report}");
    }
}

#[test]
fn random_plants_have_orbit_nullity() {
    let suite = random_suite(2, 1, 1, 1.0, 0..5).unwrap();
    for sys in &suite {
        for h in [1e-4, 5e-5] {
            let report = hessian_signature_check(&sys.plant, h).unwrap();
            assert_eq!(report.negative, 0, "{}: {report}", sys.name);
            assert_eq!(report.zero, 4, "{}: {report}", sys.name);
            assert!(report.is_expected());
        }
    }
}

#[test]
fn methods_share_initial_controllers() {
    let suite = random_suite(3, 2, 2, 0.8, 0..3).unwrap();
    let config = ExperimentConfig {
        base: OptimizerConfig {
            max_iters: 25,
            record_wall_time: false,
            ..OptimizerConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&suite, &config).unwrap();
    assert_eq!(result.cells.len(), suite.len() * config.methods.len());
    for chunk in result.cells.chunks(config.methods.len()) {
        let k0 = chunk[0].initial.as_ref().unwrap();
        for cell in chunk {
            assert_eq!(cell.system, chunk[0].system);
            assert_eq!(cell.initial.as_ref(), Some(k0));
            let trace = cell.trace().unwrap();
            assert!(trace.iterations() <= 25);
            assert!(trace.records.iter().all(|r| r.gap.is_some()));
        }
    }
    assert_eq!(result.summary().len(), result.cells.len());
}

#[test]
fn same_seed_same_experiment() {
    let suite = random_suite(2, 1, 1, 1.0, [4, 9]).unwrap();
    let config = ExperimentConfig {
        base: OptimizerConfig {
            max_iters: 40,
            record_wall_time: false,
            ..OptimizerConfig::default()
        },
        seed: 11,
        ..ExperimentConfig::default()
    };
    let a = run_experiment(&suite, &config).unwrap();
    let b = run_experiment(&suite, &config).unwrap();
    assert_eq!(a.summary(), b.summary());
}

#[test]
fn scalar_suite_reaches_high_accuracy() {
    let config = ExperimentConfig {
        methods: vec![Method::RGD_UNIFORM, Method::RGD_DYNAMICS, Method::GD],
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&[scalar_system()], &config).unwrap();
    for cell in &result.cells {
        let CellOutcome::Finished(trace) = &cell.outcome else {
            panic!("{}: {:?}", cell.method.label(), cell.outcome);
        };
        let gap = trace.final_gap().unwrap();
        assert!(gap < 1e-8, "{}: gap {gap:e}", cell.method.label());
    }
}
