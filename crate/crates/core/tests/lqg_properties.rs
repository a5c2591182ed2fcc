use kmlqg::bench::{
    generate_random_plant, random_bounded_pair, random_direction, random_similarity,
};
use kmlqg::lqg::{
    assemble_closed_loop, cost_differential, cost_differential_nested, lqg_cost,
    lqg_riccati_optimum,
};
use kmlqg::matlin::{is_controllable, is_observable, DEFAULT_RANK_TOL};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 96,
        rng_seed: RngSeed::Fixed(0x6c71_6763),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn oracle_cost_matches_its_controller(seed in any::<u64>(), n in 1usize..5, m in 1usize..4, p in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plant = generate_random_plant(n, m, p, 0.8, &mut rng).unwrap();
        let opt = lqg_riccati_optimum(&plant).unwrap();
        let j = lqg_cost(&plant, &opt.controller).unwrap();
        prop_assert!((j - opt.cost).abs() <= 1e-8 * opt.cost, "{j} vs {}", opt.cost);
    }

    #[test]
    fn no_admissible_controller_beats_the_oracle(seed in any::<u64>(), n in 1usize..4, m in 1usize..3, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (plant, k) = random_bounded_pair(n, m, p, 100.0, &mut rng).unwrap();
        let opt = lqg_riccati_optimum(&plant).unwrap();
        let j = lqg_cost(&plant, &k).unwrap();
        prop_assert!(j >= opt.cost - 1e-8 * opt.cost, "{j} < {}", opt.cost);
    }

    #[test]
    fn adjoint_and_nested_differentials_agree(seed in any::<u64>(), n in 1usize..4, m in 1usize..3, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (plant, k) = random_bounded_pair(n, m, p, 100.0, &mut rng).unwrap();
        let v = random_direction(&k, &mut rng);
        let adjoint = cost_differential(&plant, &k, &v).unwrap();
        let nested = cost_differential_nested(&plant, &k, &v).unwrap();
        prop_assert!((adjoint - nested).abs() <= 1e-9 * nested.abs().max(1e-300), "{adjoint} vs {nested}");
    }

    #[test]
    fn minimal_controllers_give_minimal_closed_loops(seed in any::<u64>(), n in 1usize..4, m in 1usize..3, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (plant, k) = random_bounded_pair(n, m, p, 100.0, &mut rng).unwrap();
        let cl = assemble_closed_loop(&plant, &k).unwrap();
        prop_assert!(is_controllable(&cl.a_cl, &cl.b_cl, DEFAULT_RANK_TOL));
        prop_assert!(is_observable(&cl.a_cl, &cl.c_cl, DEFAULT_RANK_TOL));
    }

    #[test]
    fn transforms_compose(seed in any::<u64>(), n in 1usize..5, m in 1usize..3, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, k) = random_bounded_pair(n, m, p, 100.0, &mut rng).unwrap();
        let s = random_similarity(n, 10.0, &mut rng).unwrap();
        let r = random_similarity(n, 10.0, &mut rng).unwrap();
        let twice = k.transform(&r).unwrap().transform(&s).unwrap();
        let once = k.transform(&(&s * &r)).unwrap();
        let diff = (twice.to_vector() - once.to_vector()).norm();
        prop_assert!(diff <= 1e-10 * once.norm(), "{diff:e}");
    }
}
