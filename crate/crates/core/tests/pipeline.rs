use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lbfl_core::fixtures::{e1, line};
use lbfl_core::generate::{generate_instance, Profile};
use lbfl_core::io::{instance_from_json, instance_to_json, SolutionFile};
use lbfl_core::oracle::brute_lbfl;
use lbfl_core::pipeline::check_solution;
use lbfl_core::{
    cost_of, pipeline_solve, Error, LbflInstance, LbflSolution, PipelineConfig, Rational, Scaled,
};

fn solve(inst: &LbflInstance) -> lbfl_core::PipelineOutput {
    pipeline_solve(inst, &PipelineConfig::default()).unwrap()
}

#[test]
fn e1_output_is_feasible_and_checks_out() {
    let inst = e1();
    let out = solve(&inst);
    assert!(out.report.all_passed());
    assert!(out.cost.total >= 11);
    let verdict =
        check_solution(&inst, &SolutionFile::from_solution(&inst, &out.solution)).unwrap();
    assert!(verdict.feasible, "{:?}", verdict.problems);
    assert_eq!(verdict.cost, Some(out.cost));
}

#[test]
fn empty_instance_gives_the_empty_solution() {
    let out = solve(&LbflInstance::empty(1));
    assert_eq!(out.solution, LbflSolution::empty());
    assert_eq!(out.cost.total, 0);
}

#[test]
fn infeasible_instance_agrees_with_the_oracle() {
    let inst = line(&[(0, 1, 4), (10, 1, 5)], &[0, 1, 10]);
    assert!(matches!(
        pipeline_solve(&inst, &PipelineConfig::default()),
        Err(Error::Infeasible(_))
    ));
    assert!(matches!(brute_lbfl(&inst), Err(Error::Infeasible(_))));
}

#[test]
fn single_location_falls_back_to_the_free_facility() {
    // everything sits at one point, so only one location survives
    let inst = line(&[(0, 5, 2), (0, 9, 1)], &[0, 0, 0]);
    let out = solve(&inst);
    assert!(out.report.degenerate);
    assert_eq!(out.solution.assign, vec![out.solution.assign[0]; 3]);
    assert_eq!(out.cost.total, brute_lbfl(&inst).unwrap().1);
}

#[test]
fn other_coverage_parameters_certify() {
    let profile = Profile::clustered();
    for beta in [
        Rational::new(3, 5),
        Rational::new(3, 4),
        Rational::new(5, 6),
    ] {
        let config = PipelineConfig {
            beta,
            ..PipelineConfig::default()
        };
        for seed in 0..40 {
            let inst = generate_instance(seed, &profile).unwrap();
            let out = pipeline_solve(&inst, &config).unwrap();
            assert!(out.report.all_passed(), "beta {beta} seed {seed}");
            assert!(cost_of(&inst, &out.solution).unwrap().is_feasible());
            let opt = Scaled::new(brute_lbfl(&inst).unwrap().1, inst.scale);
            assert!(out
                .report
                .costs
                .output
                .leq_times(out.report.ledger.alpha, opt));
        }
    }
}

#[test]
fn rejected_coverage_parameters() {
    for beta in [
        Rational::new(1, 2),
        Rational::new(1, 1),
        Rational::new(1, 3),
    ] {
        let config = PipelineConfig {
            beta,
            ..PipelineConfig::default()
        };
        assert!(matches!(
            pipeline_solve(&e1(), &config),
            Err(Error::Malformed(_))
        ));
    }
}

#[test]
fn instance_json_round_trips() {
    for seed in 0..10 {
        let inst = generate_instance(seed, &Profile::tiny()).unwrap();
        assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
    }
}

fn random_solution(inst: &LbflInstance, rng: &mut ChaCha8Rng) -> LbflSolution {
    let nf = inst.num_facilities();
    let mut open: BTreeSet<usize> = (0..nf).filter(|_| rng.gen_bool(0.5)).collect();
    if open.is_empty() {
        open.insert(rng.gen_range(0..nf));
    }
    let pool: Vec<usize> = open.iter().copied().collect();
    let assign = (0..inst.num_clients())
        .map(|_| pool[rng.gen_range(0..pool.len())])
        .collect();
    LbflSolution { open, assign }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_feasible_certified_and_not_below_optimum(seed in 0u64..5000, micro in any::<bool>()) {
        let profile = if micro { Profile::micro() } else { Profile::tiny() };
        let inst = generate_instance(seed, &profile).unwrap();
        let out = solve(&inst);
        prop_assert!(out.report.all_passed());
        let report = cost_of(&inst, &out.solution).unwrap();
        prop_assert!(report.is_feasible());
        prop_assert_eq!(report.cost, out.cost);
        prop_assert!(out.cost.total >= brute_lbfl(&inst).unwrap().1);
    }

    #[test]
    fn random_solutions_never_beat_the_oracle(seed in 0u64..5000) {
        let inst = generate_instance(seed, &Profile::tiny()).unwrap();
        let opt = brute_lbfl(&inst).unwrap().1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let sol = random_solution(&inst, &mut rng);
            let r = cost_of(&inst, &sol).unwrap();
            if r.is_feasible() {
                prop_assert!(r.cost.total >= opt);
            }
        }
    }

    #[test]
    fn cost_is_the_sum_of_its_parts(seed in 0u64..5000) {
        let inst = generate_instance(seed, &Profile::tiny()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sol = random_solution(&inst, &mut rng);
        let c = cost_of(&inst, &sol).unwrap().cost;
        let facility: i64 = sol.open.iter().map(|&i| inst.facilities[i].cost).sum();
        let connection: i64 = sol.assign.iter().enumerate().map(|(j, &i)| inst.fc(i, j)).sum();
        prop_assert_eq!((c.facility, c.connection, c.penalty), (facility, connection, 0));
        prop_assert_eq!(c.total, facility + connection);
    }
}
