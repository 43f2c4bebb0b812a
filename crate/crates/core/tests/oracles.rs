mod common;

use common::{brute_force_dam, curve_model, random_curve, tiny_instance, TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpp_core::formulation::{assemble_dam, Role};
use vpp_core::milp::{solve, verify, HighsAdapter, SolveOptions, SolveStatus, Sos2Branching};
use vpp_core::orchestrator::{run_vpp, RunConfig, SolverChoice};
use vpp_core::scenario::{validate_scenario, SessionId};
use vpp_core::stu::{eval_pb_oracle, PbCurve};
use vpp_core::synthetic::random_scenario;

#[test]
fn day_ahead_matches_enumeration_on_tiny_instances() {
    for seed in 0..40 {
        let s = tiny_instance(seed);
        assert!(validate_scenario(&s).is_empty(), "seed {seed}: {:?}", validate_scenario(&s));
        let m = assemble_dam(&s).unwrap();
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        match brute_force_dam(&s) {
            Some(best) => {
                assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}");
                assert!((sol.objective - best).abs() <= TOL, "seed {seed}: {} vs {best}", sol.objective);
            }
            None => assert_eq!(sol.status, SolveStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn native_and_binary_conversion_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let native = Sos2Branching::new(HighsAdapter::new());
    for i in 0..15 {
        let curve = random_curve(&mut rng);
        let prices: Vec<f64> = (0..3).map(|_| rng.gen_range(20.0..120.0)).collect();
        let costs: Vec<f64> = (0..3).map(|_| rng.gen_range(5.0..30.0)).collect();
        let budget = rng.gen_range(0.5..2.5) * curve.max_input();
        let m = curve_model(&curve, &prices, &costs, budget);
        let a = solve(&native, &m, &SolveOptions::default());
        let b = solve(&HighsAdapter::new(), &m, &SolveOptions::default());
        assert_eq!(a.status, SolveStatus::Optimal, "curve {i}");
        assert_eq!(b.status, SolveStatus::Optimal, "curve {i}");
        assert!((a.objective - b.objective).abs() <= TOL, "curve {i}: {} vs {}", a.objective, b.objective);
        assert!(verify(&m, &a, TOL).is_empty());
        assert!(verify(&m, &b, TOL).is_empty());
    }
}

#[test]
fn solved_power_block_output_follows_the_curve() {
    for seed in 0..5 {
        let s = random_scenario(seed, 12);
        let cfg = RunConfig {
            sessions: Some(vec![SessionId::Dam]),
            ..RunConfig::default()
        };
        let r = run_vpp(&s, &cfg).unwrap();
        assert!(r.is_complete());
        let a = &s.stu[0];
        let curve = PbCurve::from_asset(a);
        let sched = &r.ledger.schedule;
        let input = sched.series(&a.id, Role::StuPbInput, 12);
        let output = sched.series(&a.id, Role::StuPower, 12);
        let on = sched.series(&a.id, Role::StuPbOn, 12);
        for t in 0..12 {
            if on[t] > 0.5 {
                let expected = eval_pb_oracle(&curve, input[t]).unwrap();
                assert!((output[t] - expected).abs() <= TOL, "seed {seed} t={t}");
            }
        }
    }
}

#[test]
fn branching_route_solves_a_small_day() {
    let s = random_scenario(3, 4);
    let cfg = |solver| RunConfig {
        sessions: Some(vec![SessionId::Dam]),
        solver,
        ..RunConfig::default()
    };
    let a = run_vpp(&s, &cfg(SolverChoice::Highs)).unwrap();
    let b = run_vpp(&s, &cfg(SolverChoice::HighsSosBranching)).unwrap();
    assert!(a.is_complete() && b.is_complete());
    assert!((a.profit.total - b.profit.total).abs() <= TOL);
}
