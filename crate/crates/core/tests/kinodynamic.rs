use aoplan::geometric::RrtParams;
use aoplan::kinodynamic::*;
use aoplan::*;

const DIAGONAL_OPT: f64 = 1.131_370_849_898_476;

fn empty(goal_radius: f64) -> Scenario {
    Scenario::new(
        AaBox::unit(2),
        vec![],
        Config(vec![0.1, 0.1]),
        GoalRegion {
            center: Config(vec![0.9, 0.9]),
            radius: goal_radius,
        },
    )
    .unwrap()
}

fn boxed() -> Scenario {
    Scenario::new(
        AaBox::unit(2),
        vec![Obstacle::aabox(vec![0.4, 0.4], vec![0.6, 0.6])],
        Config(vec![0.1, 0.5]),
        GoalRegion {
            center: Config(vec![0.9, 0.5]),
            radius: 0.05,
        },
    )
    .unwrap()
}

fn non_increasing(cps: &[Checkpoint]) -> bool {
    let costs: Vec<f64> = cps.iter().filter_map(|c| c.best_cost).collect();
    costs.windows(2).all(|w| w[1] <= w[0])
}

fn replayable(s: &Scenario, system: &dyn DynamicalSystem, r: &PlanResult) -> bool {
    let path = r.path.as_ref().unwrap();
    let total: f64 = r.controls.iter().map(|c| c.duration).sum();
    (total - path.cost).abs() < 1e-9 && replay_solution(path, &r.controls, system, s)
}

#[test]
fn sst_single_integrator_example() {
    let s = empty(0.05);
    let sys = SingleIntegrator2d::default();
    let opts = PlanOptions::default().with_checkpoints(vec![5000, 10000, 15000]);
    let r = sst(
        &s,
        &sys,
        &mut SampleStream::uniform(2, 5),
        20000,
        SstParams::for_scenario(&s),
        &opts,
    )
    .unwrap();
    let cost = r.best_cost.unwrap();
    // duration cost can undercut the center distance by at most the goal radius
    assert!(
        (DIAGONAL_OPT - 0.05 - 1e-9..=1.25 * DIAGONAL_OPT).contains(&cost),
        "{cost}"
    );
    assert!(non_increasing(&r.checkpoints));
    assert!(replayable(&s, &sys, &r));
}

#[test]
fn sst_witness_audit_every_iteration() {
    for (s, system) in [
        (boxed(), SystemKind::Integrator2d.build()),
        (empty(0.05), SystemKind::Car.build()),
    ] {
        let params = SstParams::for_scenario(&s).with_shrink(Shrink { xi: 0.9, period: 100 });
        let mut stream = SampleStream::uniform(2, 17);
        let mut planner = SstPlanner::new(&s, system.as_ref(), &mut stream, params, &PlanOptions::default()).unwrap();
        for i in 0..500 {
            planner.step();
            let audit = planner.audit();
            assert!(audit.is_ok(), "{} iteration {i}: {audit:?}", system.name());
        }
        let (bn, ws) = planner.radii();
        assert!(bn < 0.05 * 2f64.sqrt() && ws < 0.02 * 2f64.sqrt());
        assert!(replay_tree(planner.tree(), system.as_ref(), &s));
    }
}

#[test]
fn ao_rrt_bound_audit() {
    let s = boxed();
    let sys = SingleIntegrator2d::default();
    let mut stream = SampleStream::uniform(2, 8);
    let mut planner =
        AoRrtPlanner::new(&s, &sys, &mut stream, AoRrtParams::default(), &PlanOptions::default()).unwrap();
    for i in 0..8000 {
        planner.step();
        if planner.current_bound().is_finite() {
            assert!(planner.max_node_cost() <= planner.current_bound(), "iteration {i}");
        }
    }
    let bounds = planner.bound_sequence();
    assert!(bounds.len() >= 2, "{bounds:?}");
    assert!(bounds.windows(2).all(|w| w[1] < w[0]), "{bounds:?}");
    assert_eq!(planner.best_cost(), bounds.last().copied());
    assert!(replay_tree(planner.tree(), &sys, &s));
}

#[test]
fn ao_rrt_result_replays() {
    let s = empty(0.05);
    let sys = SingleIntegrator2d::default();
    let opts = PlanOptions::default().with_checkpoints(vec![2000, 4000, 6000]);
    let r = ao_rrt(
        &s,
        &sys,
        &mut SampleStream::uniform(2, 5),
        8000,
        AoRrtParams::default(),
        &opts,
    )
    .unwrap();
    assert!(r.solved());
    assert!(non_increasing(&r.checkpoints));
    assert!(replayable(&s, &sys, &r));
    assert!(r.best_cost.unwrap() >= DIAGONAL_OPT - 0.05 - 1e-9);
}

#[test]
fn kinematic_car_plans() {
    let s = empty(0.05);
    let car = KinematicCar::default();
    let r = sst(
        &s,
        &car,
        &mut SampleStream::uniform(2, 2),
        20000,
        SstParams::for_scenario(&s),
        &PlanOptions::default(),
    )
    .unwrap();
    assert!(r.solved());
    assert!(replayable(&s, &car, &r));
    assert!(workspace_length(r.path.as_ref().unwrap(), &car) >= DIAGONAL_OPT - 0.05 - 1e-9);
}

#[test]
fn ao_meta_over_bounded_rrt() {
    let s = empty(0.02);
    let stream = SampleStream::uniform(2, 21);
    let mut inner = GeometricBoundedRrt::new(&s, stream, RrtParams::for_scenario(&s));
    let params = AoMetaParams {
        beta: 0.05,
        rounds: 8,
        budget: 4000,
    };
    let out = ao_meta(&mut inner, &params, &PlanOptions::default()).unwrap();
    let first = out.bounds[0];
    let last = out.result.best_cost.unwrap();
    assert!(last <= first);
    assert!(out.bounds.windows(2).all(|w| w[1] < w[0] * (1.0 - params.beta) + 1e-12));
    assert!(last >= DIAGONAL_OPT - 0.02 - 1e-9);
    assert!(non_increasing(&out.result.checkpoints));
}

#[test]
fn ao_meta_over_kinodynamic_rrt() {
    let s = empty(0.05);
    let sys = SingleIntegrator2d::default();
    let mut inner = KinoBoundedRrt::new(&s, &sys, SampleStream::uniform(2, 4)).unwrap();
    let params = AoMetaParams {
        beta: 0.05,
        rounds: 5,
        budget: 20000,
    };
    let out = ao_meta(&mut inner, &params, &PlanOptions::default()).unwrap();
    assert!(!out.bounds.is_empty());
    assert!(out.bounds.windows(2).all(|w| w[1] < w[0]));
    assert!(replayable(&s, &sys, &out.result));
}

#[test]
fn monte_carlo_propagation_respects_bounds() {
    let sys = SingleIntegrator2d::default();
    let (lo, hi) = sys.duration_bounds();
    let mut stream = SampleStream::uniform(2, 1);
    for _ in 0..200 {
        let p = monte_carlo_propagate(&sys, &[0.5, 0.5], &mut stream);
        assert!(p.duration >= lo && p.duration <= hi);
        let end = p.trajectory.last().unwrap();
        // unit speed bound
        assert!(geometry::distance(&[0.5, 0.5], end) <= p.duration + 1e-12);
    }
}
