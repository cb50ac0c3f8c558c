use aoplan::geometric::*;
use aoplan::kinodynamic::{sst, SingleIntegrator2d, SstParams};
use aoplan::oracles::*;
use aoplan::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scene(obstacles: Vec<Obstacle>, start: [f64; 2], goal: [f64; 2], radius: f64) -> Option<Scenario> {
    Scenario::new(
        AaBox::unit(2),
        obstacles,
        Config(start.to_vec()),
        GoalRegion {
            center: Config(goal.to_vec()),
            radius,
        },
    )
    .ok()
}

fn boxed() -> Scenario {
    scene(
        vec![Obstacle::aabox(vec![0.4, 0.4], vec![0.6, 0.6])],
        [0.1, 0.5],
        [0.9, 0.5],
        0.02,
    )
    .unwrap()
}

// A few random boxes with free start and goal center.
fn random_scene(rng: &mut ChaCha8Rng) -> Scenario {
    loop {
        let boxes: Vec<Obstacle> = (0..rng.random_range(1..5))
            .map(|_| {
                let (x, y) = (rng.random_range(0.15..0.75), rng.random_range(0.0..0.8));
                Obstacle::aabox(
                    vec![x, y],
                    vec![x + rng.random_range(0.02..0.2), y + rng.random_range(0.05..0.4)],
                )
            })
            .collect();
        if let Some(s) = scene(boxes, [0.05, rng.random()], [0.95, rng.random()], 0.02) {
            if s.is_free(&s.goal.center) {
                return s;
            }
        }
    }
}

#[test]
fn halving_the_corner_inflation_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let s = random_scene(&mut rng);
        let corners = 4.0 * s.obstacles.len() as f64;
        let a = optimal_cost_2d_boxes_eps(&s, EPS_VG).unwrap();
        let b = optimal_cost_2d_boxes_eps(&s, EPS_VG / 2.0).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 2.0 * EPS_VG * corners, "{a} vs {b}"),
            (a, b) => assert_eq!(a, b),
        }
    }
}

#[test]
fn planners_never_beat_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    for trial in 0..12 {
        let s = random_scene(&mut rng);
        let Some(c_star) = optimal_cost_2d_boxes(&s).unwrap() else {
            continue;
        };
        let floor = c_star - s.goal.radius - 1e-9;
        let rule = RadiusRule::for_scenario(RuleKind::PrmStar, &s);
        let prm = prm_star(
            &s,
            &mut SampleStream::uniform(2, trial),
            1000,
            &rule,
            &PlanOptions::default(),
        )
        .unwrap();
        let params = RrtParams::for_scenario(&s);
        let rewire = RewireParams::for_scenario(&s, &params);
        let star = rrt_star(
            &s,
            &mut SampleStream::uniform(2, trial),
            2000,
            params,
            rewire,
            &PlanOptions::default(),
        )
        .unwrap();
        for c in [prm.result.best_cost, star.best_cost].into_iter().flatten() {
            assert!(c >= floor, "trial {trial}: {c} < {c_star}");
            checked += 1;
        }
    }
    assert!(checked >= 12, "only {checked} solved runs");

    let mut s = boxed();
    s.goal.radius = 0.05;
    let c_star = optimal_cost_2d_boxes(&s).unwrap().unwrap();
    let kino = sst(
        &s,
        &SingleIntegrator2d::default(),
        &mut SampleStream::uniform(2, 3),
        20000,
        SstParams::for_scenario(&s),
        &PlanOptions::default(),
    )
    .unwrap();
    assert!(kino.best_cost.unwrap() >= c_star - s.goal.radius - 1e-9);
}

#[test]
fn prm_solution_tiles_at_half_clearance() {
    let s = boxed();
    let rule = RadiusRule::for_scenario(RuleKind::PrmStar, &s);
    let out = prm_star(
        &s,
        &mut SampleStream::uniform(2, 7),
        2000,
        &rule,
        &PlanOptions::default(),
    )
    .unwrap();
    let path = out.result.path.unwrap();
    let clearance = path_clearance(&s, &path, 1e-5);
    assert!(clearance > 0.0);
    assert!(tiling_cover_check(&s, &path, clearance / 2.0).unwrap());
    assert!(!tiling_cover_check(&s, &path, 2.0 * clearance).unwrap());
}

#[test]
fn unreachable_goal_has_no_optimum() {
    let mut s = boxed();
    s.obstacles.push(Obstacle::aabox(vec![0.45, 0.0], vec![0.55, 1.0]));
    assert_eq!(optimal_cost_2d_boxes(&s).unwrap(), None);
}
