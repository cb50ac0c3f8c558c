use aoplan::geometric::{connection_radius, k_connection, rgg_connectivity_radius, RadiusRule, RuleKind};
use aoplan::sampling::{measure_dispersion, sample_free};
use aoplan::*;
use proptest::prelude::*;

// Independent 40-digit evaluations at d = 2, mu = 1, n = 1000, no safety factor.
const PRM_GOLDEN: f64 = 0.114860092198;
const FMT_GOLDEN: f64 = 0.066314505149;
const RGG_GOLDEN: f64 = 0.046891436282;

fn radius(kind: RuleKind, d: usize, mu: f64, n: usize) -> f64 {
    connection_radius(&RadiusRule::new(kind, d, mu).with_safety(1.0), n).unwrap()
}

#[test]
fn goldens() {
    assert!((radius(RuleKind::PrmStar, 2, 1.0, 1000) - PRM_GOLDEN).abs() < 1e-9);
    assert!((radius(RuleKind::FmtStarConstant, 2, 1.0, 1000) - FMT_GOLDEN).abs() < 1e-9);
    assert!((rgg_connectivity_radius(2, 1000).unwrap() - RGG_GOLDEN).abs() < 1e-9);
}

#[test]
fn safety_factor_scales_linearly() {
    let base = radius(RuleKind::PrmStar, 2, 1.0, 1000);
    let r = connection_radius(&RadiusRule::new(RuleKind::PrmStar, 2, 1.0), 1000).unwrap();
    assert!((r - 1.001 * base).abs() < 1e-15);
}

proptest! {
    // r(mu) scales as mu^(1/d) for the PRM* and FMT* rules, mu^(1/(d+1)) for RRT*.
    #[test]
    fn radius_homogeneity(d in prop::sample::select(vec![2usize, 3, 6]), n in 2usize..100_000, mu in 0.1f64..10.0, lambda in 0.1f64..10.0) {
        for kind in [RuleKind::PrmStar, RuleKind::FmtStarConstant] {
            let ratio = radius(kind, d, lambda * mu, n) / radius(kind, d, mu, n);
            prop_assert!((ratio - lambda.powf(1.0 / d as f64)).abs() < 1e-9);
        }
        let ratio = radius(RuleKind::RrtStarRevised, d, lambda * mu, n) / radius(RuleKind::RrtStarRevised, d, mu, n);
        prop_assert!((ratio - lambda.powf(1.0 / (d as f64 + 1.0))).abs() < 1e-9);
    }

    #[test]
    fn k_is_monotone_in_n(d in 1usize..10, n in 2usize..1_000_000) {
        prop_assert!(k_connection(d, n + 1).unwrap() >= k_connection(d, n).unwrap());
        prop_assert!(k_connection(d, n).unwrap() as f64 > std::f64::consts::E * (1.0 + 1.0 / d as f64) * (n as f64).ln());
    }

    #[test]
    fn radius_ordering(d in 1usize..12, n in 2usize..1_000_000) {
        let prm = radius(RuleKind::PrmStar, d, 1.0, n);
        let fmt = radius(RuleKind::FmtStarConstant, d, 1.0, n);
        let rgg = rgg_connectivity_radius(d, n).unwrap();
        prop_assert!(fmt < prm);
        prop_assert!(rgg < prm);
        if d == 1 {
            prop_assert!(fmt <= 2.0 * rgg * (1.0 + 1e-12));
        } else {
            prop_assert!(fmt < 2.0 * rgg);
        }
    }

    #[test]
    fn uniform_streams_are_reproducible(seed in any::<u64>(), d in 1usize..6) {
        let dom = AaBox::unit(d);
        let mut a = SampleStream::uniform(d, seed);
        let mut b = SampleStream::uniform(d, seed);
        for _ in 0..50 {
            let q = a.next_sample(&dom);
            prop_assert!(dom.contains(&q));
            prop_assert_eq!(q, b.next_sample(&dom));
        }
    }

    #[test]
    fn dispersion_is_bounded_by_the_diagonal(pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..20)) {
        let dom = AaBox::unit(2);
        let samples: Vec<Config> = pts.into_iter().map(Config).collect();
        let r = measure_dispersion(&samples, &dom, 0.05).unwrap();
        prop_assert!(r.dispersion <= dom.diagonal());
        prop_assert_eq!(r.n, samples.len());
    }
}

#[test]
fn halton_is_seedless_and_scaled() {
    let dom = AaBox::unit(3);
    let a: Vec<Config> = {
        let mut s = SampleStream::halton(3);
        (0..100).map(|_| s.next_sample(&dom)).collect()
    };
    let mut s = SampleStream::halton(3);
    for q in &a {
        assert_eq!(q, &s.next_sample(&dom));
    }
    let mut one = SampleStream::halton(1);
    assert_eq!(one.next_sample(&AaBox::new(vec![0.0], vec![2.0])).0, vec![1.0]);
}

#[test]
fn halton_dispersion_decreases() {
    let dom = AaBox::unit(2);
    let mut s = SampleStream::halton(2);
    let pts: Vec<Config> = (0..256).map(|_| s.next_sample(&dom)).collect();
    let d64 = measure_dispersion(&pts[..64], &dom, 1.0 / 512.0).unwrap().dispersion;
    let d256 = measure_dispersion(&pts, &dom, 1.0 / 512.0).unwrap().dispersion;
    assert!(d256 < d64, "{d256} vs {d64}");
}

#[test]
fn sample_free_cases() {
    let goal = GoalRegion {
        center: Config(vec![0.9, 0.9]),
        radius: 0.02,
    };
    let empty = Scenario::new(AaBox::unit(2), vec![], Config(vec![0.1, 0.1]), goal.clone()).unwrap();
    let mut a = SampleStream::uniform(2, 9);
    let mut b = SampleStream::uniform(2, 9);
    assert_eq!(sample_free(&mut a, &empty, 10).unwrap(), b.next_sample(&empty.domain));

    let boxed = Scenario::new(
        AaBox::unit(2),
        vec![Obstacle::aabox(vec![0.4, 0.4], vec![0.6, 0.6])],
        Config(vec![0.1, 0.1]),
        goal,
    )
    .unwrap();
    let mut s = SampleStream::uniform(2, 3);
    for _ in 0..200 {
        let q = sample_free(&mut s, &boxed, 100).unwrap();
        assert!(point_valid(&boxed, &q).unwrap());
    }
}
