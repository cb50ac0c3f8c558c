use aoplan::geometry::distance;
use aoplan::nn::{Neighbor, NeighborIndex};
use aoplan::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scan(points: &[Vec<f64>], q: &[f64], metric: impl Fn(&[f64], &[f64]) -> f64) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .iter()
        .enumerate()
        .map(|(id, p)| Neighbor {
            id,
            distance: metric(q, p),
        })
        .collect();
    all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
    all
}

fn build(points: &[Vec<f64>]) -> NeighborIndex {
    let mut index = NeighborIndex::new(points[0].len());
    for (id, p) in points.iter().enumerate() {
        index.insert(id, p).unwrap();
    }
    index
}

// Points on a coarse lattice so distance ties are common.
fn lattice_points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec((0u8..6).prop_map(|v| v as f64 * 0.25), dim),
        1..120,
    )
}

fn block_metric(a: &[f64], b: &[f64]) -> f64 {
    distance(&a[..2], &b[..2]) + distance(&a[2..], &b[2..])
}

proptest! {
    #[test]
    fn queries_match_linear_scan(points in lattice_points(3), q in prop::collection::vec(-0.2f64..1.5, 3), k in 1usize..20, r in 0.05f64..1.0) {
        let index = build(&points);
        let oracle = scan(&points, &q, distance);
        prop_assert_eq!(index.k_nearest(&q, k).unwrap(), oracle[..k.min(points.len())].to_vec());
        let inside: Vec<Neighbor> = oracle.iter().copied().filter(|n| n.distance <= r).collect();
        prop_assert_eq!(index.within_radius(&q, r).unwrap(), inside);
        prop_assert_eq!(index.nearest(&q).unwrap(), oracle[0]);
    }

    #[test]
    fn nearest_by_matches_scan(points in lattice_points(4), q in prop::collection::vec(-0.2f64..1.5, 4)) {
        let index = build(&points);
        prop_assert_eq!(index.nearest_by(&q, block_metric).unwrap(), scan(&points, &q, block_metric)[0]);
    }

    #[test]
    fn full_k_is_a_permutation(points in lattice_points(2), q in prop::collection::vec(0.0f64..1.0, 2)) {
        let index = build(&points);
        let mut ids: Vec<usize> = index.k_nearest(&q, points.len()).unwrap().iter().map(|n| n.id).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..points.len()).collect::<Vec<_>>());
    }

    #[test]
    fn radius_results_nest(points in lattice_points(2), q in prop::collection::vec(0.0f64..1.0, 2), r in 0.01f64..1.0, grow in 1.0f64..3.0) {
        let index = build(&points);
        let small = index.within_radius(&q, r).unwrap();
        let large = index.within_radius(&q, r * grow).unwrap();
        for n in &small {
            prop_assert!(large.contains(n));
        }
    }
}

#[test]
fn thousand_uniform_points_against_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let points: Vec<Vec<f64>> = (0..1000).map(|_| vec![rng.random(), rng.random()]).collect();
    // inserted one by one so every merge level of the index is exercised
    let index = build(&points);
    for _ in 0..100 {
        let q = vec![rng.random::<f64>(), rng.random::<f64>()];
        let oracle = scan(&points, &q, distance);
        assert_eq!(index.k_nearest(&q, 10).unwrap(), oracle[..10]);
        let r = 0.05;
        let inside: Vec<Neighbor> = oracle.iter().copied().filter(|n| n.distance <= r).collect();
        assert_eq!(index.within_radius(&q, r).unwrap(), inside);
    }
}

#[test]
fn usage_errors() {
    let mut index = NeighborIndex::new(2);
    assert!(matches!(index.k_nearest(&[0.0, 0.0], 1), Err(Error::Usage(_))));
    index.insert(7, &[0.0, 0.0]).unwrap();
    assert!(matches!(index.insert(7, &[1.0, 0.0]), Err(Error::Usage(_))));
    assert!(matches!(index.within_radius(&[0.0, 0.0], 0.0), Err(Error::Usage(_))));
}
