//! Property tests for the structural invariants: metric axioms, estimate
//! convexity, cap enforcement, monotone descent, one-shot learning,
//! determinism, and scale invariance.

use std::collections::HashSet;

use boundary_forest::scaling::average_curves;
use boundary_forest::{
    artificial_tree_sim, fit_and_select, shepard_estimate, BoundaryForest, BoundaryTree,
    ChildCap, DataPoint, ExampleId, ExampleStore, FitFamily, ForestConfig, LabelMetric,
    LabelVector, Position, PositionMetric, QueryStats, ScalingCurve, TaskMode, TreeConfig,
};
use proptest::prelude::*;

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, dim)
}

fn cap() -> impl Strategy<Value = ChildCap> {
    prop_oneof![(2u32..6).prop_map(ChildCap::Finite), Just(ChildCap::Unbounded)]
}

/// Labeled points with bitwise-distinct positions, so that no two training
/// examples can sit at distance zero with conflicting labels.
fn distinct_labeled_points(
    dim: usize,
    max_len: usize,
) -> impl Strategy<Value = Vec<(Vec<f64>, usize)>> {
    prop::collection::vec((coords(dim), 0usize..3), 1..=max_len).prop_map(|points| {
        let mut seen = HashSet::new();
        points
            .into_iter()
            .filter(|(c, _)| seen.insert(c.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()))
            .collect()
    })
}

fn point(coords: &[f64], class: usize) -> DataPoint {
    DataPoint {
        position: Position::new(coords.to_vec()).unwrap(),
        label: LabelVector::indicator(class, 3).unwrap(),
    }
}

fn classification_forest(trees: usize, cap: ChildCap, seed: u64) -> BoundaryForest {
    BoundaryForest::new(ForestConfig {
        mode: TaskMode::Classification,
        trees,
        cap,
        metric: PositionMetric::Euclidean,
        seed,
    })
    .unwrap()
}

proptest! {
    #[test]
    fn euclidean_is_a_metric(
        a in coords(3),
        b in coords(3),
        c in coords(3),
    ) {
        let metric = PositionMetric::Euclidean;
        let (pa, pb, pc) = (
            Position::new(a).unwrap(),
            Position::new(b).unwrap(),
            Position::new(c).unwrap(),
        );
        let ab = metric.distance(&pa, &pb).unwrap();
        let ba = metric.distance(&pb, &pa).unwrap();
        let ac = metric.distance(&pa, &pc).unwrap();
        let bc = metric.distance(&pb, &pc).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(metric.distance(&pa, &pa).unwrap(), 0.0);
        prop_assert!(ac <= ab + bc + 1e-9 * (1.0 + ab + bc));
    }

    #[test]
    fn store_ids_are_dense_and_stable(points in prop::collection::vec((coords(2), 0usize..3), 1..40)) {
        let mut store = ExampleStore::new();
        for (i, (c, class)) in points.iter().enumerate() {
            let id = store.append(point(c, *class)).unwrap();
            prop_assert_eq!(id, ExampleId(i as u32));
        }
        for (i, (c, class)) in points.iter().enumerate() {
            let kept = store.get(ExampleId(i as u32));
            prop_assert_eq!(kept.position.coords(), c.as_slice());
            prop_assert_eq!(kept.label.argmax(), *class);
        }
    }

    #[test]
    fn shepard_is_a_convex_combination(
        entries in prop::collection::vec(
            (prop::collection::vec(-10.0..10.0f64, 3), 0.0..100.0f64),
            1..8,
        ),
    ) {
        let results: Vec<(LabelVector, f64)> = entries
            .iter()
            .map(|(values, d)| (LabelVector::new(values.clone()).unwrap(), *d))
            .collect();
        let estimate = shepard_estimate(&results).unwrap();
        for coord in 0..3 {
            let lo = entries.iter().map(|(v, _)| v[coord]).fold(f64::INFINITY, f64::min);
            let hi = entries.iter().map(|(v, _)| v[coord]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(estimate.values()[coord] >= lo - 1e-9);
            prop_assert!(estimate.values()[coord] <= hi + 1e-9);
        }
    }

    #[test]
    fn shepard_zero_distances_dominate(
        zero_values in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 1..4),
        far_values in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 0..4),
    ) {
        let mut results = Vec::new();
        for v in &zero_values {
            results.push((LabelVector::new(v.clone()).unwrap(), 0.0));
        }
        for (i, v) in far_values.iter().enumerate() {
            results.push((LabelVector::new(v.clone()).unwrap(), 1.0 + i as f64));
        }
        let estimate = shepard_estimate(&results).unwrap();
        let n = zero_values.len() as f64;
        for coord in 0..2 {
            let mean = zero_values.iter().map(|v| v[coord]).sum::<f64>() / n;
            prop_assert!((estimate.values()[coord] - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn shepard_is_permutation_invariant(
        entries in prop::collection::vec(
            (prop::collection::vec(-10.0..10.0f64, 2), 0.001..100.0f64),
            2..8,
        ).prop_shuffle().prop_flat_map(|shuffled| {
            let mut sorted = shuffled.clone();
            sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
            Just((sorted, shuffled))
        }),
    ) {
        let (sorted, shuffled) = entries;
        let lift = |list: &[(Vec<f64>, f64)]| -> Vec<(LabelVector, f64)> {
            list.iter().map(|(v, d)| (LabelVector::new(v.clone()).unwrap(), *d)).collect()
        };
        let a = shepard_estimate(&lift(&sorted)).unwrap();
        let b = shepard_estimate(&lift(&shuffled)).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn shepard_argmax_survives_power_of_two_rescaling(
        entries in prop::collection::vec((0usize..4, 0.001..100.0f64), 1..8),
        scale in prop::sample::select(vec![0.25f64, 0.5, 2.0, 8.0, 1024.0]),
    ) {
        let raw: Vec<(LabelVector, f64)> = entries
            .iter()
            .map(|&(class, d)| (LabelVector::indicator(class, 4).unwrap(), d))
            .collect();
        let scaled: Vec<(LabelVector, f64)> =
            raw.iter().map(|(l, d)| (l.clone(), d * scale)).collect();
        let a = shepard_estimate(&raw).unwrap();
        let b = shepard_estimate(&scaled).unwrap();
        prop_assert_eq!(a.argmax(), b.argmax());
    }

    #[test]
    fn child_caps_are_respected(
        points in distinct_labeled_points(2, 60),
        cap in cap(),
        trees in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut forest = classification_forest(trees, cap, seed);
        for (c, class) in &points {
            forest.train(point(c, *class)).unwrap();
        }
        for tree in forest.trees() {
            for node in tree.nodes() {
                if let ChildCap::Finite(k) = cap {
                    prop_assert!(node.children.len() <= k as usize);
                }
            }
        }
    }

    #[test]
    fn descent_is_monotone_without_a_cap(
        points in distinct_labeled_points(2, 40),
        query in coords(2),
        seed in any::<u64>(),
    ) {
        let config = TreeConfig { cap: ChildCap::Unbounded, ..TreeConfig::default() };
        let mut tree = BoundaryTree::new(config, seed).unwrap();
        let mut store = ExampleStore::new();
        let mut stats = QueryStats::default();
        let first = store.append(point(&points[0].0, points[0].1)).unwrap();
        tree.set_root(first).unwrap();
        for (c, class) in &points[1..] {
            tree.train(&mut store, &point(c, *class), &mut stats).unwrap();
        }

        let y = Position::new(query).unwrap();
        let path = tree.query_path(&store, &y, 7, &mut stats).unwrap();
        let dist = |node: boundary_forest::NodeId| {
            let example = tree.nodes()[node.index()].example;
            PositionMetric::Euclidean.distance(&store.get(example).position, &y).unwrap()
        };
        for pair in path.windows(2) {
            prop_assert!(dist(pair[1]) <= dist(pair[0]));
        }
    }

    #[test]
    fn descent_from_roomy_nodes_never_moves_farther(
        points in distinct_labeled_points(2, 40),
        query in coords(2),
        k in 2u32..5,
        seed in any::<u64>(),
    ) {
        let config = TreeConfig { cap: ChildCap::Finite(k), ..TreeConfig::default() };
        let mut tree = BoundaryTree::new(config, seed).unwrap();
        let mut store = ExampleStore::new();
        let mut stats = QueryStats::default();
        let first = store.append(point(&points[0].0, points[0].1)).unwrap();
        tree.set_root(first).unwrap();
        for (c, class) in &points[1..] {
            tree.train(&mut store, &point(c, *class), &mut stats).unwrap();
        }

        let y = Position::new(query).unwrap();
        let path = tree.query_path(&store, &y, 11, &mut stats).unwrap();
        let dist = |node: boundary_forest::NodeId| {
            let example = tree.nodes()[node.index()].example;
            PositionMetric::Euclidean.distance(&store.get(example).position, &y).unwrap()
        };
        for pair in path.windows(2) {
            // A full node never competes with its children, so only steps
            // leaving a node with spare capacity are guaranteed monotone.
            if tree.nodes()[pair[0].index()].children.len() < k as usize {
                prop_assert!(dist(pair[1]) <= dist(pair[0]));
            }
        }
    }

    #[test]
    fn training_is_one_shot(
        points in distinct_labeled_points(2, 30).prop_filter("needs a probe", |p| p.len() >= 2),
        cap in cap(),
        trees in 1usize..4,
        seed in any::<u64>(),
    ) {
        let (probe, rest) = points.split_last().unwrap();
        let mut forest = classification_forest(trees, cap, seed);
        for (c, class) in rest {
            forest.train(point(c, *class)).unwrap();
        }
        forest.train(point(&probe.0, probe.1)).unwrap();
        let y = Position::new(probe.0.clone()).unwrap();
        prop_assert_eq!(forest.classify(&y).unwrap(), probe.1);
    }

    #[test]
    fn forests_are_deterministic(
        points in distinct_labeled_points(3, 40),
        queries in prop::collection::vec(coords(3), 1..6),
        cap in cap(),
        trees in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut first = classification_forest(trees, cap, seed);
        let mut second = classification_forest(trees, cap, seed);
        for (c, class) in &points {
            let a = first.train(point(c, *class)).unwrap();
            let b = second.train(point(c, *class)).unwrap();
            prop_assert_eq!(a, b);
        }
        for (ta, tb) in first.trees().iter().zip(second.trees()) {
            prop_assert_eq!(ta.nodes(), tb.nodes());
        }
        for (i, q) in queries.iter().enumerate() {
            let y = Position::new(q.clone()).unwrap();
            let a = first.query_with_nonce(&y, i as u64).unwrap();
            let b = second.query_with_nonce(&y, i as u64).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn power_of_two_rescaling_preserves_structure(
        points in distinct_labeled_points(2, 40),
        scale in prop::sample::select(vec![0.25f64, 0.5, 2.0, 8.0, 1024.0]),
        cap in cap(),
        trees in 1usize..4,
        seed in any::<u64>(),
    ) {
        // Multiplying every coordinate by a power of two rescales all
        // distances exactly, so every comparison made during training comes
        // out identically and the forests must be structurally equal.
        let mut original = classification_forest(trees, cap, seed);
        let mut rescaled = classification_forest(trees, cap, seed);
        for (c, class) in &points {
            let scaled: Vec<f64> = c.iter().map(|v| v * scale).collect();
            let a = original.train(point(c, *class)).unwrap();
            let b = rescaled.train(point(&scaled, *class)).unwrap();
            prop_assert_eq!(a.added, b.added);
        }
        for (ta, tb) in original.trees().iter().zip(rescaled.trees()) {
            prop_assert_eq!(ta.nodes(), tb.nodes());
        }
    }

    #[test]
    fn retrieval_mode_stores_every_example(
        points in prop::collection::vec(coords(2), 1..50),
        cap in cap(),
        trees in 1usize..4,
        seed in any::<u64>(),
    ) {
        prop_assume!(points.len() >= trees);
        let mut forest = BoundaryForest::new(ForestConfig {
            mode: TaskMode::Retrieval,
            trees,
            cap,
            metric: PositionMetric::Euclidean,
            seed,
        })
        .unwrap();
        for c in &points {
            let report = forest.train(point(c, 0)).unwrap();
            if !report.buffered {
                prop_assert!(report.added.iter().all(|&a| a));
            }
        }
        prop_assert_eq!(forest.store().len(), points.len());
        for tree in forest.trees() {
            prop_assert_eq!(tree.len(), points.len());
        }
    }

    #[test]
    fn sim_bookkeeping_holds(
        n in 1u64..2000,
        cap in cap(),
        seed in any::<u64>(),
    ) {
        let sim = artificial_tree_sim(n, cap, seed, &[n]).unwrap();
        prop_assert_eq!(sim.nodes, n + 1);
        prop_assert_eq!(sim.fanout.values().sum::<u64>(), n + 1);
        prop_assert_eq!(sim.curve.last().0, n);
        prop_assert!(sim.curve.last().1 >= 1.0);
        if let ChildCap::Finite(k) = cap {
            prop_assert!(sim.fanout.keys().all(|&q| q <= k as usize));
        }
        prop_assert_eq!(
            artificial_tree_sim(n, cap, seed, &[n]).unwrap().curve,
            sim.curve
        );
    }

    #[test]
    fn query_work_counts_every_visited_node(
        points in distinct_labeled_points(2, 40),
        query in coords(2),
        cap in cap(),
        seed in any::<u64>(),
    ) {
        let config = TreeConfig {
            cap,
            label_metric: LabelMetric::AlwaysFar,
            ..TreeConfig::default()
        };
        let mut tree = BoundaryTree::new(config, seed).unwrap();
        let mut store = ExampleStore::new();
        let mut stats = QueryStats::default();
        let first = store.append(point(&points[0].0, points[0].1)).unwrap();
        tree.set_root(first).unwrap();
        for (c, class) in &points[1..] {
            tree.train(&mut store, &point(c, *class), &mut stats).unwrap();
        }

        let mut qstats = QueryStats::default();
        let y = Position::new(query).unwrap();
        tree.query(&store, &y, &mut qstats).unwrap();
        prop_assert!(qstats.path_length >= 1);
        prop_assert!(qstats.metric_comparisons >= qstats.path_length);
        prop_assert!(qstats.path_length <= tree.len() as u64);
    }

    #[test]
    fn fit_selection_is_symmetric_on_random_curves(
        ys in prop::collection::vec(0.1..1e4f64, 8),
        families in (0usize..4, 0usize..4),
    ) {
        let all = [
            FitFamily::Power,
            FitFamily::Logarithmic,
            FitFamily::Quadratic,
            FitFamily::Linearithmic,
        ];
        let (fa, fb) = (all[families.0], all[families.1]);
        let points: Vec<(u64, f64)> =
            ys.iter().enumerate().map(|(i, &y)| (10 + (i as u64) * 17, y)).collect();
        let curve = ScalingCurve::from_points(points).unwrap();
        let ab = fit_and_select(&curve, fa, fb).unwrap();
        let ba = fit_and_select(&curve, fb, fa).unwrap();
        prop_assert_eq!(ab.winner, ba.winner);
        prop_assert_eq!(ab.rms_ratio, ba.rms_ratio);
        prop_assert_eq!(&ab.a, &ba.b);
        prop_assert_eq!(&ab.b, &ba.a);
    }

    #[test]
    fn averaged_curves_stay_on_the_grid(
        rows in prop::collection::vec(prop::collection::vec(0.5..100.0f64, 5), 1..5),
    ) {
        let curves: Vec<ScalingCurve> = rows
            .iter()
            .map(|ys| {
                ScalingCurve::from_points(
                    ys.iter().enumerate().map(|(i, &y)| ((i as u64 + 1) * 10, y)).collect(),
                )
                .unwrap()
            })
            .collect();
        let mean = average_curves(&curves).unwrap();
        prop_assert_eq!(mean.len(), 5);
        for (i, &(n, y)) in mean.points().iter().enumerate() {
            prop_assert_eq!(n, (i as u64 + 1) * 10);
            let lo = rows.iter().map(|r| r[i]).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|r| r[i]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }
    }
}
