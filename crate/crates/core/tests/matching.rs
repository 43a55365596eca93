mod common;

use common::oracle;
use hullmatch::clustering::{MmcConfig, Partition, SplitConfig, SplitMethod};
use hullmatch::matching::{
    arc_assign, arc_distance, ccp_distance, classify, nn_distance, single_hull_distance, ClusterSpec, Comparison,
    LocalHullModel, MatchConfig,
};
use hullmatch::{HullKind, PointSet, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLACK: f64 = 1e-8;

fn rows(rng: &mut ChaCha8Rng, n: usize, d: usize, offset: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0) + offset).collect())
        .collect()
}

fn set(id: &str, rows: Vec<Vec<f64>>) -> PointSet {
    PointSet::new(id, None, rows).unwrap()
}

fn fixed(k: usize, seed: u64) -> ClusterSpec {
    ClusterSpec::Fixed {
        k,
        method: SplitMethod::Mmc,
        mmc: MmcConfig::default(),
        seed,
    }
}

#[test]
fn distance_orderings_hold() {
    let solver = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..100u64 {
        let d = rng.random_range(2..=6);
        let (m, n) = (rng.random_range(6..=14), rng.random_range(6..=14));
        let shift = rng.random_range(0.0..3.0);
        let a = set("a", rows(&mut rng, m, d, 0.0));
        let b = set("b", rows(&mut rng, n, d, shift));
        let nn = nn_distance(&a, &b).unwrap().value;
        let affine = single_hull_distance(&a, &b, HullKind::Affine, &solver).unwrap().value;
        let convex = single_hull_distance(&a, &b, HullKind::Convex, &solver).unwrap().value;
        assert!(
            affine <= convex + SLACK,
            "case {case}: affine {affine} > convex {convex}"
        );
        assert!(convex <= nn + SLACK, "case {case}: convex {convex} > nn {nn}");
        for (kind, single) in [(HullKind::Affine, affine), (HullKind::Convex, convex)] {
            let spec = fixed(1 + (case as usize % 3), case);
            let ma = LocalHullModel::build(a.clone(), &spec, kind).unwrap();
            let mb = LocalHullModel::build(b.clone(), &spec, kind).unwrap();
            let ccp = ccp_distance(&ma, &mb, &solver).unwrap().value;
            let arc = arc_distance(&ma, &b, &solver, true).unwrap().value;
            assert!(single <= ccp + SLACK, "case {case} {kind}: single {single} > ccp {ccp}");
            assert!(single <= arc + SLACK, "case {case} {kind}: single {single} > arc {arc}");
        }
    }
}

#[test]
fn one_reference_cluster_reduces_to_single_hull() {
    let solver = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..50 {
        let d = rng.random_range(2..=5);
        let m = rng.random_range(4..=12);
        let n = rng.random_range(2..=m);
        let a = set("a", rows(&mut rng, m, d, 0.0));
        let shift = rng.random_range(0.0..2.0);
        let b = set("b", rows(&mut rng, n, d, shift));
        for kind in [HullKind::Convex, HullKind::Affine] {
            let model = LocalHullModel::single(a.clone(), kind);
            let arc = arc_distance(&model, &b, &solver, true).unwrap().value;
            let single = single_hull_distance(&a, &b, kind, &solver).unwrap().value;
            assert_eq!(arc.to_bits(), single.to_bits(), "case {case} {kind}");
        }
    }
}

/// Reference assignment computed with the grid oracle for every
/// point-to-hull distance.
#[test]
fn top_m_assignment_matches_oracle() {
    let solver = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for _ in 0..40 {
        let mut q = rows(&mut rng, 3, 2, 0.0);
        q.extend(rows(&mut rng, 3, 2, 3.0));
        let g = rows(&mut rng, 10, 2, 1.5);
        let partition = Partition::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let clusters = [&q[0..3], &q[3..6]];
        let dist: Vec<[f64; 2]> = g
            .iter()
            .map(|p| [0, 1].map(|k| oracle::convex_distance_grid(std::slice::from_ref(p), clusters[k])))
            .collect();
        let mut all: Vec<f64> = dist.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        if all.windows(2).any(|w| w[1] - w[0] < 1e-3 && w[1] > 1e-6) {
            continue;
        }
        checked += 1;
        let nearest: Vec<usize> = dist.iter().map(|d| usize::from(d[1] < d[0])).collect();
        let mut expected = vec![Vec::new(), Vec::new()];
        for k in 0..2 {
            let mut members: Vec<usize> = (0..g.len()).filter(|&i| nearest[i] == k).collect();
            members.sort_by(|&a, &b| dist[a][k].total_cmp(&dist[b][k]).then(a.cmp(&b)));
            members.truncate(3);
            members.sort_unstable();
            expected[k] = members;
        }
        let model = LocalHullModel::new(set("q", q), partition, HullKind::Convex).unwrap();
        let g = set("g", g);
        let got = arc_assign(&model, &g, &solver, true).unwrap();
        assert_eq!(got.nearest, nearest);
        assert_eq!(got.clusters, expected);
        let everything = arc_assign(&model, &g, &solver, false).unwrap();
        for k in 0..2 {
            let want: Vec<usize> = (0..g.len()).filter(|&i| nearest[i] == k).collect();
            assert_eq!(everything.clusters[k], want);
        }
    }
    assert!(checked >= 10, "only {checked} unambiguous instances");
}

#[test]
fn noisy_reference_cluster_without_samples_contributes_nothing() {
    let solver = SolverConfig::default();
    let clean = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    let noisy = vec![vec![40.0, 40.0], vec![41.0, 40.0], vec![40.0, 41.0]];
    let mut q = clean.clone();
    q.extend(noisy);
    let partition = Partition::new(vec![0, 0, 0, 0, 1, 1, 1], 2).unwrap();
    let model = LocalHullModel::new(set("q", q), partition, HullKind::Convex).unwrap();
    let gallery = vec![vec![3.0, 0.5], vec![3.5, 0.0], vec![4.0, 1.0]];
    let r = arc_distance(&model, &set("g", gallery.clone()), &solver, true).unwrap();
    let want = oracle::convex_distance_grid(&clean, &gallery);
    assert!(oracle::close_rel(r.value, want, 1e-6, 1e-3), "{} vs {want}", r.value);
    assert_eq!(r.best_pair, (0, 0));
    let per_pair = r.per_pair.unwrap();
    assert_eq!(per_pair[1][1], None);
    assert!(r.assignment.unwrap().clusters[1].is_empty());
}

#[test]
fn classification_ignores_gallery_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gallery: Vec<PointSet> = (0..6)
        .map(|i| {
            PointSet::new(
                format!("g{i}"),
                Some(format!("c{i}")),
                rows(&mut rng, 12, 4, i as f64 * 1.5),
            )
            .unwrap()
        })
        .collect();
    let query = set("q", rows(&mut rng, 12, 4, 3.2));
    for comparison in Comparison::ALL {
        let cfg = MatchConfig {
            comparison,
            clustering: ClusterSpec::Adaptive(SplitConfig {
                ammd_threshold: 0.8,
                ..SplitConfig::default()
            }),
            ..MatchConfig::default()
        };
        let forward = classify(&query, &gallery, &cfg).unwrap();
        let mut reversed_gallery = gallery.clone();
        reversed_gallery.reverse();
        let reversed = classify(&query, &reversed_gallery, &cfg).unwrap();
        assert_eq!(forward.predicted_label, reversed.predicted_label, "{comparison}");
        assert_eq!(forward.distance, reversed.distance, "{comparison}");
    }
}
