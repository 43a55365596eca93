mod common;

use common::oracle;
use hullmatch::clustering::{
    adaptive_split, ammd, fixed_split, kmeans, kmeans_detailed, mmc_bipartition, train_linear_svm, MmcConfig,
    Partition, SplitConfig, SplitMethod,
};
use hullmatch::PointSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn set(rows: Vec<Vec<f64>>) -> PointSet {
    PointSet::new("t", None, rows).unwrap()
}

fn check_cover(p: &Partition, n: usize) {
    assert_eq!(p.len(), n);
    assert!(p.labels().iter().all(|&l| l < p.k()));
    let mut seen = vec![0; n];
    for c in p.clusters() {
        for i in c {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&s| s == 1));
}

fn blobs(rng: &mut ChaCha8Rng, centers: &[[f64; 2]], per: usize, sigma: f64) -> (PointSet, Vec<usize>) {
    let g = Normal::new(0.0, sigma).unwrap();
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for (c, ctr) in centers.iter().enumerate() {
        for _ in 0..per {
            pts.push(vec![ctr[0] + g.sample(rng), ctr[1] + g.sample(rng)]);
            truth.push(c);
        }
    }
    (set(pts), truth)
}

fn sse(pts: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = pts[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = pts
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..d)
            .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
            .sum::<f64>();
    }
    total
}

/// Lloyd fixpoint: every point is (weakly) nearest to its own cluster mean.
fn is_lloyd_fixpoint(pts: &[Vec<f64>], labels: &[usize], k: usize) -> bool {
    let d = pts[0].len();
    let means: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let m: Vec<&Vec<f64>> = pts
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            (0..d)
                .map(|j| m.iter().map(|p| p[j]).sum::<f64>() / m.len() as f64)
                .collect()
        })
        .collect();
    pts.iter().zip(labels).all(|(p, &l)| {
        let dl: f64 = p.iter().zip(&means[l]).map(|(x, m)| (x - m) * (x - m)).sum();
        means
            .iter()
            .all(|m| p.iter().zip(m).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() >= dl - 1e-12)
    })
}

#[test]
fn kmeans_against_exhaustive_two_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut optimal = 0;
    let trials = 200;
    for t in 0..trials {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << 5) {
            let labels: Vec<usize> = (0..6).map(|i| ((mask << 1) >> i & 1) as usize).collect();
            best = best.min(sse(&pts, &labels, 2));
        }
        let r = kmeans_detailed(&set(pts.clone()), 2, t).unwrap();
        check_cover(&r.partition, 6);
        assert!((r.objective - sse(&pts, r.partition.labels(), 2)).abs() < 1e-12);
        assert!(r.objective >= best - 1e-12);
        if r.objective <= best + 1e-12 {
            optimal += 1;
        } else {
            // A single seeded Lloyd run may stop in a local optimum; it must
            // then be a genuine fixpoint.
            assert!(
                r.converged && is_lloyd_fixpoint(&pts, r.partition.labels(), 2),
                "trial {t}"
            );
        }
    }
    assert!(optimal * 2 >= trials, "optimal in {optimal}/{trials}");
}

#[test]
fn mmc_matches_max_hull_separation_labeling() {
    let pts = vec![vec![-1.0, 0.0], vec![-1.1, 0.0], vec![1.0, 0.0], vec![1.1, 0.0]];
    // Hard margin = half the distance between the two class hulls; search
    // all balanced labelings for the widest one.
    let mut best = (f64::NEG_INFINITY, 0u32);
    for mask in 0u32..16 {
        if mask.count_ones() != 2 {
            continue;
        }
        let (a, b): (Vec<_>, Vec<_>) = (0..4).partition(|&i| mask >> i & 1 == 1);
        let ra: Vec<Vec<f64>> = a.iter().map(|&i| pts[i].clone()).collect();
        let rb: Vec<Vec<f64>> = b.iter().map(|&i| pts[i].clone()).collect();
        let sep = oracle::convex_distance_grid(&ra, &rb);
        if sep > best.0 + 1e-9 {
            best = (sep, mask);
        }
    }
    let cfg = MmcConfig {
        balance: Some(0),
        c_penalty: 100.0,
        ..MmcConfig::default()
    };
    let r = mmc_bipartition(&set(pts), &cfg).unwrap();
    let got: Vec<bool> = r
        .partition
        .labels()
        .iter()
        .map(|&l| l == r.partition.labels()[0])
        .collect();
    let want: Vec<bool> = (0..4).map(|i| (best.1 >> i & 1) == (best.1 & 1)).collect();
    assert_eq!(got, want);
    assert!(
        (r.margin - best.0 / 2.0).abs() < 1e-6,
        "{} vs {}",
        r.margin,
        best.0 / 2.0
    );
}

#[test]
fn mmc_improves_on_kmeans_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..50 {
        let tilt = rng.random_range(-3.0..3.0);
        let (pts, _) = blobs(&mut rng, &[[0.0, 0.0], [6.0, tilt]], 4, 0.7);
        let cfg = MmcConfig {
            balance: Some(2),
            seed: t,
            ..MmcConfig::default()
        };
        let r = mmc_bipartition(&pts, &cfg).unwrap();
        let km = kmeans(&pts, 2, hullmatch::seed::derive(t, 0)).unwrap();
        let y: Vec<i8> = km.labels().iter().map(|&l| if l == 0 { 1 } else { -1 }).collect();
        let base = train_linear_svm(&pts, &y, cfg.c_penalty, cfg.svm_tolerance).unwrap();
        assert!((r.restarts[0].init_margin - base.margin).abs() < 1e-9);
        // Compared at the SVM's own KKT tolerance.
        assert!(
            r.margin >= base.margin * (1.0 - cfg.svm_tolerance),
            "trial {t}: {} < {}",
            r.margin,
            base.margin
        );
        assert!(r.objective <= base.objective + 1e-9);
    }
}

#[test]
fn two_far_blobs_split_by_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (pts, truth) = blobs(&mut rng, &[[0.0, 0.0], [100.0, 0.0]], 20, 1.0);
    let cfg = SplitConfig {
        ammd_threshold: 5.0,
        ..SplitConfig::default()
    };
    for method in [SplitMethod::Mmc, SplitMethod::KMeans] {
        let p = adaptive_split(&pts, &SplitConfig { method, ..cfg.clone() }).unwrap();
        assert_eq!(p.k(), 2, "{method}");
        for (i, &l) in p.labels().iter().enumerate() {
            assert_eq!(l, truth[i], "{method}");
        }
        for c in p.clusters() {
            assert!(ammd(&pts.subset(&c).unwrap()).unwrap().ammd < 5.0);
        }
    }
}

#[test]
fn fixed_four_on_two_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (pts, _) = blobs(&mut rng, &[[0.0, 0.0], [10.0, 0.0]], 15, 1.0);
    for method in [SplitMethod::Mmc, SplitMethod::KMeans] {
        let p = fixed_split(&pts, 4, method, &MmcConfig::default(), 3).unwrap();
        assert_eq!(p.k(), 4);
        check_cover(&p, pts.len());
        assert!(p.sizes().iter().all(|&s| s > 0), "{method}");
        assert_eq!(fixed_split(&pts, 1, method, &MmcConfig::default(), 3).unwrap().k(), 1);
    }
}

#[test]
fn infinite_threshold_keeps_one_cluster() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (pts, _) = blobs(&mut rng, &[[0.0, 0.0], [50.0, 0.0]], 10, 1.0);
    let cfg = SplitConfig {
        ammd_threshold: f64::INFINITY,
        min_cluster_size: 1,
        ..SplitConfig::default()
    };
    assert_eq!(adaptive_split(&pts, &cfg).unwrap().k(), 1);
}

fn ammd_brute(pts: &[Vec<f64>]) -> f64 {
    let n = pts.len();
    let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut total = 0.0;
    for i in 0..n {
        let far = (0..n).fold(0, |f, j| {
            if d2(&pts[i], &pts[j]) > d2(&pts[i], &pts[f]) {
                j
            } else {
                f
            }
        });
        let mid: Vec<f64> = pts[i].iter().zip(&pts[far]).map(|(a, b)| (a + b) / 2.0).collect();
        total += pts.iter().map(|p| d2(&mid, p).sqrt()).fold(f64::INFINITY, f64::min);
    }
    total / n as f64
}

fn cloud() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..4).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), 2..14))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ammd_matches_brute_force(pts in cloud()) {
        let r = ammd(&set(pts.clone())).unwrap();
        prop_assert!((r.ammd - ammd_brute(&pts)).abs() <= 1e-12 * (1.0 + r.ammd));
        prop_assert!(r.deltas.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn ammd_permutation_invariant(pts in cloud(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = ammd(&set(pts)).unwrap();
        let b = ammd(&set(shuffled)).unwrap();
        let mut da = a.deltas.clone();
        let mut db = b.deltas.clone();
        da.sort_by(f64::total_cmp);
        db.sort_by(f64::total_cmp);
        for (x, y) in da.iter().zip(&db) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x));
        }
        prop_assert!((a.ammd - b.ammd).abs() <= 1e-12 * (1.0 + a.ammd));
    }

    #[test]
    fn ammd_scale_equivariant(pts in cloud(), s in 0.01f64..100.0) {
        let base = ammd(&set(pts.clone())).unwrap().ammd;
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| x * s).collect()).collect();
        let got = ammd(&set(scaled)).unwrap().ammd;
        prop_assert!((got - s * base).abs() <= 1e-12 * s * (1.0 + base));
        // Powers of two scale without rounding.
        let twice: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| x * 4.0).collect()).collect();
        prop_assert_eq!(ammd(&set(twice)).unwrap().ammd, 4.0 * base);
    }

    #[test]
    fn mmc_trace_monotone_and_balanced(pts in cloud(), seed in any::<u64>(), balance in prop::option::of(0usize..6)) {
        let n = pts.len();
        let cfg = MmcConfig { seed, balance, ..MmcConfig::default() };
        let r = mmc_bipartition(&set(pts), &cfg).unwrap();
        check_cover(&r.partition, n);
        if !r.degenerate {
            for run in &r.restarts {
                for w in run.objective_trace.windows(2) {
                    prop_assert!(w[1] <= w[0], "{:?}", run.objective_trace);
                }
            }
            let pos = r.partition.labels().iter().filter(|&&l| l == 0).count() as i64;
            let imbalance = (2 * pos - n as i64).unsigned_abs() as usize;
            prop_assert!(imbalance <= cfg.effective_balance(n));
            prop_assert!(pos > 0 && (pos as usize) < n);
            let best = r.restarts.iter().map(|t| t.final_objective).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(r.objective, best);
        }
    }

    #[test]
    fn adaptive_split_postcondition(seed in any::<u64>(), thd in 0.2f64..4.0, min_size in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..4);
        let centers: Vec<[f64; 2]> = (0..k).map(|_| [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)]).collect();
        let (pts, _) = blobs(&mut rng, &centers, 12, 1.5);
        let cfg = SplitConfig { ammd_threshold: thd, min_cluster_size: min_size, seed, ..SplitConfig::default() };
        let p = adaptive_split(&pts, &cfg).unwrap();
        check_cover(&p, pts.len());
        for c in p.clusters() {
            prop_assert!(!c.is_empty());
            let spread = ammd(&pts.subset(&c).unwrap()).unwrap().ammd;
            prop_assert!(spread < thd || c.len() <= min_size, "cluster of {} has ammd {}", c.len(), spread);
        }
        prop_assert_eq!(adaptive_split(&pts, &cfg).unwrap(), p);
    }

    #[test]
    fn kmeans_deterministic_cover(pts in cloud(), k in 1usize..4, seed in any::<u64>()) {
        let s = set(pts);
        let k = k.min(s.len());
        let a = kmeans(&s, k, seed).unwrap();
        check_cover(&a, s.len());
        prop_assert_eq!(a, kmeans(&s, k, seed).unwrap());
    }
}
