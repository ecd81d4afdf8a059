use proptest::prelude::*;
use rand::Rng;
use sixdma_core::pathplan::{brute_force_match, greedy_match};
use sixdma_core::scenario::trial_rng;
use sixdma_core::Vec3;

fn points<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Minimum total distance by dynamic programming over subsets of destinations.
fn subset_dp(a: &[Vec3], d: &[Vec3]) -> f64 {
    let n = a.len();
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 0..(1usize << n) {
        let i = mask.count_ones() as usize;
        if i >= n || !best[mask].is_finite() {
            continue;
        }
        for j in (0..n).filter(|j| mask & (1 << j) == 0) {
            let next = mask | (1 << j);
            best[next] = best[next].min(best[mask] + a[i].distance(d[j]));
        }
    }
    best[(1 << n) - 1]
}

#[test]
fn brute_force_is_optimal_and_never_beaten_by_greedy() {
    let mut rng = trial_rng(41, 0);
    for _ in 0..1000 {
        let n = rng.random_range(1..8);
        let (a, d) = (points(&mut rng, n), points(&mut rng, n));
        let brute = brute_force_match(&a, &d).unwrap();
        let greedy = greedy_match(&a, &d).unwrap();
        assert!((brute.total - subset_dp(&a, &d)).abs() <= 1e-12);
        assert!(greedy.total >= brute.total - 1e-12);
        let mut seen = brute.assignment.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn separated_clusters_are_matched_exactly() {
    // each antenna has its destination a short hop away; clusters are far apart
    let a: Vec<Vec3> = (0..6).map(|i| Vec3::new(10.0 * i as f64, 0.0, 0.0)).collect();
    let order = [3, 0, 5, 1, 4, 2];
    let d: Vec<Vec3> = order.iter().map(|&i| Vec3::new(10.0 * i as f64 + 0.3, 0.2, 0.0)).collect();
    let greedy = greedy_match(&a, &d).unwrap();
    let brute = brute_force_match(&a, &d).unwrap();
    assert_eq!(greedy.assignment, brute.assignment);
    for (i, &j) in greedy.assignment.iter().enumerate() {
        assert_eq!(order[j], i);
    }
    assert!((greedy.total - 6.0 * 0.13f64.sqrt()).abs() < 1e-12);
}

#[test]
fn mismatched_sizes_are_rejected() {
    let mut rng = trial_rng(42, 0);
    assert!(greedy_match(&points(&mut rng, 3), &points(&mut rng, 4)).is_err());
    assert!(brute_force_match(&[], &[]).is_err());
    assert!(brute_force_match(&points(&mut rng, 10), &points(&mut rng, 10)).is_err());
}

proptest! {
    #[test]
    fn brute_force_is_permutation_equivariant(seed in 0u64..100_000, n in 1usize..7) {
        let mut rng = trial_rng(seed, 0);
        let (a, d) = (points(&mut rng, n), points(&mut rng, n));
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let permuted: Vec<Vec3> = perm.iter().map(|&p| d[p]).collect();
        let base = brute_force_match(&a, &d).unwrap();
        let moved = brute_force_match(&a, &permuted).unwrap();
        prop_assert!((base.total - moved.total).abs() <= 1e-12);
        // with continuous random inputs the optimum is unique
        for (i, &j) in moved.assignment.iter().enumerate() {
            prop_assert_eq!(perm[j], base.assignment[i]);
        }
    }

    #[test]
    fn greedy_distances_sum_to_total(seed in 0u64..100_000, n in 1usize..9) {
        let mut rng = trial_rng(seed, 0);
        let plan = greedy_match(&points(&mut rng, n), &points(&mut rng, n)).unwrap();
        prop_assert!((plan.distances.iter().sum::<f64>() - plan.total).abs() < 1e-12);
    }
}
