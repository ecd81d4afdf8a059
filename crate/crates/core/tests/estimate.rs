use proptest::prelude::*;
use rand::Rng;
use sixdma_core::channel::directional_gain;
use sixdma_core::estimate::{
    mle_power_estimate, nmse, reconstruct_statistics, simulate_pilot_rx, sparsity_aided_ls, threshold_sparsity,
    MleConfig, PilotConfig,
};
use sixdma_core::geometry::fibonacci_sphere;
use sixdma_core::scenario::{complex_normal, trial_rng};
use sixdma_core::{AntennaPattern, CMatrix, LocalArray, RotationAngles, C64};

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng, 1.0))
}

#[test]
fn single_pilot_single_user_closed_form() {
    let mut rng = trial_rng(21, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..32);
        let sigma2 = rng.random_range(0.01..2.0);
        let x = random_matrix(&mut rng, 1, 1);
        let y = random_matrix(&mut rng, 1, n).scaled(rng.random_range(0.1..3.0));
        let y2: f64 = y.as_slice().iter().map(|v| v.norm_sqr()).sum();
        let expected = ((y2 / n as f64 - sigma2) / x[(0, 0)].norm_sqr()).max(0.0);
        let eta = mle_power_estimate(&y, &x, sigma2, &MleConfig::default()).unwrap().eta[0];
        assert!((eta - expected).abs() <= 1e-10 * expected.max(1.0), "{eta} vs {expected}");
    }
}

#[test]
fn objective_never_increases() {
    let mut rng = trial_rng(22, 0);
    let cfg = MleConfig { record_trace: true, ..MleConfig::default() };
    for _ in 0..100 {
        let (l, k, n) = (rng.random_range(2..10), rng.random_range(1..10), rng.random_range(1..40));
        let x = random_matrix(&mut rng, l, k);
        let y = random_matrix(&mut rng, l, n);
        let out = mle_power_estimate(&y, &x, rng.random_range(0.05..1.0), &cfg).unwrap();
        assert!(out.eta.iter().all(|&e| e >= 0.0));
        for w in out.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn large_sample_recovers_powers() {
    let mut rng = trial_rng(23, 0);
    let (l, k, n) = (8, 4, 4000);
    let x = PilotConfig::generate(l, k, 5).unwrap().matrix().clone();
    let truth = [2.0, 0.0, 0.5, 1.0];
    let h = CMatrix::from_fn(n, k, |_, u| complex_normal(&mut rng, truth[u]));
    let y = simulate_pilot_rx(&h, &[true; 4], &x, 0.1, &mut rng).unwrap();
    let eta = mle_power_estimate(&y, &x, 0.1, &MleConfig::default()).unwrap().eta;
    for (e, t) in eta.iter().zip(truth) {
        assert!((e - t).abs() < 0.15 * t.max(0.5), "{eta:?}");
    }
}

#[test]
fn reconstruction_recovers_grid_doas_exactly() {
    let array = LocalArray::upa(2, 2, 0.05).unwrap();
    let pattern = AntennaPattern::three_gpp();
    let n = array.len() as f64;
    let facing = |count| -> Vec<RotationAngles> {
        fibonacci_sphere(count, false).into_iter().map(|d| RotationAngles::facing(d, 0.0)).collect()
    };
    let sampled = facing(48);
    let candidates = facing(200);
    let grid = fibonacci_sphere::<f64>(128, false);
    let mut rng = trial_rng(24, 0);
    for _ in 0..20 {
        let users: Vec<(usize, f64)> =
            (0..5).map(|_| (rng.random_range(0..grid.len()), rng.random_range(0.5..2.0))).collect();
        let model = |poses: &[RotationAngles]| -> Vec<Vec<f64>> {
            poses
                .iter()
                .map(|&u| users.iter().map(|&(g, s)| n * directional_gain(&pattern, u, grid[g]) * s).collect())
                .collect()
        };
        let stats = threshold_sparsity(model(&sampled), 0.0).unwrap();
        let rec = reconstruct_statistics(&stats, &sampled, &candidates, &array, &pattern, grid.len()).unwrap();
        for (k, &(g, s)) in users.iter().enumerate() {
            assert!((rec.s[k] - s).abs() < 1e-10 * s);
            assert!((rec.f[k].unwrap() - grid[g]).norm() < 1e-12);
        }
        let want = model(&candidates);
        for (row, w) in rec.p_hat.iter().zip(&want) {
            for (a, b) in row.iter().zip(w) {
                assert!((a - b).abs() <= 1e-10 * b);
            }
        }
    }
}

#[test]
fn noiseless_sparse_ls_is_exact() {
    let mut rng = trial_rng(25, 0);
    for _ in 0..100 {
        let (l, k, n) = (rng.random_range(2..9), rng.random_range(2..9), rng.random_range(1..6));
        let z: Vec<bool> = (0..k).map(|_| rng.random_bool(0.4)).collect();
        if z.iter().filter(|&&v| v).count() > l || !z.contains(&true) {
            continue;
        }
        let x = random_matrix(&mut rng, l, k);
        let h = random_matrix(&mut rng, n, k);
        let y = simulate_pilot_rx(&h, &z, &x, 0.0, &mut rng).unwrap();
        let est = sparsity_aided_ls(&y, &x, &z).unwrap();
        let truth: Vec<C64> = (0..k)
            .flat_map(|u| (0..n).map(move |a| (u, a)))
            .map(|(u, a)| if z[u] { h[(a, u)] } else { C64::new(0.0, 0.0) })
            .collect();
        assert!(nmse(&est, &truth).unwrap() < 1e-18);
    }
}

proptest! {
    #[test]
    fn unflagged_users_stay_zero(seed in 0u64..10_000, mask in prop::collection::vec(any::<bool>(), 6)) {
        let mut rng = trial_rng(seed, 0);
        let x = random_matrix(&mut rng, 4, 6);
        let y = random_matrix(&mut rng, 4, 3);
        let est = sparsity_aided_ls(&y, &x, &mask).unwrap();
        for (u, &on) in mask.iter().enumerate() {
            if !on {
                prop_assert!(est[u * 3..(u + 1) * 3].iter().all(|v| *v == C64::new(0.0, 0.0)));
            }
        }
    }

    #[test]
    fn nmse_is_scale_invariant(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let mut rng = trial_rng(seed, 0);
        let a: Vec<C64> = (0..8).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let b: Vec<C64> = (0..8).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let e1 = nmse(&a, &b).unwrap();
        let e2 = nmse(&a.iter().map(|v| v * c).collect::<Vec<_>>(), &b.iter().map(|v| v * c).collect::<Vec<_>>()).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-12 * e1.max(1.0));
    }

    #[test]
    fn threshold_flags_match_definition(p in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..5), t in 0.0f64..1.0) {
        let stats = threshold_sparsity(p.clone(), t).unwrap();
        for (row, zrow) in p.iter().zip(&stats.z) {
            for (v, z) in row.iter().zip(zrow) {
                prop_assert_eq!(*z, *v > t);
            }
        }
    }
}
