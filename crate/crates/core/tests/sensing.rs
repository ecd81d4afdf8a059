use proptest::prelude::*;
use rand::Rng;
use sixdma_core::channel::ula_steering;
use sixdma_core::metrics::sum_rate_beamforming;
use sixdma_core::scenario::trial_rng;
use sixdma_core::sensing::{
    beam_quadratic_form, candidate_beams, crb_doa, max_rotation_gain, ora_solve, rotation_gain, sensing_beam,
    spherical_placement, target_channel_and_derivative, RotatableIsacConfig, SensingScenario, SensingTarget,
};
use sixdma_core::{AntennaPattern, LinkBudget, LocalArray, C64};

fn random_placement<R: Rng>(rng: &mut R, surfaces: usize) -> Vec<sixdma_core::SurfacePose> {
    let pi = std::f64::consts::PI;
    let params: Vec<f64> =
        (0..surfaces).flat_map(|_| [rng.random_range(-pi..pi), rng.random_range(-pi / 2.0..0.0)]).collect();
    spherical_placement(&params, 0.5)
}

fn random_target<R: Rng>(rng: &mut R) -> SensingTarget {
    let pi = std::f64::consts::PI;
    SensingTarget { phi: rng.random_range(-pi..pi), theta: rng.random_range(-1.2..0.3), rho: C64::new(1.0, 0.0) }
}

#[test]
fn channel_derivative_matches_finite_differences() {
    let mut rng = trial_rng(31, 0);
    let array = LocalArray::upa(2, 2, 0.05).unwrap();
    let budget = LinkBudget::new(0.1, 1.0, 1e-10).unwrap();
    let step = 1e-6;
    for pattern in [AntennaPattern::Isotropic, AntennaPattern::three_gpp()] {
        for _ in 0..100 {
            let poses = random_placement(&mut rng, 4);
            let t = random_target(&mut rng);
            let (_, dh) = target_channel_and_derivative(&poses, &array, &pattern, &t, &budget).unwrap();
            let at = |phi: f64| {
                target_channel_and_derivative(&poses, &array, &pattern, &SensingTarget { phi, ..t }, &budget).unwrap().0
            };
            let (hp, hm) = (at(t.phi + step), at(t.phi - step));
            let fd: Vec<C64> = hp.iter().zip(&hm).map(|(a, b)| (a - b) / (2.0 * step)).collect();
            let err: f64 = dh.iter().zip(&fd).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let scale: f64 = dh.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(err <= 1e-5 * scale, "relative error {}", err / scale);
        }
    }
}

#[test]
fn crb_scales_inversely_with_power_and_frames() {
    let mut rng = trial_rng(32, 0);
    let array = LocalArray::upa(2, 2, 0.05).unwrap();
    let pattern = AntennaPattern::three_gpp();
    let budget = LinkBudget::new(0.1, 1.0, 1e-10).unwrap();
    for _ in 0..50 {
        let poses = random_placement(&mut rng, 4);
        let targets: Vec<SensingTarget> = (0..3).map(|_| random_target(&mut rng)).collect();
        let crb = |power: f64, frames: usize| {
            let sc =
                SensingScenario::new(targets.clone(), SensingScenario::isotropic_signal(16, power), frames).unwrap();
            crb_doa(&poses, &array, &pattern, &sc, &budget).unwrap()
        };
        let base = crb(1.0, 16);
        let c = rng.random_range(0.1..100.0);
        assert!((crb(c, 16) * c / base - 1.0).abs() < 1e-12);
        assert!((crb(1.0, 64) * 4.0 / base - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_form_rotation_gain_matches_dense_search() {
    let mut rng = trial_rng(33, 0);
    let pi = std::f64::consts::PI;
    let mut checked = 0;
    while checked < 50 {
        let m = rng.random_range(2..12);
        let (g0, g1) = (rng.random_range(-pi / 2.0..pi / 2.0), rng.random_range(-pi / 2.0..pi / 2.0));
        let closed = max_rotation_gain(g0, g1, m);
        // near-nulls of the reference correlation make the ratio unbounded
        if closed.degenerate || !closed.value.is_finite() || closed.value > 1e3 {
            continue;
        }
        let dense = (0..=100_000)
            .map(|i| -pi + 2.0 * pi * i as f64 / 100_000.0)
            .map(|g| rotation_gain(g, g0, g1, m, 0.5))
            .fold(0.0, f64::max);
        assert!((closed.value - dense).abs() <= 1e-3 * dense, "m={m} g0={g0} g1={g1}: {} vs {dense}", closed.value);
        assert!((rotation_gain(closed.gamma, g0, g1, m, 0.5) - closed.value).abs() <= 1e-9 * closed.value);
        checked += 1;
    }
}

fn isac(w_comm: f64, target: f64) -> RotatableIsacConfig {
    RotatableIsacConfig {
        m_t: 8,
        m_r: 8,
        snapshots: 32,
        snr: 10.0,
        spacing: 0.5,
        wavelength: 0.1,
        target_angle: target,
        users: vec![
            vec![(-0.6, C64::new(1.0, 0.0)), (0.3, C64::new(0.4, -0.3))],
            vec![(0.9, C64::new(0.8, 0.2)), (-0.2, C64::new(0.2, 0.5))],
        ],
        w_comm,
        w_sense: 1.0 - w_comm,
        p_max: 1.0,
        noise_power: 0.01,
        gamma_bounds: [-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
        grid_steps: 180,
    }
}

fn grid(cfg: &RotatableIsacConfig) -> Vec<f64> {
    let [lo, hi] = cfg.gamma_bounds;
    (0..=cfg.grid_steps).map(|i| lo + (hi - lo) * i as f64 / cfg.grid_steps as f64).collect()
}

#[test]
fn sensing_only_weight_reaches_the_beam_bound() {
    for target in [-1.0, -0.3, 0.0, 0.4, 1.2] {
        let cfg = isac(0.0, target);
        let sol = ora_solve(&cfg).unwrap();
        let best = grid(&cfg).iter().map(|g| (target + g).cos().powi(2)).fold(0.0, f64::max);
        let bound = cfg.p_max * cfg.m_t as f64 * best;
        assert!((sol.f_s - bound).abs() <= 1e-12 * bound);
    }
}

#[test]
fn joint_search_dominates_every_evaluated_option() {
    let budget = LinkBudget::new(0.1, 1.0, 0.01).unwrap();
    for w in [0.0, 0.3, 0.7, 1.0] {
        let cfg = isac(w, 0.5);
        let sol = ora_solve(&cfg).unwrap();
        for g in grid(&cfg).into_iter().step_by(15) {
            let h = cfg.user_channels(g);
            for beams in candidate_beams(g, &cfg) {
                let f_c = sum_rate_beamforming(&h, &beams, &budget).unwrap();
                let f_s = sixdma_core::sensing::sensing_metric(g, &beams, &cfg);
                assert!(w * f_c + (1.0 - w) * f_s <= sol.objective + 1e-9);
            }
        }
    }
    let comm = ora_solve(&isac(1.0, 0.5)).unwrap();
    let sense = ora_solve(&isac(0.0, 0.5)).unwrap();
    assert!(comm.f_c >= sense.f_c);
    assert!(sense.f_s >= comm.f_s);
}

proptest! {
    #[test]
    fn sensing_beam_quadratic_form_is_full_power(m in 1usize..16, target in -1.5f64..1.5, gamma in -1.5f64..1.5, p in 0.01f64..10.0) {
        let cfg = RotatableIsacConfig { m_t: m, p_max: p, target_angle: target, ..isac(0.5, 0.0) };
        let w = sensing_beam(gamma, &cfg, 2);
        let a = ula_steering(m, 0.5, target + gamma);
        prop_assert!((beam_quadratic_form(&a, &w) - p * m as f64).abs() <= 1e-12 * p * m as f64);
    }
}
