use proptest::prelude::*;
use rand::Rng;
use sixdma_core::channel::{
    directional_gain, positionable_channel, rotatable_channel_1d, surface_channel, ula_steering, SpatialPath,
};
use sixdma_core::geometry::pointing_vector;
use sixdma_core::scenario::trial_rng;
use sixdma_core::{
    AntennaPattern, LinkBudget, LocalArray, PathComponent, RotationAngles, SurfacePose, UserChannelSpec, Vec3, C64,
};

fn random_user<R: Rng>(rng: &mut R, paths: usize) -> UserChannelSpec {
    let pi = std::f64::consts::PI;
    UserChannelSpec::new(
        (0..paths)
            .map(|_| {
                let g = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                PathComponent::new(g, rng.random_range(-pi / 2.0..pi / 2.0), rng.random_range(-pi..pi)).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn single_isotropic_antenna_matches_positionable_model() {
    let mut rng = trial_rng(11, 0);
    let pi = std::f64::consts::PI;
    let budget = LinkBudget::new(0.1, 1.0, 1e-9).unwrap();
    let array = LocalArray::single();
    for _ in 0..500 {
        let paths = rng.random_range(1..6);
        let user = random_user(&mut rng, paths);
        let b = rng.random_range(1..5);
        let poses: Vec<SurfacePose> = (0..b)
            .map(|_| {
                let q =
                    Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let u = RotationAngles::new(
                    rng.random_range(-pi..pi),
                    rng.random_range(-pi..pi),
                    rng.random_range(-pi..pi),
                );
                SurfacePose::new(q, u)
            })
            .collect();
        let per_surface: Vec<C64> =
            poses.iter().flat_map(|p| surface_channel(p, &array, &AntennaPattern::Isotropic, &user, &budget)).collect();
        let positions: Vec<_> = poses.iter().map(|p| p.position).collect();
        let moved = positionable_channel(&positions, &user, &budget);
        assert!(max_diff(&per_surface, &moved) <= 1e-12);

        // written out directly
        let k = std::f64::consts::TAU / 0.1;
        let direct: Vec<C64> = positions
            .iter()
            .map(|q| {
                user.paths()
                    .iter()
                    .map(|p| {
                        let f = pointing_vector(p.theta, p.phi).unwrap();
                        p.gain * C64::from_polar(1.0, -k * (f.x * q.x + f.y * q.y + f.z * q.z))
                    })
                    .sum()
            })
            .collect();
        assert!(max_diff(&moved, &direct) <= 1e-12);
    }
}

#[test]
fn unrotated_array_is_a_fixed_ula() {
    let mut rng = trial_rng(12, 0);
    let pi = std::f64::consts::PI;
    for _ in 0..500 {
        let m = rng.random_range(1..17);
        let paths: Vec<SpatialPath<f64>> = (0..rng.random_range(1..5))
            .map(|_| SpatialPath {
                angle: rng.random_range(-pi / 2.0..pi / 2.0),
                gain: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            })
            .collect();
        let h = rotatable_channel_1d(0.0, &paths, m);
        let half = (m as f64 - 1.0) / 2.0;
        let ula: Vec<C64> = (0..m)
            .map(|n| paths.iter().map(|p| p.gain * C64::from_polar(1.0, pi * (n as f64 - half) * p.angle.sin())).sum())
            .collect();
        assert!(max_diff(&h, &ula) <= 1e-12);
    }
}

#[test]
fn boresight_gain_is_the_peak() {
    let p = AntennaPattern::three_gpp();
    let g = directional_gain(&p, RotationAngles::zero(), Vec3::new(1.0, 0.0, 0.0));
    assert!((10.0 * g.log10() - 8.0).abs() < 1e-9);
    // directly behind the surface: pattern floor
    let back = directional_gain(&p, RotationAngles::zero(), Vec3::new(-1.0, 0.0, 0.0));
    assert!((10.0 * back.log10() - (8.0 - 25.0)).abs() < 1e-9);
}

proptest! {
    #[test]
    fn ula_entries_have_unit_modulus(m in 1usize..32, d in 0.1f64..2.0, a in -3.2f64..3.2) {
        for v in ula_steering(m, d, a) {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_gain_is_bounded(theta in -1.5f64..1.5, phi in -3.1f64..3.1, a in -3.1f64..3.1, b in -1.5f64..1.5) {
        let p = AntennaPattern::three_gpp();
        let g = directional_gain(&p, RotationAngles::new(a, b, 0.0), pointing_vector(theta, phi).unwrap());
        let db = 10.0 * g.log10();
        prop_assert!((-17.0 - 1e-9..=8.0 + 1e-9).contains(&db));
    }

    #[test]
    fn channel_is_linear_in_path_gains(scale in 0.1f64..10.0, theta in -1.5f64..1.5, phi in -3.1f64..3.1) {
        let budget = LinkBudget::new(0.1, 1.0, 1e-9).unwrap();
        let array = LocalArray::upa(2, 2, 0.05).unwrap();
        let pose = SurfacePose::facing(Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let user = |g: f64| UserChannelSpec::new(vec![PathComponent::new(C64::new(g, 0.0), theta, phi).unwrap()]).unwrap();
        let p = AntennaPattern::three_gpp();
        let h1 = surface_channel(&pose, &array, &p, &user(1.0), &budget);
        let hs = surface_channel(&pose, &array, &p, &user(scale), &budget);
        let scaled: Vec<C64> = h1.iter().map(|v| v * scale).collect();
        prop_assert!(max_diff(&hs, &scaled) < 1e-12 * scale.max(1.0));
    }
}
