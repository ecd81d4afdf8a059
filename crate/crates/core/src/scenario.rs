//! User-distribution sampling and reference antenna layouts.
//!
//! Users sit on a ground plane `bs_height` metres below the CPU. Each user's
//! multipath cluster is centred on its line-of-sight direction, with path
//! loss folded into the complex path gains.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::channel::{PathComponent, UserChannelSpec};
use crate::error::{Error, Result};
use crate::geometry::{SurfacePose, Vec3};
use crate::scalar::wrap_pi;

/// RNG for one trial: a seed plus an independent stream per trial index.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Circularly symmetric complex Gaussian sample with the given variance.
pub fn complex_normal<R: Rng>(rng: &mut R, variance: f64) -> Complex<f64> {
    let std = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re * std, im * std)
}

/// Circular hotspot on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hotspot {
    /// Ground-plane centre `(x, y)` in metres.
    pub center: [f64; 2],
    pub radius: f64,
    pub weight: f64,
}

/// Path-count, angular-spread and large-scale-gain law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLaw {
    pub min_paths: usize,
    pub max_paths: usize,
    /// Standard deviation of each path's elevation/azimuth about the LoS direction (rad).
    pub angular_spread: f64,
    pub path_loss_exponent: f64,
    /// Large-scale power gain at 1 m, in dB.
    pub reference_gain_db: f64,
}

impl Default for PathLaw {
    fn default() -> Self {
        Self {
            min_paths: 3,
            max_paths: 5,
            angular_spread: 5f64.to_radians(),
            path_loss_exponent: 2.8,
            reference_gain_db: -42.0,
        }
    }
}

/// Hotspot-mixture user distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDistribution {
    pub hotspots: Vec<Hotspot>,
    /// Fraction of users drawn uniformly from the annulus instead of a hotspot.
    pub xi: f64,
    pub num_users: usize,
    pub bs_height: f64,
    /// Inner/outer ground radius of the non-hotspot annulus (m).
    pub annulus: [f64; 2],
    pub path_law: PathLaw,
    pub seed: u64,
}

impl ScenarioDistribution {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::invalid("xi", format!("must lie in [0, 1], got {}", self.xi)));
        }
        if self.num_users == 0 {
            return Err(Error::invalid("num_users", "must be ≥ 1"));
        }
        if !(self.bs_height >= 0.0) {
            return Err(Error::invalid("bs_height", "must be ≥ 0"));
        }
        if !(self.annulus[0] >= 0.0 && self.annulus[0] < self.annulus[1]) {
            return Err(Error::invalid("annulus", "need 0 ≤ inner < outer"));
        }
        if self.hotspots.is_empty() {
            if self.xi < 1.0 {
                return Err(Error::invalid("hotspots", "xi < 1 requires at least one hotspot"));
            }
        } else {
            let total: f64 = self.hotspots.iter().map(|h| h.weight).sum();
            if (total - 1.0).abs() > 1e-9 || self.hotspots.iter().any(|h| !(h.weight >= 0.0)) {
                return Err(Error::invalid("hotspot weights", format!("must be ≥ 0 and sum to 1, got {total}")));
            }
            if self.hotspots.iter().any(|h| !(h.radius > 0.0)) {
                return Err(Error::invalid("hotspot radius", "must be > 0"));
            }
        }
        let law = &self.path_law;
        if law.min_paths == 0 || law.min_paths > law.max_paths {
            return Err(Error::invalid("path counts", "need 1 ≤ min_paths ≤ max_paths"));
        }
        if !(law.angular_spread >= 0.0) || !law.path_loss_exponent.is_finite() {
            return Err(Error::invalid("path law", "spread must be ≥ 0 and exponent finite"));
        }
        Ok(())
    }

    /// Users per hotspot: `round(ξK)` go to the annulus, the rest are split by
    /// weight with largest-remainder rounding.
    pub fn hotspot_counts(&self) -> (usize, Vec<usize>) {
        let non_hotspot = ((self.xi * self.num_users as f64).round() as usize).min(self.num_users);
        let rest = self.num_users - non_hotspot;
        if self.hotspots.is_empty() {
            return (self.num_users, Vec::new());
        }
        let quotas: Vec<f64> = self.hotspots.iter().map(|h| h.weight * rest as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut left = rest - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in &order {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        (non_hotspot, counts)
    }

    /// Ground positions of all users for one draw: hotspot users first (in
    /// hotspot order), then non-hotspot users.
    pub fn sample_positions<R: Rng>(&self, rng: &mut R) -> Vec<Vec3<f64>> {
        let (non_hotspot, counts) = self.hotspot_counts();
        let mut out = Vec::with_capacity(self.num_users);
        for (h, &c) in self.hotspots.iter().zip(&counts) {
            for _ in 0..c {
                let r = h.radius * rng.random::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.random::<f64>();
                out.push(Vec3::new(h.center[0] + r * a.cos(), h.center[1] + r * a.sin(), -self.bs_height));
            }
        }
        let [r0, r1] = self.annulus;
        for _ in 0..non_hotspot {
            let r = (r0 * r0 + (r1 * r1 - r0 * r0) * rng.random::<f64>()).sqrt();
            let a = std::f64::consts::TAU * rng.random::<f64>();
            out.push(Vec3::new(r * a.cos(), r * a.sin(), -self.bs_height));
        }
        out
    }

    /// Multipath spec for a user at `position` (relative to the CPU).
    pub fn sample_paths<R: Rng>(&self, position: Vec3<f64>, rng: &mut R) -> UserChannelSpec<f64> {
        let law = &self.path_law;
        let dist = position.norm().max(1.0);
        let (theta0, phi0) =
            crate::geometry::spherical_angles(position.normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0)));
        let count = rng.random_range(law.min_paths..=law.max_paths);
        let power = 10f64.powf(law.reference_gain_db / 10.0) * dist.powf(-law.path_loss_exponent);
        let spread = Normal::new(0.0, law.angular_spread).expect("spread validated ≥ 0");
        let paths = (0..count)
            .map(|_| {
                let gain = complex_normal(rng, power / count as f64);
                let theta =
                    (theta0 + spread.sample(rng)).clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
                let phi = wrap_pi(phi0 + spread.sample(rng));
                PathComponent { gain, theta, phi }
            })
            .collect();
        UserChannelSpec::new(paths).expect("count ≥ 1")
    }
}

/// Source of per-trial user channel realizations.
pub trait RealizationSource: Sync {
    fn realization(&self, trial: u64) -> Vec<UserChannelSpec<f64>>;
}

impl RealizationSource for ScenarioDistribution {
    fn realization(&self, trial: u64) -> Vec<UserChannelSpec<f64>> {
        let mut rng = trial_rng(self.seed, trial);
        let positions = self.sample_positions(&mut rng);
        positions.into_iter().map(|p| self.sample_paths(p, &mut rng)).collect()
    }
}

/// The same user set on every trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRealization(pub Vec<UserChannelSpec<f64>>);

impl RealizationSource for FixedRealization {
    fn realization(&self, _trial: u64) -> Vec<UserChannelSpec<f64>> {
        self.0.clone()
    }
}

/// Draws `trials` realizations (trial indices `0..trials`).
pub fn draw_realizations(source: &dyn RealizationSource, trials: usize) -> Vec<Vec<UserChannelSpec<f64>>> {
    use rayon::prelude::*;
    (0..trials as u64).into_par_iter().map(|t| source.realization(t)).collect()
}

/// Conventional three-sector layout: surfaces split over sectors at azimuth
/// 0°, 120°, 240° (earlier sectors take the remainder), each sector a column
/// of surfaces at distance `radius` from the CPU, facing outward with the
/// given downtilt and spaced `spacing` apart along the panel.
pub fn sector_layout(surfaces: usize, radius: f64, downtilt: f64, spacing: f64) -> Vec<SurfacePose<f64>> {
    let mut out = Vec::with_capacity(surfaces);
    for s in 0..3 {
        let count = surfaces / 3 + usize::from(s < surfaces % 3);
        let az = (s as f64 * 120.0).to_radians();
        let n = Vec3::new(downtilt.cos() * az.cos(), downtilt.cos() * az.sin(), -downtilt.sin());
        // panel "up" direction: global z with the normal component removed
        let z = Vec3::new(0.0, 0.0, 1.0);
        let up = (z - n.scale(n.dot(z))).normalized().expect("downtilt below 90°");
        let centre = n.scale(radius);
        let mid = (count as f64 - 1.0) / 2.0;
        for i in 0..count {
            let q = centre + up.scale((i as f64 - mid) * spacing);
            out.push(SurfacePose::facing(q, n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{check_min_distance, check_no_blockage, check_no_reflection, ConstraintConfig, LocalArray};

    fn dist() -> ScenarioDistribution {
        ScenarioDistribution {
            hotspots: vec![
                Hotspot { center: [30.0, 40.0], radius: 8.0, weight: 0.5 },
                Hotspot { center: [-150.0, 0.0], radius: 15.0, weight: 0.5 },
            ],
            xi: 0.6,
            num_users: 20,
            bs_height: 25.0,
            annulus: [20.0, 250.0],
            path_law: PathLaw::default(),
            seed: 7,
        }
    }

    #[test]
    fn counts_follow_xi() {
        let d = dist();
        assert_eq!(d.hotspot_counts(), (12, vec![4, 4]));
        let mut d1 = d.clone();
        d1.xi = 1.0;
        assert_eq!(d1.hotspot_counts(), (20, vec![0, 0]));
        let mut d2 = d;
        d2.num_users = 3;
        d2.xi = 0.0;
        assert_eq!(d2.hotspot_counts(), (0, vec![2, 1]));
    }

    #[test]
    fn realization_is_deterministic_per_trial() {
        let d = dist();
        assert_eq!(d.realization(3), d.realization(3));
        assert_ne!(d.realization(3), d.realization(4));
        assert_eq!(d.realization(0).len(), 20);
    }

    #[test]
    fn hotspot_users_land_in_hotspots() {
        let d = dist();
        let mut rng = trial_rng(1, 0);
        let p = d.sample_positions(&mut rng);
        for q in &p[..4] {
            assert!(((q.x - 30.0).powi(2) + (q.y - 40.0).powi(2)).sqrt() <= 8.0);
        }
        for q in &p[8..] {
            let r = q.x.hypot(q.y);
            assert!((20.0..=250.0).contains(&r));
        }
    }

    #[test]
    fn validation() {
        let mut d = dist();
        assert!(d.validate().is_ok());
        d.xi = 1.5;
        assert!(d.validate().is_err());
        let mut d = dist();
        d.hotspots[0].weight = 0.7;
        assert!(d.validate().is_err());
    }

    #[test]
    fn sector_layout_is_feasible() {
        let poses = sector_layout(16, 0.6, 10f64.to_radians(), 0.2);
        assert_eq!(poses.len(), 16);
        let arr = [LocalArray::upa(2, 2, 0.05).unwrap()];
        assert!(check_min_distance(&poses, &ConstraintConfig::new(0.2).unwrap()).is_empty());
        assert!(check_no_reflection(&poses, &arr).is_empty());
        assert!(check_no_blockage(&poses, &arr).is_empty());
    }
}
