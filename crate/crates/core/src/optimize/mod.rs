//! Pose optimization: continuous alternating optimization, discrete
//! relax-and-quantize and conditional-sample-mean search, and particle swarm.

mod ao;
mod discrete;
mod pso;

pub use ao::{ao_optimize, greedy_sphere_layout, AoConfig, AoMode, AoResult, AoTraceRow};
pub use discrete::{
    csm_online, discrete_offline, discrete_violations, random_feasible_assignment, CsmConfig, DiscreteAssignment,
    DiscreteResult, OfflineConfig,
};
pub use pso::{pso_minimize, PsoConfig, PsoResult};

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{accumulate_surface_channel, AntennaPattern, LinkBudget, UserChannelSpec};
use crate::error::{Error, Result};
use crate::geometry::{LocalArray, SurfacePose, Vec3};
use crate::linalg::{gram_columns, ln_det_hpd};
use crate::metrics::pairwise_sum;

type C64 = Complex<f64>;

/// Monte Carlo capacity objective over a frozen set of realizations (common
/// random numbers), so repeated evaluations of one configuration agree.
#[derive(Debug, Clone)]
pub struct FrozenObjective {
    array: LocalArray<f64>,
    pattern: AntennaPattern<f64>,
    budget: LinkBudget<f64>,
    realizations: Vec<Vec<UserChannelSpec<f64>>>,
    users: usize,
}

impl FrozenObjective {
    pub fn new(
        array: LocalArray<f64>,
        pattern: AntennaPattern<f64>,
        budget: LinkBudget<f64>,
        realizations: Vec<Vec<UserChannelSpec<f64>>>,
    ) -> Result<Self> {
        let users = realizations.first().map_or(0, Vec::len);
        if realizations.is_empty() || users == 0 {
            return Err(Error::invalid("realizations", "need ≥ 1 realization with ≥ 1 user"));
        }
        if realizations.iter().any(|r| r.len() != users) {
            return Err(Error::Dimension("realizations with differing user counts".into()));
        }
        Ok(Self { array, pattern, budget, realizations, users })
    }

    pub fn array(&self) -> &LocalArray<f64> {
        &self.array
    }

    pub fn pattern(&self) -> &AntennaPattern<f64> {
        &self.pattern
    }

    pub fn budget(&self) -> &LinkBudget<f64> {
        &self.budget
    }

    pub fn trials(&self) -> usize {
        self.realizations.len()
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Channel block (N × K, column-major) of one surface in realization `t`.
    pub(crate) fn block(&self, pose: &SurfacePose<f64>, t: usize) -> Vec<C64> {
        let n = self.array.len();
        let mut out = vec![C64::new(0.0, 0.0); n * self.users];
        for (k, user) in self.realizations[t].iter().enumerate() {
            accumulate_surface_channel(
                pose,
                &self.array,
                &self.pattern,
                user.paths(),
                &self.budget,
                &mut out[k * n..(k + 1) * n],
            );
        }
        out
    }

    /// `Bᴴ B` for an N × K block (row-major K × K).
    pub(crate) fn block_gram(&self, block: &[C64]) -> Vec<C64> {
        let n = self.array.len();
        let m = crate::linalg::CMatrix::from_column_major(n, self.users, block.to_vec()).expect("block shape");
        gram_columns(&m)
    }

    /// `log₂ det(I + ρ G)` for a K × K Gram.
    pub(crate) fn capacity_from_gram(&self, gram: &[C64]) -> f64 {
        let k = self.users;
        let rho = self.budget.snr();
        let mut a: Vec<C64> = gram.iter().map(|z| z * rho).collect();
        for i in 0..k {
            a[i * k + i] += 1.0;
        }
        ln_det_hpd(a, k).expect("I + ρG is positive definite") / std::f64::consts::LN_2
    }

    /// Sum of block Grams over `poses` for realization `t`.
    pub(crate) fn gram_of(&self, poses: &[SurfacePose<f64>], t: usize) -> Vec<C64> {
        let k = self.users;
        let mut g = vec![C64::new(0.0, 0.0); k * k];
        for p in poses {
            add_assign(&mut g, &self.block_gram(&self.block(p, t)));
        }
        g
    }

    /// Average capacity of `poses` over the frozen realizations.
    pub fn value(&self, poses: &[SurfacePose<f64>]) -> f64 {
        let per: Vec<f64> =
            (0..self.trials()).into_par_iter().map(|t| self.capacity_from_gram(&self.gram_of(poses, t))).collect();
        pairwise_sum(&per) / per.len() as f64
    }

    /// Cached Grams of every surface except `skip` (one per realization).
    pub(crate) fn rest_grams(&self, poses: &[SurfacePose<f64>], skip: usize) -> Vec<Vec<C64>> {
        (0..self.trials())
            .into_par_iter()
            .map(|t| {
                let k = self.users;
                let mut g = vec![C64::new(0.0, 0.0); k * k];
                for (b, p) in poses.iter().enumerate() {
                    if b != skip {
                        add_assign(&mut g, &self.block_gram(&self.block(p, t)));
                    }
                }
                g
            })
            .collect()
    }

    /// Average capacity when one surface takes `pose` and the rest are fixed
    /// (given by their cached Grams).
    pub(crate) fn value_with(&self, rest: &[Vec<C64>], pose: &SurfacePose<f64>) -> f64 {
        let per: Vec<f64> = (0..self.trials())
            .into_par_iter()
            .map(|t| {
                let mut g = rest[t].clone();
                add_assign(&mut g, &self.block_gram(&self.block(pose, t)));
                self.capacity_from_gram(&g)
            })
            .collect();
        pairwise_sum(&per) / per.len() as f64
    }
}

pub(crate) fn add_assign(dst: &mut [C64], src: &[C64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Closed convex set in R³ used by the projection steps.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ConvexSet {
    /// `{x : aᵀx ≤ b}`
    HalfSpace {
        a: Vec3<f64>,
        b: f64,
    },
    Ball {
        center: Vec3<f64>,
        radius: f64,
    },
    Box {
        min: Vec3<f64>,
        max: Vec3<f64>,
    },
}

impl ConvexSet {
    fn project(&self, x: Vec3<f64>) -> Vec3<f64> {
        match *self {
            ConvexSet::HalfSpace { a, b } => {
                let v = a.dot(x) - b;
                let aa = a.dot(a);
                if v <= 0.0 || aa == 0.0 {
                    x
                } else {
                    x - a.scale(v / aa)
                }
            }
            ConvexSet::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n <= radius {
                    x
                } else {
                    center + d.scale(radius / n)
                }
            }
            ConvexSet::Box { min, max } => {
                Vec3::new(x.x.clamp(min.x, max.x), x.y.clamp(min.y, max.y), x.z.clamp(min.z, max.z))
            }
        }
    }
}

/// Dykstra's alternating projection onto the intersection of `sets`.
pub(crate) fn dykstra(x0: Vec3<f64>, sets: &[ConvexSet], max_iters: usize) -> Vec3<f64> {
    if sets.is_empty() {
        return x0;
    }
    let mut x = x0;
    let mut incr = vec![Vec3::zero(); sets.len()];
    for _ in 0..max_iters {
        let prev = x;
        for (s, p) in sets.iter().zip(incr.iter_mut()) {
            let y = s.project(x + *p);
            *p = x + *p - y;
            x = y;
        }
        if (x - prev).norm() < 1e-13 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dykstra_projects_onto_wedge() {
        let sets = [
            ConvexSet::HalfSpace { a: Vec3::new(1.0, 0.0, 0.0), b: 0.0 },
            ConvexSet::HalfSpace { a: Vec3::new(0.0, 1.0, 0.0), b: 0.0 },
            ConvexSet::Ball { center: Vec3::zero(), radius: 10.0 },
        ];
        let p = dykstra(Vec3::new(1.0, 2.0, 3.0), &sets, 200);
        assert!(p.distance(Vec3::new(0.0, 0.0, 3.0)) < 1e-9);
        // interior point is fixed
        let q = Vec3::new(-1.0, -1.0, 0.0);
        assert!(dykstra(q, &sets, 200).distance(q) < 1e-15);
    }
}
