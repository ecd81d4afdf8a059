//! Alternating optimization of surface positions and rotations.
//!
//! Each outer iteration sweeps the surfaces in order. For surface `b` the
//! other surfaces are frozen (their Gram contributions cached), then:
//!
//! * position: forward-difference gradient, step along it, project onto the
//!   site region intersected with the linearized minimum-distance halfspaces
//!   and the (exactly linear) reflection/blockage halfspaces, backtrack until
//!   the objective improves;
//! * rotation: gradient over a small global rotation vector `ω`, step within
//!   the trust radius subject to the linearized normal constraints
//!   `(n + ω×n)ᵀd ≤ 0`, repair the resulting normal onto the exact constraint
//!   cone, backtrack until the objective improves.
//!
//! Only improving, feasible moves are accepted, so the objective trace is
//! non-decreasing and every iterate is feasible.

use num_complex::Complex;

use super::{dykstra, ConvexSet, FrozenObjective};
use crate::error::{Error, Result};
use crate::geometry::{
    axis_angle_matrix, check_all, rotation_matrix, surface_normal, ConstraintConfig, LocalArray, RotationAngles,
    SiteRegion, SurfacePose, Vec3,
};

const FD_POSITION: f64 = 1e-4;
const FD_ROTATION: f64 = 1e-4;
const DYKSTRA_ITERS: usize = 400;

/// Which pose components the optimizer may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoMode {
    Full,
    RotationOnly,
    PositionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoConfig {
    pub max_outer_iters: usize,
    /// Stop when an outer iteration improves the objective by less than this fraction.
    pub objective_tol: f64,
    /// Largest rotation step (rad).
    pub rotation_trust_radius: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    /// Realizations per objective evaluation.
    pub trials: usize,
    /// Initial position step length (m).
    pub position_step: f64,
    pub mode: AoMode,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 10,
            objective_tol: 1e-3,
            rotation_trust_radius: 0.1,
            shrink: 0.5,
            max_backtracks: 20,
            trials: 100,
            position_step: 0.1,
            mode: AoMode::Full,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 {
            return Err(Error::invalid("max_outer_iters", "must be ≥ 1"));
        }
        if !(self.objective_tol > 0.0) {
            return Err(Error::invalid("objective_tol", "must be > 0"));
        }
        if !(self.rotation_trust_radius > 0.0 && self.rotation_trust_radius <= std::f64::consts::FRAC_PI_4) {
            return Err(Error::invalid("rotation_trust_radius", "must lie in (0, π/4]"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid("shrink", "must lie in (0, 1)"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be ≥ 1"));
        }
        if !(self.position_step > 0.0) {
            return Err(Error::invalid("position_step", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoTraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoResult {
    pub poses: Vec<SurfacePose<f64>>,
    /// Row 0 is the initial configuration; one row per outer iteration after.
    pub trace: Vec<AoTraceRow>,
    pub evaluations: usize,
}

impl AoResult {
    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.objective)
    }
}

struct Problem<'a> {
    objective: &'a FrozenObjective,
    arrays: [LocalArray<f64>; 1],
    constraints: &'a ConstraintConfig<f64>,
    region: &'a SiteRegion<f64>,
    cfg: &'a AoConfig,
    evaluations: usize,
}

impl Problem<'_> {
    fn feasible(&self, poses: &[SurfacePose<f64>]) -> bool {
        check_all(poses, &self.arrays, self.constraints, self.region).is_feasible()
    }

    fn eval(&mut self, rest: &[Vec<Complex<f64>>], pose: &SurfacePose<f64>) -> f64 {
        self.evaluations += 1;
        self.objective.value_with(rest, pose)
    }

    /// Linear halfspaces on the position of surface `b` (normals fixed).
    fn position_sets(&self, poses: &[SurfacePose<f64>], b: usize) -> Vec<ConvexSet> {
        let arr = &self.arrays[0];
        let q = poses[b].position;
        let nb = surface_normal(poses[b].rotation, arr);
        let mut sets = Vec::new();
        for (j, pj) in poses.iter().enumerate() {
            if j == b {
                continue;
            }
            let d = q - pj.position;
            let dist = d.norm();
            if dist > 0.0 {
                // linearized ‖q − q_j‖ ≥ d_min: aᵀ(q − q_j) ≥ d_min
                let a = d.scale(1.0 / dist);
                sets.push(ConvexSet::HalfSpace { a: -a, b: -(self.constraints.d_min() + a.dot(pj.position)) });
            }
            // n_bᵀ(q_j − q) ≤ 0
            sets.push(ConvexSet::HalfSpace { a: -nb, b: -nb.dot(pj.position) });
            // n_jᵀ(q − q_j) ≤ 0
            let nj = surface_normal(pj.rotation, arr);
            sets.push(ConvexSet::HalfSpace { a: nj, b: nj.dot(pj.position) });
        }
        // n_bᵀq ≥ 0
        sets.push(ConvexSet::HalfSpace { a: -nb, b: 0.0 });
        sets.push(match *self.region {
            SiteRegion::Sphere { center, radius } => ConvexSet::Ball { center, radius },
            SiteRegion::Box { min, max } => ConvexSet::Box { min, max },
        });
        sets
    }

    fn position_step(
        &mut self,
        poses: &mut [SurfacePose<f64>],
        b: usize,
        rest: &[Vec<Complex<f64>>],
        current: f64,
    ) -> f64 {
        let base = poses[b];
        let mut grad = [0.0; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let mut e = [0.0; 3];
            e[i] = FD_POSITION;
            let p = SurfacePose::new(base.position + Vec3::from_array(e), base.rotation);
            *g = (self.eval(rest, &p) - current) / FD_POSITION;
        }
        let g = Vec3::from_array(grad);
        let Some(dir) = g.normalized() else { return current };
        let sets = self.position_sets(poses, b);
        let mut step = self.cfg.position_step;
        for _ in 0..self.cfg.max_backtracks {
            let q = dykstra(base.position + dir.scale(step), &sets, DYKSTRA_ITERS);
            if q.distance(base.position) < 1e-12 {
                break;
            }
            poses[b] = SurfacePose::new(q, base.rotation);
            if self.feasible(poses) {
                let v = self.eval(rest, &poses[b]);
                if v > current {
                    return v;
                }
            }
            step *= self.cfg.shrink;
        }
        poses[b] = base;
        current
    }

    /// Pose whose rotation is `Exp(ω) R(u)`.
    fn rotated(pose: &SurfacePose<f64>, w: Vec3<f64>) -> SurfacePose<f64> {
        let r = axis_angle_matrix(w).mul_mat(&rotation_matrix(pose.rotation));
        SurfacePose::new(pose.position, RotationAngles::from_matrix(&r))
    }

    /// Homogeneous halfspaces `aᵀn ≤ 0` that the normal of surface `b` must satisfy.
    fn normal_cone(poses: &[SurfacePose<f64>], b: usize) -> Vec<Vec3<f64>> {
        let q = poses[b].position;
        let mut out: Vec<Vec3<f64>> =
            poses.iter().enumerate().filter(|(j, _)| *j != b).map(|(_, p)| p.position - q).collect();
        out.push(-q);
        out
    }

    fn rotation_step(
        &mut self,
        poses: &mut [SurfacePose<f64>],
        b: usize,
        rest: &[Vec<Complex<f64>>],
        current: f64,
    ) -> f64 {
        let base = poses[b];
        let mut grad = [0.0; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let mut e = [0.0; 3];
            e[i] = FD_ROTATION;
            let p = Self::rotated(&base, Vec3::from_array(e));
            *g = (self.eval(rest, &p) - current) / FD_ROTATION;
        }
        let g = Vec3::from_array(grad);
        let Some(dir) = g.normalized() else { return current };
        let n = surface_normal(base.rotation, &self.arrays[0]);
        let cone = Self::normal_cone(poses, b);
        // (n + ω×n)ᵀa ≤ 0  ⇔  (n×a)ᵀω ≤ −nᵀa
        let mut lin: Vec<ConvexSet> =
            cone.iter().map(|&a| ConvexSet::HalfSpace { a: n.cross(a), b: -n.dot(a) }).collect();
        let cone_sets: Vec<ConvexSet> = cone.iter().map(|&a| ConvexSet::HalfSpace { a, b: 0.0 }).collect();
        let mut radius = self.cfg.rotation_trust_radius;
        lin.push(ConvexSet::Ball { center: Vec3::zero(), radius });
        for _ in 0..self.cfg.max_backtracks {
            let last = lin.len() - 1;
            lin[last] = ConvexSet::Ball { center: Vec3::zero(), radius };
            let w = dykstra(dir.scale(radius), &lin, DYKSTRA_ITERS);
            if w.norm() < 1e-12 {
                break;
            }
            let mut cand = Self::rotated(&base, w);
            poses[b] = cand;
            if !self.feasible(poses) {
                // repair: project the new normal onto the exact constraint cone
                let n_new = surface_normal(cand.rotation, &self.arrays[0]);
                if let Some(n_fix) = dykstra(n_new, &cone_sets, DYKSTRA_ITERS).normalized() {
                    let axis = n_new.cross(n_fix);
                    let s = axis.norm();
                    if s > 0.0 {
                        let angle = s.atan2(n_new.dot(n_fix));
                        cand = Self::rotated(&cand, axis.scale(angle / s));
                    }
                    poses[b] = cand;
                }
            }
            if self.feasible(poses) {
                let v = self.eval(rest, &poses[b]);
                if v > current {
                    return v;
                }
            }
            radius *= self.cfg.shrink;
        }
        poses[b] = base;
        current
    }
}

/// Alternating position/rotation ascent on a frozen Monte Carlo objective.
pub fn ao_optimize(
    initial: &[SurfacePose<f64>],
    objective: &FrozenObjective,
    constraints: &ConstraintConfig<f64>,
    region: &SiteRegion<f64>,
    cfg: &AoConfig,
) -> Result<AoResult> {
    cfg.validate()?;
    if initial.is_empty() {
        return Err(Error::invalid("initial poses", "need at least one surface"));
    }
    let mut problem =
        Problem { objective, arrays: [objective.array().clone()], constraints, region, cfg, evaluations: 0 };
    let report = check_all(initial, &problem.arrays, constraints, region);
    if let Some(v) = report.first_violation() {
        return Err(Error::Infeasible(format!("initial configuration violates {v}")));
    }
    let mut poses = initial.to_vec();
    let mut value = objective.value(&poses);
    problem.evaluations += 1;
    let mut trace = vec![AoTraceRow { iteration: 0, objective: value, feasible: true }];
    for iter in 1..=cfg.max_outer_iters {
        let start = value;
        for b in 0..poses.len() {
            let rest = objective.rest_grams(&poses, b);
            if cfg.mode != AoMode::RotationOnly {
                value = problem.position_step(&mut poses, b, &rest, value);
            }
            if cfg.mode != AoMode::PositionOnly {
                value = problem.rotation_step(&mut poses, b, &rest, value);
            }
        }
        let feasible = problem.feasible(&poses);
        trace.push(AoTraceRow { iteration: iter, objective: value, feasible });
        if value - start <= cfg.objective_tol * start.abs().max(1e-12) {
            break;
        }
    }
    Ok(AoResult { poses, trace, evaluations: problem.evaluations })
}

/// Greedy sequential placement: surface by surface, pick the candidate pose
/// that most increases the frozen objective while keeping the partial layout
/// feasible. Ties go to the lowest candidate index.
pub fn greedy_sphere_layout(
    objective: &FrozenObjective,
    count: usize,
    candidates: &[SurfacePose<f64>],
    constraints: &ConstraintConfig<f64>,
    region: &SiteRegion<f64>,
) -> Result<Vec<SurfacePose<f64>>> {
    use rayon::prelude::*;
    let arrays = [objective.array().clone()];
    let trials = objective.trials();
    let k = objective.users();
    // candidate block Grams, per realization
    let grams: Vec<Vec<Vec<Complex<f64>>>> = candidates
        .par_iter()
        .map(|c| (0..trials).map(|t| objective.block_gram(&objective.block(c, t))).collect())
        .collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    let mut acc = vec![vec![Complex::new(0.0, 0.0); k * k]; trials];
    for _ in 0..count {
        let mut best: Option<(usize, f64)> = None;
        for (c, cand) in candidates.iter().enumerate() {
            if chosen.contains(&c) {
                continue;
            }
            let mut layout: Vec<SurfacePose<f64>> = chosen.iter().map(|&i| candidates[i]).collect();
            layout.push(*cand);
            if !check_all(&layout, &arrays, constraints, region).is_feasible() {
                continue;
            }
            let per: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut g = acc[t].clone();
                    super::add_assign(&mut g, &grams[c][t]);
                    objective.capacity_from_gram(&g)
                })
                .collect();
            let v = crate::metrics::pairwise_sum(&per) / trials as f64;
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((c, v));
            }
        }
        let (c, _) = best.ok_or_else(|| {
            Error::Infeasible(format!("no feasible candidate left after placing {} surfaces", chosen.len()))
        })?;
        for (t, a) in acc.iter_mut().enumerate() {
            super::add_assign(a, &grams[c][t]);
        }
        chosen.push(c);
    }
    Ok(chosen.into_iter().map(|i| candidates[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{AntennaPattern, LinkBudget, PathComponent, UserChannelSpec};
    use crate::geometry::{fibonacci_sphere, surface_normal, LocalArray};
    use crate::scenario::sector_layout;

    fn objective(users: Vec<UserChannelSpec<f64>>) -> FrozenObjective {
        FrozenObjective::new(
            LocalArray::upa(2, 2, 0.05).unwrap(),
            AntennaPattern::three_gpp(),
            LinkBudget::new(0.1, 1.0, 1e-9).unwrap(),
            vec![users],
        )
        .unwrap()
    }

    fn los(theta: f64, phi: f64) -> UserChannelSpec<f64> {
        UserChannelSpec::new(vec![PathComponent::new(Complex::new(1e-4, 0.0), theta, phi).unwrap()]).unwrap()
    }

    #[test]
    fn single_surface_turns_towards_its_user() {
        let (theta, phi) = (-0.4, 0.7);
        let obj = objective(vec![los(theta, phi)]);
        let region = SiteRegion::sphere(Vec3::zero(), 1.0).unwrap();
        let cfg = ConstraintConfig::new(0.1).unwrap();
        // start 35° off in azimuth, inside the pattern's sloped region
        let d = crate::geometry::pointing_vector(theta, phi + 0.6).unwrap();
        let start = SurfacePose::facing(d.scale(0.5), d);
        let ao = AoConfig { max_outer_iters: 30, objective_tol: 1e-6, ..AoConfig::default() };
        let res = ao_optimize(&[start], &obj, &cfg, &region, &ao).unwrap();
        // grid oracle over facing directions
        let arrays = [obj.array().clone()];
        let best = fibonacci_sphere::<f64>(4000, false)
            .into_iter()
            .map(|d| SurfacePose::facing(res.poses[0].position, d))
            .filter(|p| check_all(&[*p], &arrays, &cfg, &region).is_feasible())
            .max_by(|a, b| obj.value(&[*a]).partial_cmp(&obj.value(&[*b])).unwrap())
            .unwrap();
        let n_ao = surface_normal(res.poses[0].rotation, obj.array());
        let n_grid = surface_normal(best.rotation, obj.array());
        assert!(n_ao.dot(n_grid).clamp(-1.0, 1.0).acos() < 5f64.to_radians());
        assert!(res.objective() >= obj.value(&[best]) - 1e-6 * obj.value(&[best]).abs());
    }

    #[test]
    fn trace_is_monotone_and_layout_feasible() {
        let users = vec![los(-0.2, 0.3), los(-0.3, 2.5), los(-0.1, -2.0), los(-0.4, 0.4)];
        let obj = objective(users);
        let region = SiteRegion::sphere(Vec3::zero(), 1.0).unwrap();
        let cfg = ConstraintConfig::new(0.1).unwrap();
        let start = sector_layout(6, 0.5, 0.1, 0.2);
        let res = ao_optimize(&start, &obj, &cfg, &region, &AoConfig::default()).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1].objective >= w[0].objective));
        assert!(res.trace.iter().all(|r| r.feasible));
        assert!(check_all(&res.poses, &[obj.array().clone()], &cfg, &region).is_feasible());
        assert!(res.objective() > res.trace[0].objective);
    }

    #[test]
    fn rejects_infeasible_start() {
        let obj = objective(vec![los(-0.2, 0.3)]);
        let region = SiteRegion::sphere(Vec3::zero(), 1.0).unwrap();
        let cfg = ConstraintConfig::new(0.1).unwrap();
        let p = SurfacePose::facing(Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let err = ao_optimize(&[p, p], &obj, &cfg, &region, &AoConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn greedy_layout_is_feasible() {
        let obj = objective(vec![los(-0.2, 0.3), los(-0.3, 2.5)]);
        let region = SiteRegion::sphere(Vec3::zero(), 1.0).unwrap();
        let cfg = ConstraintConfig::new(0.2).unwrap();
        let cands: Vec<_> =
            fibonacci_sphere::<f64>(64, false).into_iter().map(|d| SurfacePose::facing(d.scale(0.9), d)).collect();
        let layout = greedy_sphere_layout(&obj, 5, &cands, &cfg, &region).unwrap();
        assert_eq!(layout.len(), 5);
        assert!(check_all(&layout, &[obj.array().clone()], &cfg, &region).is_feasible());
    }
}
