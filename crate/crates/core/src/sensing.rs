//! DOA sensing bounds for movable surfaces and the rotatable-array ISAC
//! trade-off (rotation gain, sensing beam, joint rotation/beamforming search).

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{effective_gain_dbi, effective_gain_dbi_partials, ula_steering, AntennaPattern, LinkBudget};
use crate::error::{Error, Result};
use crate::geometry::{
    check_all, pointing_vector, rotation_matrix, spherical_angles, ConstraintConfig, LocalArray, SiteRegion,
    SurfacePose, Vec3,
};
use crate::linalg::{dotc, norm_sqr, CMatrix};
use crate::metrics::{sum_rate_beamforming, BeamformingSet};
use crate::optimize::{pso_minimize, PsoConfig};

type C64 = Complex<f64>;

/// Typical sensing target: horizontal DOA `phi`, fixed elevation `theta`
/// and reflection coefficient `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingTarget {
    pub phi: f64,
    pub theta: f64,
    pub rho: C64,
}

/// Azimuth sector at a given elevation in which targets may appear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingRegion {
    pub phi_min: f64,
    pub phi_max: f64,
    pub theta: f64,
}

/// Splits every region into equal subregions no wider than `delta` and puts
/// one typical target (coefficient `rho`) at each subregion centre.
pub fn typical_targets(regions: &[SensingRegion], delta: f64, rho: C64) -> Result<Vec<SensingTarget>> {
    if !(delta > 0.0) {
        return Err(Error::invalid("subregion size", "must be > 0"));
    }
    let mut out = Vec::new();
    for r in regions {
        if !(r.phi_max > r.phi_min) {
            return Err(Error::invalid("sensing region", "phi_max must exceed phi_min"));
        }
        let count = ((r.phi_max - r.phi_min) / delta).ceil().max(1.0) as usize;
        let width = (r.phi_max - r.phi_min) / count as f64;
        for i in 0..count {
            out.push(SensingTarget { phi: r.phi_min + width * (i as f64 + 0.5), theta: r.theta, rho });
        }
    }
    Ok(out)
}

/// Targets, sensing signal `X` (total antennas × columns) and frame length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingScenario {
    pub targets: Vec<SensingTarget>,
    pub signal: CMatrix<f64>,
    pub frame_length: usize,
}

impl SensingScenario {
    pub fn new(targets: Vec<SensingTarget>, signal: CMatrix<f64>, frame_length: usize) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("targets", "need at least one target"));
        }
        if targets.iter().any(|t| !(t.rho.norm() > 0.0)) {
            return Err(Error::invalid("target coefficient", "|ρ| must be > 0"));
        }
        if frame_length == 0 {
            return Err(Error::invalid("frame length", "must be ≥ 1"));
        }
        Ok(Self { targets, signal, frame_length })
    }

    /// Isotropic signal `X = √(P/N_tot) I` for `antennas` transmit antennas.
    pub fn isotropic_signal(antennas: usize, power: f64) -> CMatrix<f64> {
        let s = (power / antennas as f64).sqrt();
        CMatrix::from_fn(antennas, antennas, |r, c| if r == c { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) })
    }
}

/// LoS channel `h` of one target over all surfaces and its derivative `∂h/∂φ`.
pub fn target_channel_and_derivative(
    poses: &[SurfacePose<f64>],
    array: &LocalArray<f64>,
    pattern: &AntennaPattern<f64>,
    target: &SensingTarget,
    budget: &LinkBudget<f64>,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let f = pointing_vector(target.theta, target.phi)?;
    let (ct, (sp, cp)) = (target.theta.cos(), target.phi.sin_cos());
    let df = Vec3::new(-ct * sp, ct * cp, 0.0);
    let k = budget.wavenumber();
    let mut h = Vec::with_capacity(poses.len() * array.len());
    let mut dh = Vec::with_capacity(poses.len() * array.len());
    for pose in poses {
        let r = rotation_matrix(pose.rotation);
        let (amp, damp) = match pattern {
            AntennaPattern::Isotropic => (1.0, 0.0),
            _ => {
                let fl = r.mul_vec_transposed(f);
                let dfl = r.mul_vec_transposed(df);
                let (t, p) = spherical_angles(fl);
                let amp = 10f64.powf(effective_gain_dbi(pattern, t, p) / 20.0);
                let (da_t, da_p) = effective_gain_dbi_partials(pattern, t, p);
                let cz = (1.0 - fl.z * fl.z).sqrt();
                let rho2 = fl.x * fl.x + fl.y * fl.y;
                let dt = if cz > 1e-12 { dfl.z / cz } else { 0.0 };
                let dp = if rho2 > 1e-24 { (fl.x * dfl.y - fl.y * dfl.x) / rho2 } else { 0.0 };
                let da = da_t * dt + da_p * dp;
                (amp, amp * std::f64::consts::LN_10 / 20.0 * da)
            }
        };
        for &o in array.offsets() {
            let pos = pose.position + r.mul_vec(o);
            let phase = -k * f.dot(pos);
            let e = C64::new(phase.cos(), phase.sin());
            let dphase = -k * df.dot(pos);
            h.push(e * amp);
            dh.push(e * C64::new(damp, amp * dphase));
        }
    }
    Ok((h, dh))
}

/// Sum over targets of `σ² / (2|ρ|² L) · [‖hᴴX‖² ‖∂h/∂φ‖]⁻¹`.
pub fn crb_doa(
    poses: &[SurfacePose<f64>],
    array: &LocalArray<f64>,
    pattern: &AntennaPattern<f64>,
    scenario: &SensingScenario,
    budget: &LinkBudget<f64>,
) -> Result<f64> {
    let total = poses.len() * array.len();
    if scenario.signal.rows() != total {
        return Err(Error::Dimension(format!(
            "sensing signal has {} rows for {total} antennas",
            scenario.signal.rows()
        )));
    }
    let mut crb = 0.0;
    for (i, t) in scenario.targets.iter().enumerate() {
        let (h, dh) = target_channel_and_derivative(poses, array, pattern, t, budget)?;
        let power: f64 = (0..scenario.signal.cols()).map(|c| dotc(&h, scenario.signal.column(c)).norm_sqr()).sum();
        let geo = norm_sqr(&dh).sqrt();
        if !(power > 0.0) || !(geo > 0.0) {
            return Err(Error::Unidentifiable { target: i });
        }
        crb += budget.noise_power() / (2.0 * t.rho.norm_sqr() * scenario.frame_length as f64) / (power * geo);
    }
    Ok(crb)
}

/// Surfaces on a sphere of radius `radius`, each facing radially outward at
/// azimuth/elevation `params[2b], params[2b+1]`.
pub fn spherical_placement(params: &[f64], radius: f64) -> Vec<SurfacePose<f64>> {
    params
        .chunks_exact(2)
        .map(|p| {
            let d = pointing_vector(p[1].clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2), p[0])
                .expect("clamped elevation");
            SurfacePose::facing(d.scale(radius), d)
        })
        .collect()
}

/// Outcome of the pose search for sensing.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbPlacement {
    pub poses: Vec<SurfacePose<f64>>,
    pub params: Vec<f64>,
    pub crb: f64,
    pub history: Vec<f64>,
}

/// Bounds of the outward-facing spherical placement search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementBounds {
    pub surfaces: usize,
    pub radius: f64,
    pub elevation: [f64; 2],
}

/// Minimizes the CRB over outward-facing spherical placements with particle
/// swarm search; infeasible placements score `+∞`.
#[allow(clippy::too_many_arguments)]
pub fn optimize_crb_poses(
    array: &LocalArray<f64>,
    pattern: &AntennaPattern<f64>,
    scenario: &SensingScenario,
    budget: &LinkBudget<f64>,
    bounds: &PlacementBounds,
    constraints: &ConstraintConfig<f64>,
    initial: &[Vec<f64>],
    cfg: &PsoConfig,
) -> Result<CrbPlacement> {
    let region = SiteRegion::sphere(Vec3::zero(), bounds.radius * (1.0 + 1e-9))?;
    let arrays = [array.clone()];
    let score = |params: &[f64]| -> f64 {
        let poses = spherical_placement(params, bounds.radius);
        if !check_all(&poses, &arrays, constraints, &region).is_feasible() {
            return f64::INFINITY;
        }
        crb_doa(&poses, array, pattern, scenario, budget).unwrap_or(f64::INFINITY)
    };
    let pi = std::f64::consts::PI;
    let mut lower = Vec::with_capacity(2 * bounds.surfaces);
    let mut upper = Vec::with_capacity(2 * bounds.surfaces);
    for _ in 0..bounds.surfaces {
        lower.extend([-pi, bounds.elevation[0]]);
        upper.extend([pi, bounds.elevation[1]]);
    }
    let res = pso_minimize(&score, &lower, &upper, initial, cfg)?;
    if !res.best_value.is_finite() {
        return Err(Error::Infeasible("no feasible placement found by the swarm".into()));
    }
    Ok(CrbPlacement {
        poses: spherical_placement(&res.best, bounds.radius),
        params: res.best,
        crb: res.best_value,
        history: res.history,
    })
}

/// Rotatable-array ISAC setting: `M_t`-element transmit ULA, `M_r`-element
/// receive ULA, one target, `K` users with multipath at reference angles.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatableIsacConfig {
    pub m_t: usize,
    pub m_r: usize,
    pub snapshots: usize,
    /// Linear sensing SNR.
    pub snr: f64,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub wavelength: f64,
    /// Target reference spatial angle.
    pub target_angle: f64,
    /// Per-user `(angle, gain)` paths.
    pub users: Vec<Vec<(f64, C64)>>,
    pub w_comm: f64,
    pub w_sense: f64,
    pub p_max: f64,
    pub noise_power: f64,
    pub gamma_bounds: [f64; 2],
    /// Number of rotation grid intervals.
    pub grid_steps: usize,
}

impl RotatableIsacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_t == 0 || self.m_r < 2 {
            return Err(Error::invalid("array sizes", "need M_t ≥ 1 and M_r ≥ 2"));
        }
        if !(self.w_comm >= 0.0 && self.w_sense >= 0.0) || (self.w_comm + self.w_sense - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights", "must be ≥ 0 and sum to 1"));
        }
        if !(self.gamma_bounds[0] <= self.gamma_bounds[1]) {
            return Err(Error::invalid("rotation bounds", "min must not exceed max"));
        }
        if !(self.p_max > 0.0 && self.snr > 0.0 && self.noise_power > 0.0 && self.spacing > 0.0) {
            return Err(Error::invalid("powers/spacing", "must be > 0"));
        }
        if self.snapshots == 0 || self.grid_steps == 0 {
            return Err(Error::invalid("snapshots/grid", "must be ≥ 1"));
        }
        Ok(())
    }

    /// `χ = 3λ²(M_r−1) / (2π² T SNR M_r (M_r+1) ((M_r−1)d)²)` with `d` in metres.
    pub fn chi(&self) -> f64 {
        let mr = self.m_r as f64;
        let d = self.spacing * self.wavelength;
        3.0 * self.wavelength.powi(2) * (mr - 1.0)
            / (2.0
                * std::f64::consts::PI.powi(2)
                * self.snapshots as f64
                * self.snr
                * mr
                * (mr + 1.0)
                * ((mr - 1.0) * d).powi(2))
    }

    pub fn transmit_steering(&self, angle: f64) -> Vec<C64> {
        ula_steering(self.m_t, self.spacing, angle)
    }

    /// User channels at array rotation `gamma`.
    pub fn user_channels(&self, gamma: f64) -> CMatrix<f64> {
        let cols: Vec<Vec<C64>> = self
            .users
            .iter()
            .map(|paths| {
                let mut h = vec![C64::new(0.0, 0.0); self.m_t];
                for &(angle, gain) in paths {
                    for (o, a) in h.iter_mut().zip(self.transmit_steering(angle + gamma)) {
                        *o += gain * a;
                    }
                }
                h
            })
            .collect();
        CMatrix::from_columns(&cols).expect("equal lengths")
    }
}

/// `aᴴ W a` with `W = Σ_k w_k w_kᴴ`.
pub fn beam_quadratic_form(a: &[C64], w: &BeamformingSet) -> f64 {
    w.beams().iter().map(|wk| dotc(a, wk).norm_sqr()).sum()
}

/// Sensing metric `cos²γ̃ · aᴴ W a` at rotation `gamma`.
pub fn sensing_metric(gamma: f64, w: &BeamformingSet, cfg: &RotatableIsacConfig) -> f64 {
    let eff = cfg.target_angle + gamma;
    eff.cos().powi(2) * beam_quadratic_form(&cfg.transmit_steering(eff), w)
}

/// Angle CRB `χ / (cos²γ̃ · aᴴ W a)`; `+∞` when the target is unobservable.
pub fn rotatable_crb(gamma: f64, w: &BeamformingSet, cfg: &RotatableIsacConfig) -> Result<f64> {
    cfg.validate()?;
    let fs = sensing_metric(gamma, w, cfg);
    if fs <= 1e-300 {
        return Ok(f64::INFINITY);
    }
    Ok(cfg.chi() / fs)
}

/// Rank-one sensing beam `√(P/M_t) a(γ̃)` (so `W = (P/M_t) a aᴴ`), placed in
/// the first of `users` beam slots.
pub fn sensing_beam(gamma: f64, cfg: &RotatableIsacConfig, users: usize) -> BeamformingSet {
    let a = cfg.transmit_steering(cfg.target_angle + gamma);
    let s = (cfg.p_max / cfg.m_t as f64).sqrt();
    let mut beams = vec![vec![C64::new(0.0, 0.0); cfg.m_t]; users.max(1)];
    beams[0] = a.iter().map(|v| v * s).collect();
    BeamformingSet::new(beams, cfg.p_max).expect("power equals the cap")
}

/// Spatial angle maximizing `cos²(γ̄ + γ)` over the rotation grid, and whether
/// it differs from both 0 and π.
pub fn sensing_optimal_rotation(cfg: &RotatableIsacConfig) -> (f64, bool) {
    let grid = rotation_grid(cfg);
    let mut best = grid[0];
    for &g in &grid {
        if (cfg.target_angle + g).cos().powi(2) > (cfg.target_angle + best).cos().powi(2) {
            best = g;
        }
    }
    let step = grid.get(1).map_or(0.0, |g| g - grid[0]);
    let near = |x: f64| crate::scalar::wrap_pi(best - x).abs() <= step;
    (best, !(near(0.0) || near(std::f64::consts::PI)))
}

/// Rotation gain `|aᴴ(γ̃₀)a(γ̃₁)| / |aᴴ(γ̄₀)a(γ̄₁)|` for two paths at reference
/// angles `g0`, `g1`.
pub fn rotation_gain(gamma: f64, g0: f64, g1: f64, m_t: usize, spacing: f64) -> f64 {
    let corr = |x: f64, y: f64| dotc(&ula_steering(m_t, spacing, x), &ula_steering(m_t, spacing, y)).norm();
    corr(g0 + gamma, g1 + gamma) / corr(g0, g1)
}

/// Closed-form maximum rotation gain for half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxRotationGain {
    pub gamma: f64,
    pub value: f64,
    /// Both paths coincide (`ζ₁ = 0`): the gain is identically 1.
    pub degenerate: bool,
}

/// Maximizer among `γ = nπ/2 − ζ₂` and the value `M|sin x| / |sin Mx|`,
/// `x = π sin ζ₁ cos ζ₂`.
pub fn max_rotation_gain(g0: f64, g1: f64, m_t: usize) -> MaxRotationGain {
    let z1 = (g0 - g1) / 2.0;
    let z2 = (g0 + g1) / 2.0;
    if z1.sin().abs() < 1e-15 || m_t == 1 {
        return MaxRotationGain { gamma: 0.0, value: 1.0, degenerate: z1.sin().abs() < 1e-15 };
    }
    let x = std::f64::consts::PI * z1.sin() * z2.cos();
    let m = m_t as f64;
    let value = m * x.sin().abs() / (m * x).sin().abs();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for n in -4..=4 {
        let gamma = crate::scalar::wrap_pi(n as f64 * std::f64::consts::FRAC_PI_2 - z2);
        let g = rotation_gain(gamma, g0, g1, m_t, 0.5);
        if g > best.0 + 1e-12 {
            best = (g, gamma);
        }
    }
    MaxRotationGain { gamma: best.1, value, degenerate: false }
}

/// Selected rotation, beams and metrics of the joint search.
#[derive(Debug, Clone, PartialEq)]
pub struct OraSolution {
    pub gamma: f64,
    pub beams: BeamformingSet,
    pub f_c: f64,
    pub f_s: f64,
    pub objective: f64,
    /// Index of the chosen beam construction (see [`candidate_beams`]).
    pub candidate: usize,
}

fn rotation_grid(cfg: &RotatableIsacConfig) -> Vec<f64> {
    let [lo, hi] = cfg.gamma_bounds;
    let steps = if hi > lo { cfg.grid_steps } else { 0 };
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / cfg.grid_steps as f64).collect()
}

fn scale_to_power(beams: Vec<Vec<C64>>, p: f64) -> Option<Vec<Vec<C64>>> {
    let total: f64 = beams.iter().map(|b| norm_sqr(b)).sum();
    if !(total > 0.0) {
        return None;
    }
    let s = (p / total).sqrt();
    Some(beams.into_iter().map(|b| b.into_iter().map(|v| v * s).collect()).collect())
}

/// Closed-form beam constructions at rotation `gamma`: MRT, ZF (K > 1),
/// the sensing beam, and power splits between each communication beam set
/// and the sensing beam (fractions 0.1…0.9 plus `w_comm`). Every set uses
/// the full power budget.
pub fn candidate_beams(gamma: f64, cfg: &RotatableIsacConfig) -> Vec<BeamformingSet> {
    let h = cfg.user_channels(gamma);
    let k = h.cols();
    let p = cfg.p_max;
    let mut comm: Vec<Vec<Vec<C64>>> = Vec::new();
    // MRT: equal power per user
    if let Some(b) = scale_to_power((0..k).map(|j| h.column(j).to_vec()).collect(), p) {
        comm.push(b);
    }
    if k > 1 {
        let hn = h.to_nalgebra();
        if let Ok(pinv) = hn.clone().pseudo_inverse(1e-12) {
            // W = H (HᴴH)⁻¹, i.e. the adjoint of the pseudo-inverse
            let w = pinv.adjoint();
            let beams: Vec<Vec<C64>> = (0..k).map(|j| w.column(j).iter().copied().collect()).collect();
            if let Some(b) = scale_to_power(beams, p) {
                comm.push(b);
            }
        }
    }
    let a = cfg.transmit_steering(cfg.target_angle + gamma);
    let mut sets: Vec<Vec<Vec<C64>>> = comm.clone();
    sets.push(sensing_beam(gamma, cfg, k).beams().to_vec());
    let mut fracs: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    if cfg.w_comm > 0.0 && cfg.w_comm < 1.0 {
        fracs.push(cfg.w_comm);
    }
    for c in &comm {
        for &rho in &fracs {
            // spread the sensing power over all beams, aligned with each beam's phase on a
            let s = ((1.0 - rho) * p / (cfg.m_t * k) as f64).sqrt();
            let mixed: Vec<Vec<C64>> = c
                .iter()
                .map(|wk| {
                    let ph = dotc(&a, wk);
                    let rot = if ph.norm() > 0.0 { ph / ph.norm() } else { C64::new(1.0, 0.0) };
                    wk.iter().zip(&a).map(|(w, av)| w * rho.sqrt() + av * rot * s).collect()
                })
                .collect();
            if let Some(b) = scale_to_power(mixed, p) {
                sets.push(b);
            }
        }
    }
    sets.into_iter().map(|b| BeamformingSet::new(b, p * (1.0 + 1e-13)).expect("scaled to the cap")).collect()
}

/// Exhaustive search over the rotation grid; at each angle the best closed
/// beam construction is taken. Returns the argmax of `ω₁ f_c + ω₂ f_s`
/// (ties: smallest angle, then lowest candidate index).
pub fn ora_solve(cfg: &RotatableIsacConfig) -> Result<OraSolution> {
    cfg.validate()?;
    if cfg.users.is_empty() {
        return Err(Error::invalid("users", "need at least one user"));
    }
    let budget = LinkBudget::new(cfg.wavelength, 1.0, cfg.noise_power)?;
    let grid = rotation_grid(cfg);
    let per_angle: Vec<OraSolution> = grid
        .par_iter()
        .map(|&gamma| {
            let h = cfg.user_channels(gamma);
            let mut best: Option<OraSolution> = None;
            for (i, w) in candidate_beams(gamma, cfg).into_iter().enumerate() {
                let f_c = sum_rate_beamforming(&h, &w, &budget).expect("shapes agree");
                let f_s = sensing_metric(gamma, &w, cfg);
                let objective = cfg.w_comm * f_c + cfg.w_sense * f_s;
                if best.as_ref().is_none_or(|b| objective > b.objective) {
                    best = Some(OraSolution { gamma, beams: w, f_c, f_s, objective, candidate: i });
                }
            }
            best.expect("at least one candidate")
        })
        .collect();
    let mut best = 0;
    for (i, s) in per_angle.iter().enumerate() {
        if s.objective > per_angle[best].objective {
            best = i;
        }
    }
    Ok(per_angle.into_iter().nth(best).expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn isac() -> RotatableIsacConfig {
        RotatableIsacConfig {
            m_t: 8,
            m_r: 8,
            snapshots: 10,
            snr: 1.0,
            spacing: 0.5,
            wavelength: 0.1,
            target_angle: 0.4,
            users: vec![vec![(-0.3, C64::new(1.0, 0.0)), (0.9, C64::new(0.3, 0.2))]],
            w_comm: 0.5,
            w_sense: 0.5,
            p_max: 1.0,
            noise_power: 0.1,
            gamma_bounds: [-1.5, 1.5],
            grid_steps: 1000,
        }
    }

    #[test]
    fn sensing_beam_quadratic_form() {
        let cfg = isac();
        let w = sensing_beam(0.2, &cfg, 1);
        let a = cfg.transmit_steering(cfg.target_angle + 0.2);
        assert!((beam_quadratic_form(&a, &w) - cfg.p_max * cfg.m_t as f64).abs() < 1e-12);
    }

    #[test]
    fn crb_halves_with_snr_and_diverges_at_endfire() {
        let cfg = isac();
        let w = sensing_beam(0.0, &cfg, 1);
        let c1 = rotatable_crb(0.0, &w, &cfg).unwrap();
        let c2 = rotatable_crb(0.0, &w, &RotatableIsacConfig { snr: 2.0, ..cfg.clone() }).unwrap();
        assert!((c1 / c2 - 2.0).abs() < 1e-12);
        let edge = std::f64::consts::FRAC_PI_2 - cfg.target_angle;
        let near = rotatable_crb(edge - 1e-6, &sensing_beam(edge - 1e-6, &cfg, 1), &cfg).unwrap();
        assert!(near > 1e6 * c1);
    }

    #[test]
    fn degenerate_rotation_gain() {
        assert!(max_rotation_gain(0.3, 0.3, 8).degenerate);
        for g in [-1.0, 0.0, 0.7] {
            assert!((rotation_gain(g, 0.2, 0.9, 1, 0.5) - 1.0).abs() < 1e-12);
            assert!((rotation_gain(g, 0.3, 0.3, 8, 0.5) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn typical_targets_at_subregion_centres() {
        let r = SensingRegion { phi_min: 0.0, phi_max: 1.0, theta: -0.2 };
        let t = typical_targets(&[r], 0.3, C64::new(1.0, 0.0)).unwrap();
        assert_eq!(t.len(), 4);
        assert!((t[0].phi - 0.125).abs() < 1e-15 && (t[3].phi - 0.875).abs() < 1e-15);
    }
}
