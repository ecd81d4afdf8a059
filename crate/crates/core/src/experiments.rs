//! Desk-scale experiment drivers shared by the command-line tool and the
//! acceptance tests.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{assemble_channel_matrix, directional_gain, AntennaPattern, LinkBudget};
use crate::error::{Error, Result};
use crate::estimate::{
    mle_power_estimate, nmse, nmse_real, reconstruct_statistics, simulate_pilot_rx, sparsity_aided_ls,
    threshold_sparsity, MleConfig, PilotConfig, ReconstructedStats, SparsityStats,
};
use crate::geometry::{
    check_all, fibonacci_sphere, rotation_matrix, ConstraintConfig, DiscreteGrid, LocalArray, RotationAngles,
    SiteRegion, SurfacePose, Vec3,
};
use crate::linalg::CMatrix;
use crate::metrics::{capacity_upper_bound, instantaneous_capacity, monte_carlo_avg_capacity, McEstimate};
use crate::optimize::PsoConfig;
use crate::optimize::{
    ao_optimize, csm_online, discrete_offline, greedy_sphere_layout, AoConfig, AoMode, CsmConfig, DiscreteAssignment,
    FrozenObjective, OfflineConfig,
};
use crate::scenario::{
    complex_normal, draw_realizations, sector_layout, trial_rng, RealizationSource, ScenarioDistribution,
};
use crate::sensing::{
    crb_doa, optimize_crb_poses, ora_solve, spherical_placement, typical_targets, CrbPlacement, OraSolution,
    PlacementBounds, RotatableIsacConfig, SensingRegion, SensingScenario,
};

/// Seed offset separating evaluation draws from the draws used while optimizing.
const EVAL_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;
/// First RNG stream for experiment draws; stream 0 belongs to the pilots.
const DRAW_STREAM: u64 = 1 << 32;

/// Continuous placement comparison: fixed sectors, rotation-only and full
/// position+rotation optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSetup {
    pub array: LocalArray<f64>,
    pub pattern: AntennaPattern<f64>,
    pub budget: LinkBudget<f64>,
    pub users: ScenarioDistribution,
    pub surfaces: usize,
    pub region_radius: f64,
    pub constraints: ConstraintConfig<f64>,
    /// Fixed sector layout: distance from the CPU and downtilt (rad).
    pub sector_radius: f64,
    pub sector_downtilt: f64,
    pub sector_spacing: f64,
    /// Candidate facing directions for the greedy initializer.
    pub candidates: usize,
    /// Realizations frozen for optimization.
    pub optimize_trials: usize,
    /// Independent realizations for the reported rates.
    pub eval_trials: usize,
    pub ao: AoConfig,
}

/// Average sum rate of the three schemes on independent realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousOutcome {
    pub fpa: McEstimate,
    pub rotation_only: McEstimate,
    pub six_dma: McEstimate,
    pub six_dma_poses: Vec<SurfacePose<f64>>,
}

impl ContinuousSetup {
    /// Two-hotspot cell with a 25 m high site and a 2×2 directive array per surface.
    pub fn two_hotspot(xi: f64, seed: u64) -> Self {
        use crate::scenario::{Hotspot, PathLaw};
        let wavelength = 0.1;
        Self {
            array: LocalArray::upa(2, 2, wavelength / 2.0).expect("valid array"),
            pattern: AntennaPattern::three_gpp(),
            budget: LinkBudget::new(wavelength, 1.0, 1e-10).expect("valid budget"),
            users: ScenarioDistribution {
                hotspots: vec![
                    Hotspot { center: [45.0, 20.0], radius: 12.0, weight: 0.5 },
                    Hotspot { center: [-60.0, -35.0], radius: 12.0, weight: 0.5 },
                ],
                xi,
                num_users: 20,
                bs_height: 25.0,
                annulus: [20.0, 120.0],
                path_law: PathLaw::default(),
                seed,
            },
            surfaces: 16,
            region_radius: 1.0,
            constraints: ConstraintConfig::new(0.2).expect("positive"),
            sector_radius: 0.6,
            sector_downtilt: 10f64.to_radians(),
            sector_spacing: 0.2,
            candidates: 200,
            optimize_trials: 40,
            eval_trials: 200,
            ao: AoConfig::default(),
        }
    }

    pub fn region(&self) -> SiteRegion<f64> {
        SiteRegion::sphere(Vec3::zero(), self.region_radius).expect("positive radius")
    }

    pub fn fpa_layout(&self) -> Vec<SurfacePose<f64>> {
        sector_layout(self.surfaces, self.sector_radius, self.sector_downtilt, self.sector_spacing)
    }

    fn objective(&self) -> Result<FrozenObjective> {
        self.users.validate()?;
        FrozenObjective::new(
            self.array.clone(),
            self.pattern,
            self.budget,
            draw_realizations(&self.users, self.optimize_trials),
        )
    }

    fn evaluate(&self, poses: &[SurfacePose<f64>]) -> Result<McEstimate> {
        let eval = ScenarioDistribution { seed: self.users.seed ^ EVAL_SEED_OFFSET, ..self.users.clone() };
        monte_carlo_avg_capacity(
            poses,
            std::slice::from_ref(&self.array),
            &self.pattern,
            &eval,
            &self.budget,
            self.eval_trials,
        )
    }

    /// Runs all three schemes.
    pub fn run(&self) -> Result<ContinuousOutcome> {
        let objective = self.objective()?;
        let region = self.region();
        let fpa = self.fpa_layout();
        let rot = ao_optimize(
            &fpa,
            &objective,
            &self.constraints,
            &region,
            &AoConfig { mode: AoMode::RotationOnly, ..self.ao },
        )?;
        let from_fpa =
            ao_optimize(&fpa, &objective, &self.constraints, &region, &AoConfig { mode: AoMode::Full, ..self.ao })?;
        let radius = self.region_radius * 0.9;
        let cands: Vec<SurfacePose<f64>> = fibonacci_sphere::<f64>(self.candidates, false)
            .into_iter()
            .map(|d| SurfacePose::facing(d.scale(radius), d))
            .collect();
        let greedy = greedy_sphere_layout(&objective, self.surfaces, &cands, &self.constraints, &region)?;
        let from_greedy =
            ao_optimize(&greedy, &objective, &self.constraints, &region, &AoConfig { mode: AoMode::Full, ..self.ao })?;
        let best = if from_greedy.objective() > from_fpa.objective() { from_greedy } else { from_fpa };
        Ok(ContinuousOutcome {
            fpa: self.evaluate(&fpa)?,
            rotation_only: self.evaluate(&rot.poses)?,
            six_dma: self.evaluate(&best.poses)?,
            six_dma_poses: best.poses,
        })
    }
}

/// Discrete grid comparison: relax-and-quantize offline design versus
/// conditional-sample-mean online selection on nested grids.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSetup {
    pub array: LocalArray<f64>,
    pub pattern: AntennaPattern<f64>,
    pub budget: LinkBudget<f64>,
    pub users: ScenarioDistribution,
    pub surfaces: usize,
    /// Radius of the sphere carrying the candidate positions.
    pub grid_radius: f64,
    /// Largest grid; smaller grids take every other position.
    pub max_positions: usize,
    /// Tilt of the non-radial rotation options (rad).
    pub tilt: f64,
    pub constraints: ConstraintConfig<f64>,
    pub optimize_trials: usize,
    pub eval_trials: usize,
    pub offline: OfflineConfig,
    pub csm_budget: usize,
}

impl DiscreteSetup {
    pub fn small(seed: u64) -> Self {
        use crate::scenario::{Hotspot, PathLaw};
        let wavelength = 0.1;
        Self {
            array: LocalArray::upa(2, 2, wavelength / 2.0).expect("valid array"),
            pattern: AntennaPattern::three_gpp(),
            budget: LinkBudget::new(wavelength, 1.0, 1e-10).expect("valid budget"),
            users: ScenarioDistribution {
                hotspots: vec![
                    Hotspot { center: [45.0, 20.0], radius: 12.0, weight: 0.5 },
                    Hotspot { center: [-60.0, -35.0], radius: 12.0, weight: 0.5 },
                ],
                xi: 0.25,
                num_users: 8,
                bs_height: 25.0,
                annulus: [20.0, 120.0],
                path_law: PathLaw::default(),
                seed,
            },
            surfaces: 4,
            grid_radius: 0.9,
            max_positions: 64,
            tilt: 25f64.to_radians(),
            constraints: ConstraintConfig::new(0.2).expect("positive"),
            optimize_trials: 40,
            eval_trials: 200,
            offline: OfflineConfig::default(),
            csm_budget: 400,
        }
    }

    /// Grid with `positions` points (nested in the largest grid) and `rotations` options each.
    pub fn grid(&self, positions: usize, rotations: usize) -> Result<DiscreteGrid<f64>> {
        if positions == 0 || positions > self.max_positions || !self.max_positions.is_multiple_of(positions) {
            return Err(Error::invalid("grid positions", format!("must divide {}", self.max_positions)));
        }
        if !(1..=4).contains(&rotations) {
            return Err(Error::invalid("grid rotations", "must be 1 to 4"));
        }
        let stride = self.max_positions / positions;
        let all: Vec<Vec3<f64>> = fibonacci_sphere(self.max_positions, false);
        let dirs: Vec<Vec3<f64>> = all.into_iter().step_by(stride).collect();
        let (ct, st) = (self.tilt.cos(), self.tilt.sin());
        let rots = dirs
            .iter()
            .map(|&d| {
                // tangent frame: e1 towards −z (down), e2 horizontal
                let z = Vec3::new(0.0, 0.0, 1.0);
                let e2 = z.cross(d).normalized().unwrap_or(Vec3::new(0.0, 1.0, 0.0));
                let e1 = d.cross(e2);
                let options = [d, d.scale(ct) + e1.scale(-st), d.scale(ct) + e2.scale(st), d.scale(ct) + e2.scale(-st)];
                options[..rotations].iter().map(|&n| RotationAngles::facing(n, 0.0)).collect()
            })
            .collect();
        DiscreteGrid::new(dirs.iter().map(|d| d.scale(self.grid_radius)).collect(), rots)
    }

    fn objective(&self) -> Result<FrozenObjective> {
        self.users.validate()?;
        FrozenObjective::new(
            self.array.clone(),
            self.pattern,
            self.budget,
            draw_realizations(&self.users, self.optimize_trials),
        )
    }

    fn eval_source(&self) -> ScenarioDistribution {
        ScenarioDistribution { seed: self.users.seed ^ EVAL_SEED_OFFSET, ..self.users.clone() }
    }

    /// Offline design on the given grid, rated on independent realizations.
    pub fn run_offline(&self, positions: usize, rotations: usize) -> Result<(DiscreteAssignment, McEstimate)> {
        let grid = self.grid(positions, rotations)?;
        let res = discrete_offline(&grid, self.surfaces, &self.objective()?, &self.constraints, &self.offline)?;
        let est = monte_carlo_avg_capacity(
            &res.assignment.poses(&grid),
            std::slice::from_ref(&self.array),
            &self.pattern,
            &self.eval_source(),
            &self.budget,
            self.eval_trials,
        )?;
        Ok((res.assignment, est))
    }

    /// Online selection from `csm_budget` realized-rate samples (one fresh
    /// realization per sample), rated on independent realizations.
    pub fn run_csm(&self, positions: usize, rotations: usize) -> Result<(DiscreteAssignment, McEstimate)> {
        let grid = self.grid(positions, rotations)?;
        let arrays = [self.array.clone()];
        let mut sampler = |a: &DiscreteAssignment, i: usize| {
            let users = self.users.realization(i as u64);
            assemble_channel_matrix(&a.poses(&grid), &arrays, &self.pattern, &users, &self.budget)
                .and_then(|h| instantaneous_capacity(&h, &self.budget))
                .unwrap_or(0.0)
        };
        let cfg = CsmConfig { budget: self.csm_budget, seed: self.users.seed };
        let a = csm_online(&grid, self.surfaces, &self.array, &self.constraints, &mut sampler, &cfg)?;
        let est = monte_carlo_avg_capacity(
            &a.poses(&grid),
            &arrays,
            &self.pattern,
            &self.eval_source(),
            &self.budget,
            self.eval_trials,
        )?;
        Ok((a, est))
    }
}

/// Statistical CSI estimation: covariance MLE at a subset of candidate
/// rotations, then power/DOA reconstruction over every candidate.
///
/// Candidate surfaces face the upper hemisphere (a ground site serving
/// elevated users), so the reconstruction grid covers that hemisphere only.
#[derive(Debug, Clone, PartialEq)]
pub struct StatEstimationSetup {
    pub array: LocalArray<f64>,
    pub pattern: AntennaPattern<f64>,
    pub wavelength: f64,
    pub users: usize,
    pub pilot_length: usize,
    /// Candidate rotations (quasi-uniform facing directions).
    pub candidates: usize,
    /// Rotations actually measured, spread evenly over the candidates.
    pub sampled: usize,
    /// Pilot slots stacked per measured rotation.
    pub slots: usize,
    pub grid_size: usize,
    /// Per-user average power is drawn uniformly from this range.
    pub power_range: [f64; 2],
    /// Threshold selecting the measured rotations used in the DOA fit, as a
    /// fraction of the largest measured power.
    pub fit_threshold_ratio: f64,
    /// Threshold for the reconstructed sparsity pattern, same scale.
    pub support_threshold_ratio: f64,
    pub mle: MleConfig,
    pub seed: u64,
}

/// Stage outputs and errors of one statistical estimation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct StatEstimationOutcome {
    /// NMSE of the reconstructed powers over every candidate rotation.
    pub nmse: f64,
    /// NMSE of the MLE powers at the measured rotations.
    pub nmse_sampled: f64,
    /// Users whose DOA was recovered exactly.
    pub doa_hits: usize,
    pub sampled: Vec<usize>,
    pub measured: SparsityStats,
    pub reconstructed: ReconstructedStats,
}

/// Three-stage run: statistics, pose selection on the reconstructed powers,
/// then instantaneous estimation at the selected rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub stats: StatEstimationOutcome,
    /// Candidate rotations chosen in stage two.
    pub selected: Vec<usize>,
    /// Capacity bound of the selection on the reconstructed and the true powers.
    pub bound_estimated: f64,
    pub bound_true: f64,
    /// Instantaneous NMSE at the selected rotations.
    pub instant: InstantEstimationOutcome,
}

struct Draw {
    doas: Vec<Vec3<f64>>,
    noise: f64,
    pilots: PilotConfig,
    candidates: Vec<RotationAngles<f64>>,
    truth: Vec<Vec<f64>>,
}

impl StatEstimationSetup {
    pub fn default_with_seed(seed: u64) -> Self {
        let wavelength = 0.1;
        Self {
            array: LocalArray::upa(2, 2, wavelength / 2.0).expect("valid array"),
            pattern: AntennaPattern::three_gpp(),
            wavelength,
            users: 8,
            pilot_length: 8,
            candidates: 350,
            sampled: 32,
            slots: 64,
            grid_size: 256,
            power_range: [0.5, 1.0],
            fit_threshold_ratio: 0.001,
            support_threshold_ratio: 0.01,
            mle: MleConfig::default(),
            seed,
        }
    }

    pub fn candidate_rotations(&self) -> Vec<RotationAngles<f64>> {
        fibonacci_sphere::<f64>(self.candidates, true).into_iter().map(|d| RotationAngles::facing(d, 0.0)).collect()
    }

    pub fn sampled_indices(&self) -> Vec<usize> {
        (0..self.sampled).map(|i| i * self.candidates / self.sampled).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.pilot_length == 0 || self.slots == 0 {
            return Err(Error::invalid("estimation setup", "users, pilot length and slots must be ≥ 1"));
        }
        if self.sampled == 0 || self.sampled > self.candidates {
            return Err(Error::invalid("sampled rotations", "must be between 1 and the candidate count"));
        }
        if self.users > self.grid_size {
            return Err(Error::invalid("grid size", "need at least one grid DOA per user"));
        }
        if !(self.power_range[0] > 0.0 && self.power_range[0] <= self.power_range[1]) {
            return Err(Error::invalid("power range", "need 0 < low ≤ high"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be > 0"));
        }
        for r in [self.fit_threshold_ratio, self.support_threshold_ratio] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::invalid("threshold ratio", "must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    fn draw(&self, snr_db: f64) -> Result<Draw> {
        self.validate()?;
        let n = self.array.len() as f64;
        let mut rng = trial_rng(self.seed, DRAW_STREAM);
        // on-grid DOAs: distinct points of the reconstruction grid
        let grid: Vec<Vec3<f64>> = fibonacci_sphere(self.grid_size, true);
        let picks = rand::seq::index::sample(&mut rng, self.grid_size, self.users).into_vec();
        let doas: Vec<Vec3<f64>> = picks.iter().map(|&i| grid[i]).collect();
        let [lo, hi] = self.power_range;
        let s: Vec<f64> = (0..self.users).map(|_| rng.random_range(lo..=hi)).collect();
        let candidates = self.candidate_rotations();
        let truth = candidates
            .iter()
            .map(|&u| (0..self.users).map(|k| n * directional_gain(&self.pattern, u, doas[k]) * s[k]).collect())
            .collect();
        Ok(Draw {
            doas,
            noise: 0.5 * (lo + hi) / 10f64.powf(snr_db / 10.0),
            pilots: PilotConfig::generate(self.pilot_length, self.users, self.seed)?,
            candidates,
            truth,
        })
    }

    /// One slot of the N × K channel at rotation `u`: a fixed line-of-sight
    /// array response per user with a fresh random phase.
    fn slot_channel<R: Rng>(
        &self,
        u: RotationAngles<f64>,
        powers: &[f64],
        doas: &[Vec3<f64>],
        rng: &mut R,
    ) -> CMatrix<f64> {
        let n = self.array.len();
        let r = rotation_matrix(u);
        let kw = 2.0 * std::f64::consts::PI / self.wavelength;
        let mut h = CMatrix::zeros(n, self.users);
        for k in 0..self.users {
            let amp = (powers[k] / n as f64).sqrt();
            let psi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            for (a, off) in self.array.offsets().iter().enumerate() {
                h[(a, k)] = Complex::from_polar(amp, psi + kw * doas[k].dot(r.mul_vec(*off)));
            }
        }
        h
    }

    fn stage_one(&self, d: &Draw) -> Result<StatEstimationOutcome> {
        let n = self.array.len();
        let sampled_idx = self.sampled_indices();
        let estimates: Vec<Result<Vec<f64>>> = sampled_idx
            .par_iter()
            .enumerate()
            .map(|(i, &m)| {
                let mut rng = trial_rng(self.seed, DRAW_STREAM + 1 + i as u64);
                let mut y = CMatrix::zeros(self.pilot_length, n * self.slots);
                let all = vec![true; self.users];
                for t in 0..self.slots {
                    let h = self.slot_channel(d.candidates[m], &d.truth[m], &d.doas, &mut rng);
                    let yt = simulate_pilot_rx(&h, &all, d.pilots.matrix(), d.noise, &mut rng)?;
                    for a in 0..n {
                        for p in 0..self.pilot_length {
                            y[(p, t * n + a)] = yt[(p, a)];
                        }
                    }
                }
                let eta = mle_power_estimate(&y, d.pilots.matrix(), d.noise, &self.mle)?.eta;
                Ok(eta.iter().map(|e| n as f64 * e).collect())
            })
            .collect();
        let p_bar = estimates.into_iter().collect::<Result<Vec<_>>>()?;
        let truth_sampled: Vec<Vec<f64>> = sampled_idx.iter().map(|&m| d.truth[m].clone()).collect();
        let nmse_sampled = nmse_real(&p_bar, &truth_sampled)?;
        let peak = p_bar.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let measured = threshold_sparsity(p_bar, self.fit_threshold_ratio * peak)?;
        let sampled: Vec<RotationAngles<f64>> = sampled_idx.iter().map(|&m| d.candidates[m]).collect();
        let mut reconstructed =
            reconstruct_statistics(&measured, &sampled, &d.candidates, &self.array, &self.pattern, self.grid_size)?;
        let support = self.support_threshold_ratio * peak;
        reconstructed.z_hat =
            reconstructed.p_hat.iter().map(|row| row.iter().map(|&v| v > support).collect()).collect();
        let doa_hits =
            reconstructed.f.iter().zip(&d.doas).filter(|(f, t)| f.is_some_and(|f| f.distance(**t) < 1e-12)).count();
        Ok(StatEstimationOutcome {
            nmse: nmse_real(&reconstructed.p_hat, &d.truth)?,
            nmse_sampled,
            doa_hits,
            sampled: sampled_idx,
            measured,
            reconstructed,
        })
    }

    /// Statistical stage only, at the given SNR (mean user power over noise power, dB).
    pub fn run(&self, snr_db: f64) -> Result<StatEstimationOutcome> {
        self.stage_one(&self.draw(snr_db)?)
    }

    /// All three stages. Stage two greedily adds the candidate rotation that
    /// most raises the capacity bound on the reconstructed powers; stage three
    /// estimates one channel realization per selected rotation from
    /// `instant_pilots` pilots, using the reconstructed support.
    pub fn pipeline(&self, snr_db: f64, surfaces: usize, instant_pilots: usize) -> Result<PipelineOutcome> {
        if surfaces == 0 || surfaces > self.candidates {
            return Err(Error::invalid("surfaces", "must be between 1 and the candidate count"));
        }
        let d = self.draw(snr_db)?;
        let stats = self.stage_one(&d)?;
        let p_hat = &stats.reconstructed.p_hat;
        let budget = LinkBudget::new(self.wavelength, 1.0, d.noise)?;
        let mut selected: Vec<usize> = Vec::with_capacity(surfaces);
        for _ in 0..surfaces {
            let mut best: Option<(usize, f64)> = None;
            for m in (0..self.candidates).filter(|m| !selected.contains(m)) {
                let rows: Vec<Vec<f64>> = selected.iter().chain([&m]).map(|&i| p_hat[i].clone()).collect();
                let v = capacity_upper_bound(&rows, &budget)?;
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((m, v));
                }
            }
            selected.push(best.expect("enough candidates").0);
        }
        let rows = |p: &[Vec<f64>]| selected.iter().map(|&i| p[i].clone()).collect::<Vec<_>>();
        let bound_estimated = capacity_upper_bound(&rows(p_hat), &budget)?;
        let bound_true = capacity_upper_bound(&rows(&d.truth), &budget)?;

        let pilots = PilotConfig::generate(instant_pilots, self.users, self.seed ^ EVAL_SEED_OFFSET)?;
        let mut rng = trial_rng(self.seed, DRAW_STREAM - 1);
        let all = vec![true; self.users];
        let (mut truth, mut plain, mut sparse) = (Vec::new(), Vec::new(), Vec::new());
        for &m in &selected {
            let h = self.slot_channel(d.candidates[m], &d.truth[m], &d.doas, &mut rng);
            let y = simulate_pilot_rx(&h, &all, pilots.matrix(), d.noise, &mut rng)?;
            truth.extend((0..self.users).flat_map(|k| (0..h.rows()).map(move |a| (a, k))).map(|(a, k)| h[(a, k)]));
            plain.extend(sparsity_aided_ls(&y, pilots.matrix(), &all)?);
            sparse.extend(sparsity_aided_ls(&y, pilots.matrix(), &stats.reconstructed.z_hat[m])?);
        }
        Ok(PipelineOutcome {
            stats,
            selected,
            bound_estimated,
            bound_true,
            instant: InstantEstimationOutcome { plain: nmse(&plain, &truth)?, sparse: nmse(&sparse, &truth)? },
        })
    }
}

/// Instantaneous channel estimation with and without a known user support.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantEstimationSetup {
    pub antennas: usize,
    pub users: usize,
    /// Users with a non-negligible channel at the measured pose.
    pub active: usize,
    pub snr_db: f64,
    pub seed: u64,
}

/// NMSE of plain LS (all users) and support-restricted LS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantEstimationOutcome {
    pub plain: f64,
    pub sparse: f64,
}

impl InstantEstimationSetup {
    pub fn default_with_seed(seed: u64) -> Self {
        Self { antennas: 4, users: 8, active: 3, snr_db: 10.0, seed }
    }

    pub fn run(&self, pilot_length: usize) -> Result<InstantEstimationOutcome> {
        if self.antennas == 0 || self.active == 0 || self.active > self.users {
            return Err(Error::invalid("instantaneous setup", "need antennas ≥ 1 and 1 ≤ active ≤ users"));
        }
        let mut rng = trial_rng(self.seed, DRAW_STREAM);
        let active = rand::seq::index::sample(&mut rng, self.users, self.active).into_vec();
        let z: Vec<bool> = (0..self.users).map(|k| active.contains(&k)).collect();
        let h = CMatrix::from_fn(self.antennas, self.users, |_, k| {
            if z[k] {
                complex_normal(&mut rng, 1.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let pilots = PilotConfig::generate(pilot_length, self.users, self.seed)?;
        let noise = 10f64.powf(-self.snr_db / 10.0);
        let y = simulate_pilot_rx(&h, &vec![true; self.users], pilots.matrix(), noise, &mut rng)?;
        let truth: Vec<Complex<f64>> =
            (0..self.users).flat_map(|k| (0..self.antennas).map(move |a| (a, k))).map(|(a, k)| h[(a, k)]).collect();
        let plain = sparsity_aided_ls(&y, pilots.matrix(), &vec![true; self.users])?;
        let sparse = sparsity_aided_ls(&y, pilots.matrix(), &z)?;
        Ok(InstantEstimationOutcome { plain: nmse(&plain, &truth)?, sparse: nmse(&sparse, &truth)? })
    }
}

/// Sensing placement comparison: swarm-optimized outward-facing layout versus
/// random feasible layouts, on the CRB summed over typical targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingSetup {
    pub array: LocalArray<f64>,
    pub pattern: AntennaPattern<f64>,
    pub budget: LinkBudget<f64>,
    pub regions: Vec<SensingRegion>,
    /// Largest azimuth width of one typical-target subregion (rad).
    pub subregion: f64,
    pub frame_length: usize,
    pub bounds: PlacementBounds,
    pub constraints: ConstraintConfig<f64>,
    pub random_layouts: usize,
    pub pso: PsoConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingOutcome {
    pub optimized: CrbPlacement,
    /// CRB of each random feasible layout, in draw order.
    pub random: Vec<f64>,
}

impl SensingOutcome {
    pub fn best_random(&self) -> f64 {
        self.random.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl SensingSetup {
    pub fn default_with_seed(seed: u64) -> Self {
        let wavelength = 0.1;
        Self {
            array: LocalArray::upa(2, 2, wavelength / 2.0).expect("valid array"),
            pattern: AntennaPattern::three_gpp(),
            budget: LinkBudget::new(wavelength, 1.0, 1e-10).expect("valid budget"),
            regions: vec![
                SensingRegion { phi_min: 0.0, phi_max: 60f64.to_radians(), theta: -20f64.to_radians() },
                SensingRegion {
                    phi_min: -180f64.to_radians(),
                    phi_max: -120f64.to_radians(),
                    theta: -35f64.to_radians(),
                },
            ],
            subregion: 20f64.to_radians(),
            frame_length: 64,
            bounds: PlacementBounds { surfaces: 4, radius: 0.5, elevation: [-std::f64::consts::FRAC_PI_2, 0.0] },
            constraints: ConstraintConfig::new(0.2).expect("positive"),
            random_layouts: 20,
            pso: PsoConfig { seed, ..PsoConfig::default() },
            seed,
        }
    }

    pub fn scenario(&self, power: f64) -> Result<SensingScenario> {
        let targets = typical_targets(&self.regions, self.subregion, Complex::new(1.0, 0.0))?;
        let antennas = self.bounds.surfaces * self.array.len();
        SensingScenario::new(targets, SensingScenario::isotropic_signal(antennas, power), self.frame_length)
    }

    fn feasible(&self, poses: &[SurfacePose<f64>]) -> Result<bool> {
        let region = SiteRegion::sphere(Vec3::zero(), self.bounds.radius * (1.0 + 1e-9))?;
        Ok(check_all(poses, std::slice::from_ref(&self.array), &self.constraints, &region).is_feasible())
    }

    /// Uniform draws in the search box, rejected until the layout is feasible.
    pub fn random_feasible_params<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let pi = std::f64::consts::PI;
        let [lo, hi] = self.bounds.elevation;
        for _ in 0..10_000 {
            let params: Vec<f64> = (0..self.bounds.surfaces)
                .flat_map(|_| [rng.random_range(-pi..pi), lo + (hi - lo) * rng.random::<f64>()])
                .collect();
            if self.feasible(&spherical_placement(&params, self.bounds.radius))? {
                return Ok(params);
            }
        }
        Err(Error::Infeasible("no feasible random sensing layout in 10000 draws".into()))
    }

    pub fn run(&self, power: f64) -> Result<SensingOutcome> {
        let scenario = self.scenario(power)?;
        let mut rng = trial_rng(self.seed, DRAW_STREAM);
        let mut random = Vec::with_capacity(self.random_layouts);
        for _ in 0..self.random_layouts {
            let params = self.random_feasible_params(&mut rng)?;
            let poses = spherical_placement(&params, self.bounds.radius);
            random.push(crb_doa(&poses, &self.array, &self.pattern, &scenario, &self.budget)?);
        }
        // the swarm starts from its own feasible draws
        let mut rng = trial_rng(self.seed, DRAW_STREAM + 1);
        let initial =
            (0..self.pso.particles).map(|_| self.random_feasible_params(&mut rng)).collect::<Result<Vec<_>>>()?;
        let optimized = optimize_crb_poses(
            &self.array,
            &self.pattern,
            &scenario,
            &self.budget,
            &self.bounds,
            &self.constraints,
            &initial,
            &self.pso,
        )?;
        Ok(SensingOutcome { optimized, random })
    }
}

/// Rotatable-array ISAC instance with two multipath users drawn from `seed`.
pub fn isac_example(seed: u64) -> RotatableIsacConfig {
    let mut rng = trial_rng(seed, DRAW_STREAM);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let users = (0..2)
        .map(|_| (0..2).map(|_| (rng.random_range(-half_pi..half_pi), complex_normal(&mut rng, 1.0))).collect())
        .collect();
    RotatableIsacConfig {
        m_t: 8,
        m_r: 8,
        snapshots: 32,
        snr: 10.0,
        spacing: 0.5,
        wavelength: 0.1,
        target_angle: rng.random_range(-half_pi..half_pi),
        users,
        w_comm: 0.5,
        w_sense: 0.5,
        p_max: 1.0,
        noise_power: 0.01,
        gamma_bounds: [-half_pi, half_pi],
        grid_steps: 180,
    }
}

/// Solves the weighted trade-off at each communication weight `ω` (sensing weight `1 − ω`).
pub fn isac_sweep(cfg: &RotatableIsacConfig, weights: &[f64]) -> Result<Vec<OraSolution>> {
    weights
        .iter()
        .map(|&w| {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid("communication weight", "must lie in [0, 1]"));
            }
            ora_solve(&RotatableIsacConfig { w_comm: w, w_sense: 1.0 - w, ..cfg.clone() })
        })
        .collect()
}
