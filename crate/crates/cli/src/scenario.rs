//! Scenario files: TOML with angles in degrees and powers in dBm.

use serde::{Deserialize, Serialize};
use sixdma_core::channel::{AntennaPattern, LinkBudget};
use sixdma_core::experiments::{
    isac_example, ContinuousSetup, DiscreteSetup, InstantEstimationSetup, SensingSetup, StatEstimationSetup,
};
use sixdma_core::geometry::{ConstraintConfig, LocalArray, RotationAngles, SiteRegion, SurfacePose, Vec3};
use sixdma_core::optimize::{AoConfig, OfflineConfig, PsoConfig};
use sixdma_core::scenario::{sector_layout, Hotspot, PathLaw, ScenarioDistribution};
use sixdma_core::sensing::{PlacementBounds, RotatableIsacConfig, SensingRegion};
use sixdma_core::{Complex, Error, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Monte Carlo realizations for rate evaluation.
    pub trials: usize,
    pub site: Site,
    pub array: ArraySpec,
    pub pattern: PatternSpec,
    pub users: UsersSpec,
    pub layout: LayoutSpec,
    pub continuous: ContinuousSpec,
    pub discrete: DiscreteSpec,
    pub estimate: EstimateSpec,
    pub sense: SenseSpec,
    pub isac: IsacSpec,
    pub pathplan: PathplanSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            seed: 0,
            trials: 200,
            site: Site::default(),
            array: ArraySpec::default(),
            pattern: PatternSpec::default(),
            users: UsersSpec::default(),
            layout: LayoutSpec::default(),
            continuous: ContinuousSpec::default(),
            discrete: DiscreteSpec::default(),
            estimate: EstimateSpec::default(),
            sense: SenseSpec::default(),
            isac: IsacSpec::default(),
            pathplan: PathplanSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Site {
    pub wavelength_m: f64,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub surfaces: usize,
    pub region_radius_m: f64,
    pub min_distance_m: f64,
}

impl Default for Site {
    fn default() -> Self {
        Self {
            wavelength_m: 0.1,
            tx_power_dbm: 30.0,
            noise_power_dbm: -70.0,
            surfaces: 16,
            region_radius_m: 1.0,
            min_distance_m: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySpec {
    pub horizontal: usize,
    pub vertical: usize,
    pub spacing_wl: f64,
    /// Outward normal in the surface frame.
    pub normal: [f64; 3],
}

impl Default for ArraySpec {
    fn default() -> Self {
        Self { horizontal: 2, vertical: 2, spacing_wl: 0.5, normal: [1.0, 0.0, 0.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternKind {
    #[serde(rename = "3gpp")]
    ThreeGpp,
    #[serde(rename = "isotropic")]
    Isotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub max_gain_dbi: f64,
    pub beamwidth_h_deg: f64,
    pub beamwidth_v_deg: f64,
    pub side_lobe_db: f64,
    pub vertical_floor_db: f64,
}

impl Default for PatternSpec {
    fn default() -> Self {
        Self {
            kind: PatternKind::ThreeGpp,
            max_gain_dbi: 8.0,
            beamwidth_h_deg: 25.0,
            beamwidth_v_deg: 25.0,
            side_lobe_db: 25.0,
            vertical_floor_db: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotspotSpec {
    pub center_m: [f64; 2],
    pub radius_m: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersSpec {
    pub count: usize,
    pub xi: f64,
    pub bs_height_m: f64,
    pub annulus_m: [f64; 2],
    pub hotspots: Vec<HotspotSpec>,
    pub min_paths: usize,
    pub max_paths: usize,
    pub angular_spread_deg: f64,
    pub path_loss_exponent: f64,
    pub reference_gain_db: f64,
}

impl Default for UsersSpec {
    fn default() -> Self {
        let law = PathLaw::default();
        Self {
            count: 20,
            xi: 0.6,
            bs_height_m: 25.0,
            annulus_m: [20.0, 120.0],
            hotspots: vec![
                HotspotSpec { center_m: [45.0, 20.0], radius_m: 12.0, weight: 0.5 },
                HotspotSpec { center_m: [-60.0, -35.0], radius_m: 12.0, weight: 0.5 },
            ],
            min_paths: law.min_paths,
            max_paths: law.max_paths,
            angular_spread_deg: law.angular_spread.to_degrees(),
            path_loss_exponent: law.path_loss_exponent,
            reference_gain_db: law.reference_gain_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub position_m: [f64; 3],
    /// Euler angles (α, β, γ).
    pub rotation_deg: [f64; 3],
}

/// Fixed layout used by `simulate` and as the sector baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutSpec {
    pub sector_radius_m: f64,
    pub downtilt_deg: f64,
    pub spacing_m: f64,
    /// Explicit poses; when empty the sector layout is used.
    pub poses: Vec<PoseSpec>,
}

impl Default for LayoutSpec {
    fn default() -> Self {
        Self { sector_radius_m: 0.6, downtilt_deg: 10.0, spacing_m: 0.2, poses: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuousSpec {
    pub xi_sweep: Vec<f64>,
    pub optimize_trials: usize,
    pub candidates: usize,
    pub outer_iterations: usize,
}

impl Default for ContinuousSpec {
    fn default() -> Self {
        Self {
            xi_sweep: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            optimize_trials: 40,
            candidates: 200,
            outer_iterations: AoConfig::default().max_outer_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscreteSpec {
    pub power_dbm: Vec<f64>,
    /// `[positions, rotations]` pairs; positions must divide `max_positions`.
    pub grids: Vec<[usize; 2]>,
    pub surfaces: usize,
    pub users: usize,
    pub xi: f64,
    pub max_positions: usize,
    pub grid_radius_m: f64,
    pub tilt_deg: f64,
    pub optimize_trials: usize,
    pub csm_budget: usize,
}

impl Default for DiscreteSpec {
    fn default() -> Self {
        Self {
            power_dbm: vec![10.0, 20.0, 30.0, 40.0],
            grids: vec![[32, 2], [32, 4], [64, 2], [64, 4]],
            surfaces: 4,
            users: 8,
            xi: 0.25,
            max_positions: 64,
            grid_radius_m: 0.9,
            tilt_deg: 25.0,
            optimize_trials: 40,
            csm_budget: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSpec {
    pub snr_db: Vec<f64>,
    pub seeds: usize,
    pub users: usize,
    pub pilot_length: usize,
    pub candidates: usize,
    pub sampled: usize,
    pub slots: usize,
    pub grid_size: usize,
    pub fit_threshold_ratio: f64,
    pub support_threshold_ratio: f64,
    /// Surfaces picked in the pose-selection stage.
    pub surfaces: usize,
    pub instant_pilot_lengths: Vec<usize>,
    pub instant_users: usize,
    pub instant_active: usize,
    pub instant_snr_db: f64,
    pub instant_seeds: usize,
}

impl Default for EstimateSpec {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 10.0, 20.0],
            seeds: 20,
            users: 8,
            pilot_length: 8,
            candidates: 350,
            sampled: 32,
            slots: 64,
            grid_size: 256,
            fit_threshold_ratio: 0.001,
            support_threshold_ratio: 0.01,
            surfaces: 4,
            instant_pilot_lengths: vec![4, 8, 16],
            instant_users: 8,
            instant_active: 3,
            instant_snr_db: 10.0,
            instant_seeds: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub elevation_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SenseSpec {
    pub power_dbm: Vec<f64>,
    pub surfaces: usize,
    pub radius_m: f64,
    pub elevation_deg: [f64; 2],
    pub regions: Vec<RegionSpec>,
    pub subregion_deg: f64,
    pub frame_length: usize,
    pub random_layouts: usize,
    pub particles: usize,
    pub iterations: usize,
}

impl Default for SenseSpec {
    fn default() -> Self {
        Self {
            power_dbm: vec![0.0, 10.0, 20.0, 30.0],
            surfaces: 4,
            radius_m: 0.5,
            elevation_deg: [-90.0, 0.0],
            regions: vec![
                RegionSpec { azimuth_min_deg: 0.0, azimuth_max_deg: 60.0, elevation_deg: -20.0 },
                RegionSpec { azimuth_min_deg: -180.0, azimuth_max_deg: -120.0, elevation_deg: -35.0 },
            ],
            subregion_deg: 20.0,
            frame_length: 64,
            random_layouts: 20,
            particles: 30,
            iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub angle_deg: f64,
    pub gain_re: f64,
    pub gain_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsacSpec {
    pub weights: Vec<f64>,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub snapshots: usize,
    pub snr_db: f64,
    pub spacing_wl: f64,
    pub p_max_dbm: f64,
    pub noise_power_dbm: f64,
    pub rotation_range_deg: [f64; 2],
    pub grid_steps: usize,
    /// Target spatial angle; drawn from the seed when absent.
    pub target_deg: Option<f64>,
    /// Per-user paths; drawn from the seed when empty.
    pub users: Vec<Vec<PathSpec>>,
}

impl Default for IsacSpec {
    fn default() -> Self {
        Self {
            weights: (0..=10).map(|i| i as f64 / 10.0).collect(),
            tx_antennas: 8,
            rx_antennas: 8,
            snapshots: 32,
            snr_db: 10.0,
            spacing_wl: 0.5,
            p_max_dbm: 30.0,
            noise_power_dbm: 10.0,
            rotation_range_deg: [-90.0, 90.0],
            grid_steps: 180,
            target_deg: None,
            users: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathplanSpec {
    pub initial_m: Vec<[f64; 3]>,
    pub destinations_m: Vec<[f64; 3]>,
    /// Size of the random instance used when no positions are given.
    pub antennas: usize,
    pub extent_m: f64,
}

impl Default for PathplanSpec {
    fn default() -> Self {
        Self { initial_m: Vec::new(), destinations_m: Vec::new(), antennas: 6, extent_m: 1.0 }
    }
}

/// Parses a scenario, applying `key=value` overrides (dotted keys, TOML
/// values; bare words are taken as strings) before validation of the schema.
pub fn parse(text: &str, overrides: &[String]) -> std::result::Result<Scenario, String> {
    let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| format!("scenario parse error: {e}"))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    toml::Value::Table(value).try_into().map_err(|e: toml::de::Error| format!("scenario schema error: {e}"))
}

fn apply_override(root: &mut toml::Table, spec: &str) -> std::result::Result<(), String> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| format!("override `{spec}` is not key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` is malformed"));
    }
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| format!("override key `{key}`: `{p}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl Scenario {
    /// Canonical TOML of the resolved scenario.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn array(&self) -> Result<LocalArray<f64>> {
        let a = &self.array;
        if a.horizontal == 0 || a.vertical == 0 {
            return Err(Error::Invalid { field: "array.horizontal/vertical", reason: "must be ≥ 1".into() });
        }
        if !(a.spacing_wl > 0.0) {
            return Err(Error::Invalid { field: "array.spacing_wl", reason: "must be > 0".into() });
        }
        let upa = LocalArray::upa(a.horizontal, a.vertical, a.spacing_wl * self.site.wavelength_m)?;
        LocalArray::new(upa.offsets().to_vec(), Vec3::from_array(a.normal))
    }

    pub fn pattern(&self) -> Result<AntennaPattern<f64>> {
        let p = &self.pattern;
        let pattern = match p.kind {
            PatternKind::Isotropic => AntennaPattern::Isotropic,
            PatternKind::ThreeGpp => AntennaPattern::Directive {
                g_max_dbi: p.max_gain_dbi,
                theta_3db_deg: p.beamwidth_v_deg,
                phi_3db_deg: p.beamwidth_h_deg,
                g_s_db: p.side_lobe_db,
                g_v_db: p.vertical_floor_db,
            },
        };
        pattern.validate()?;
        Ok(pattern)
    }

    pub fn budget(&self) -> Result<LinkBudget<f64>> {
        LinkBudget::new(
            self.site.wavelength_m,
            dbm_to_watts(self.site.tx_power_dbm),
            dbm_to_watts(self.site.noise_power_dbm),
        )
    }

    pub fn constraints(&self) -> Result<ConstraintConfig<f64>> {
        ConstraintConfig::new(self.site.min_distance_m)
    }

    pub fn region(&self) -> Result<SiteRegion<f64>> {
        SiteRegion::sphere(Vec3::zero(), self.site.region_radius_m)
    }

    pub fn users(&self, seed: u64) -> Result<ScenarioDistribution> {
        let u = &self.users;
        let d = ScenarioDistribution {
            hotspots: u
                .hotspots
                .iter()
                .map(|h| Hotspot { center: h.center_m, radius: h.radius_m, weight: h.weight })
                .collect(),
            xi: u.xi,
            num_users: u.count,
            bs_height: u.bs_height_m,
            annulus: u.annulus_m,
            path_law: PathLaw {
                min_paths: u.min_paths,
                max_paths: u.max_paths,
                angular_spread: u.angular_spread_deg.to_radians(),
                path_loss_exponent: u.path_loss_exponent,
                reference_gain_db: u.reference_gain_db,
            },
            seed,
        };
        d.validate()?;
        Ok(d)
    }

    /// Explicit poses when given, otherwise the sector layout.
    pub fn layout(&self) -> Result<Vec<SurfacePose<f64>>> {
        let l = &self.layout;
        if !l.poses.is_empty() {
            return Ok(l
                .poses
                .iter()
                .map(|p| {
                    let r = p.rotation_deg.map(f64::to_radians);
                    SurfacePose::new(Vec3::from_array(p.position_m), RotationAngles::new(r[0], r[1], r[2]))
                })
                .collect());
        }
        if self.site.surfaces == 0 {
            return Err(Error::Invalid { field: "site.surfaces", reason: "must be ≥ 1".into() });
        }
        if !(0.0..90.0).contains(&l.downtilt_deg) {
            return Err(Error::Invalid { field: "layout.downtilt_deg", reason: "must lie in [0, 90)".into() });
        }
        Ok(sector_layout(self.site.surfaces, l.sector_radius_m, l.downtilt_deg.to_radians(), l.spacing_m))
    }

    pub fn continuous_setup(&self, xi: f64, seed: u64) -> Result<ContinuousSetup> {
        let c = &self.continuous;
        let mut users = self.users(seed)?;
        users.xi = xi;
        users.validate()?;
        Ok(ContinuousSetup {
            array: self.array()?,
            pattern: self.pattern()?,
            budget: self.budget()?,
            users,
            surfaces: self.site.surfaces,
            region_radius: self.site.region_radius_m,
            constraints: self.constraints()?,
            sector_radius: self.layout.sector_radius_m,
            sector_downtilt: self.layout.downtilt_deg.to_radians(),
            sector_spacing: self.layout.spacing_m,
            candidates: c.candidates,
            optimize_trials: c.optimize_trials,
            eval_trials: self.trials,
            ao: AoConfig { max_outer_iters: c.outer_iterations, ..AoConfig::default() },
        })
    }

    pub fn discrete_setup(&self, power_dbm: f64, seed: u64) -> Result<DiscreteSetup> {
        let d = &self.discrete;
        let mut users = self.users(seed)?;
        users.num_users = d.users;
        users.xi = d.xi;
        users.validate()?;
        Ok(DiscreteSetup {
            array: self.array()?,
            pattern: self.pattern()?,
            budget: self.budget()?.with_tx_power(dbm_to_watts(power_dbm))?,
            users,
            surfaces: d.surfaces,
            grid_radius: d.grid_radius_m,
            max_positions: d.max_positions,
            tilt: d.tilt_deg.to_radians(),
            constraints: self.constraints()?,
            optimize_trials: d.optimize_trials,
            eval_trials: self.trials,
            offline: OfflineConfig::default(),
            csm_budget: d.csm_budget,
        })
    }

    pub fn stat_setup(&self, seed: u64) -> Result<StatEstimationSetup> {
        let e = &self.estimate;
        let s = StatEstimationSetup {
            array: self.array()?,
            pattern: self.pattern()?,
            wavelength: self.site.wavelength_m,
            users: e.users,
            pilot_length: e.pilot_length,
            candidates: e.candidates,
            sampled: e.sampled,
            slots: e.slots,
            grid_size: e.grid_size,
            fit_threshold_ratio: e.fit_threshold_ratio,
            support_threshold_ratio: e.support_threshold_ratio,
            ..StatEstimationSetup::default_with_seed(seed)
        };
        s.validate()?;
        Ok(s)
    }

    pub fn instant_setup(&self, seed: u64) -> InstantEstimationSetup {
        let e = &self.estimate;
        InstantEstimationSetup {
            antennas: self.array.horizontal * self.array.vertical,
            users: e.instant_users,
            active: e.instant_active,
            snr_db: e.instant_snr_db,
            seed,
        }
    }

    pub fn sensing_setup(&self, seed: u64) -> Result<SensingSetup> {
        let s = &self.sense;
        if s.regions.is_empty() {
            return Err(Error::Invalid { field: "sense.regions", reason: "need at least one region".into() });
        }
        Ok(SensingSetup {
            array: self.array()?,
            pattern: self.pattern()?,
            budget: self.budget()?,
            regions: s
                .regions
                .iter()
                .map(|r| SensingRegion {
                    phi_min: r.azimuth_min_deg.to_radians(),
                    phi_max: r.azimuth_max_deg.to_radians(),
                    theta: r.elevation_deg.to_radians(),
                })
                .collect(),
            subregion: s.subregion_deg.to_radians(),
            frame_length: s.frame_length,
            bounds: PlacementBounds {
                surfaces: s.surfaces,
                radius: s.radius_m,
                elevation: s.elevation_deg.map(f64::to_radians),
            },
            constraints: self.constraints()?,
            random_layouts: s.random_layouts,
            pso: PsoConfig { particles: s.particles, iterations: s.iterations, seed, ..PsoConfig::default() },
            seed,
        })
    }

    pub fn isac_config(&self, seed: u64) -> Result<RotatableIsacConfig> {
        let i = &self.isac;
        let drawn = isac_example(seed);
        let users = if i.users.is_empty() {
            drawn.users
        } else {
            i.users
                .iter()
                .map(|paths| {
                    paths.iter().map(|p| (p.angle_deg.to_radians(), Complex::new(p.gain_re, p.gain_im))).collect()
                })
                .collect()
        };
        let cfg = RotatableIsacConfig {
            m_t: i.tx_antennas,
            m_r: i.rx_antennas,
            snapshots: i.snapshots,
            snr: db_to_linear(i.snr_db),
            spacing: i.spacing_wl,
            wavelength: self.site.wavelength_m,
            target_angle: i.target_deg.map_or(drawn.target_angle, f64::to_radians),
            users,
            w_comm: 0.5,
            w_sense: 0.5,
            p_max: dbm_to_watts(i.p_max_dbm),
            noise_power: dbm_to_watts(i.noise_power_dbm),
            gamma_bounds: i.rotation_range_deg.map(f64::to_radians),
            grid_steps: i.grid_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse("", &[]).unwrap(), Scenario::default());
    }

    #[test]
    fn overrides_replace_nested_values() {
        let s =
            parse("[users]\nxi = 0.1\n", &set(&["users.xi=0.9", "name=cell-a", "discrete.grids=[[8, 1]]"])).unwrap();
        assert_eq!(s.users.xi, 0.9);
        assert_eq!(s.name, "cell-a");
        assert_eq!(s.discrete.grids, vec![[8, 1]]);
    }

    #[test]
    fn malformed_overrides_are_rejected() {
        assert!(parse("", &set(&["users.xi"])).is_err());
        assert!(parse("", &set(&["users..xi=1"])).is_err());
        assert!(parse("", &set(&["seed.inner=1"])).is_err());
        assert!(parse("", &set(&["users.colour=1"])).unwrap_err().contains("schema"));
    }

    #[test]
    fn canonical_form_round_trips() {
        let s = parse("", &set(&["seed=42", "site.surfaces=3"])).unwrap();
        assert_eq!(parse(&s.canonical(), &[]).unwrap(), s);
    }

    #[test]
    fn decibel_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
    }
}
