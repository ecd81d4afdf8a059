//! One function per subcommand. Each writes its tables through [`OutputDir`].

use rayon::prelude::*;
use sixdma_core::channel::assemble_channel_matrix;
use sixdma_core::experiments::{isac_sweep, StatEstimationOutcome};
use sixdma_core::geometry::{check_all, spherical_angles, SurfacePose, Vec3};
use sixdma_core::metrics::{instantaneous_capacity, McEstimate};
use sixdma_core::pathplan::{brute_force_match, greedy_match, MovePlan, BRUTE_FORCE_MAX};
use sixdma_core::scenario::{trial_rng, RealizationSource};
use sixdma_core::sensing::rotatable_crb;
use sixdma_core::{Error, Result};

use crate::output::{num, OutputDir};
use crate::scenario::{dbm_to_watts, Scenario};

/// Failure of a run, split by exit code.
#[derive(Debug)]
pub enum RunError {
    Validation(String),
    Runtime(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid { .. } | Error::Dimension(_) => RunError::Validation(e.to_string()),
            _ => RunError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

pub type RunResult = std::result::Result<(), RunError>;

pub struct Ctx<'a> {
    pub scenario: &'a Scenario,
    pub seed: u64,
    pub out: &'a mut OutputDir,
}

impl Ctx<'_> {
    fn meta(&self, extra: &[(&'static str, String)]) -> Vec<(&'static str, String)> {
        let mut m =
            vec![("scenario", self.scenario.name.replace(char::is_whitespace, "_")), ("seed", self.seed.to_string())];
        m.extend_from_slice(extra);
        m
    }
}

fn pose_rows(prefix: &[String], poses: &[SurfacePose<f64>]) -> Vec<Vec<String>> {
    poses
        .iter()
        .enumerate()
        .map(|(b, p)| {
            let mut r = prefix.to_vec();
            r.push(b.to_string());
            r.extend(p.position.to_array().map(num));
            r.extend(p.rotation.to_array().map(|a| num(a.to_degrees())));
            r
        })
        .collect()
}

const POSE_HEADER: [&str; 7] = ["surface", "x_m", "y_m", "z_m", "alpha_deg", "beta_deg", "gamma_deg"];

fn with_prefix<'a>(prefix: &[&'a str], rest: &[&'a str]) -> Vec<&'a str> {
    prefix.iter().chain(rest).copied().collect()
}

fn est_cells(e: &McEstimate) -> [String; 2] {
    [num(e.mean), num(e.std_err)]
}

pub fn simulate(ctx: &mut Ctx) -> RunResult {
    let s = ctx.scenario;
    let poses = s.layout()?;
    let arrays = [s.array()?];
    let pattern = s.pattern()?;
    let budget = s.budget()?;
    let users = s.users(ctx.seed)?;
    if s.trials == 0 {
        return Err(Error::Invalid { field: "trials", reason: "must be ≥ 1".into() }.into());
    }
    let report = check_all(&poses, &arrays, &s.constraints()?, &s.region()?);
    let caps: Vec<f64> = (0..s.trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = assemble_channel_matrix(&poses, &arrays, &pattern, &users.realization(t), &budget)?;
            instantaneous_capacity(&h, &budget)
        })
        .collect::<Result<_>>()?;
    let est = McEstimate::from_samples(&caps);
    let meta = ctx.meta(&[("trials", s.trials.to_string()), ("feasible", report.is_feasible().to_string())]);
    let rows: Vec<Vec<String>> = caps.iter().enumerate().map(|(t, c)| vec![t.to_string(), num(*c)]).collect();
    ctx.out.table("capacity.csv", &meta, &["trial", "capacity_bps_hz"], &rows)?;
    ctx.out.table(
        "summary.csv",
        &meta,
        &["scenario", "seed", "trials", "estimate_bps_hz", "std_err_bps_hz"],
        &[vec![meta[0].1.clone(), ctx.seed.to_string(), s.trials.to_string(), num(est.mean), num(est.std_err)]],
    )?;
    let h = assemble_channel_matrix(&poses, &arrays, &pattern, &users.realization(0), &budget)?;
    let mut rows = Vec::new();
    for a in 0..h.rows() {
        for k in 0..h.cols() {
            rows.push(vec![a.to_string(), k.to_string(), num(h[(a, k)].re), num(h[(a, k)].im)]);
        }
    }
    ctx.out.table("channel.csv", &ctx.meta(&[("trial", "0".into())]), &["antenna", "user", "re", "im"], &rows)?;
    ctx.out.table("layout.csv", &ctx.meta(&[]), &POSE_HEADER, &pose_rows(&[], &poses))?;
    Ok(())
}

pub fn optimize_continuous(ctx: &mut Ctx) -> RunResult {
    let s = ctx.scenario;
    let (mut rows, mut poses) = (Vec::new(), Vec::new());
    for &xi in &s.continuous.xi_sweep {
        let o = s.continuous_setup(xi, ctx.seed)?.run()?;
        let mut r = vec![num(xi)];
        for e in [&o.fpa, &o.rotation_only, &o.six_dma] {
            r.extend(est_cells(e));
        }
        r.push(num(o.six_dma.mean / o.fpa.mean - 1.0));
        rows.push(r);
        poses.extend(pose_rows(&[num(xi)], &o.six_dma_poses));
    }
    let meta = ctx.meta(&[("trials", s.trials.to_string()), ("surfaces", s.site.surfaces.to_string())]);
    let header = [
        "xi",
        "fpa_bps_hz",
        "fpa_se",
        "rotation_only_bps_hz",
        "rotation_only_se",
        "six_dma_bps_hz",
        "six_dma_se",
        "six_dma_gain",
    ];
    ctx.out.table("continuous.csv", &meta, &header, &rows)?;
    ctx.out.table("continuous_poses.csv", &meta, &with_prefix(&["xi"], &POSE_HEADER), &poses)?;
    Ok(())
}

pub fn optimize_discrete(ctx: &mut Ctx) -> RunResult {
    let s = ctx.scenario;
    let (mut rows, mut picks) = (Vec::new(), Vec::new());
    for &p in &s.discrete.power_dbm {
        let setup = s.discrete_setup(p, ctx.seed)?;
        for &[m, l] in &s.discrete.grids {
            let (a_off, off) = setup.run_offline(m, l)?;
            let (a_csm, csm) = setup.run_csm(m, l)?;
            let mut r = vec![num(p), m.to_string(), l.to_string()];
            r.extend(est_cells(&off));
            r.extend(est_cells(&csm));
            rows.push(r);
            for (method, a) in [("offline", &a_off), ("csm", &a_csm)] {
                for b in 0..a.num_surfaces() {
                    picks.push(vec![
                        num(p),
                        m.to_string(),
                        l.to_string(),
                        method.to_string(),
                        b.to_string(),
                        a.positions[b].to_string(),
                        a.rotations[b].to_string(),
                    ]);
                }
            }
        }
    }
    let meta = ctx.meta(&[("trials", s.trials.to_string()), ("max_positions", s.discrete.max_positions.to_string())]);
    ctx.out.table(
        "discrete.csv",
        &meta,
        &["power_dbm", "positions", "rotations", "offline_bps_hz", "offline_se", "csm_bps_hz", "csm_se"],
        &rows,
    )?;
    ctx.out.table(
        "discrete_assignments.csv",
        &meta,
        &["power_dbm", "positions", "rotations", "method", "surface", "position_index", "rotation_index"],
        &picks,
    )?;
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    McEstimate::from_samples(x).mean
}

pub fn estimate(ctx: &mut Ctx) -> RunResult {
    let s = ctx.scenario;
    let e = &s.estimate;
    if e.seeds == 0 || e.instant_seeds == 0 || e.snr_db.is_empty() || e.instant_pilot_lengths.is_empty() {
        return Err(Error::Invalid { field: "estimate", reason: "need seeds ≥ 1 and non-empty sweeps".into() }.into());
    }
    let mut rows = Vec::new();
    for &snr in &e.snr_db {
        let runs: Vec<StatEstimationOutcome> =
            (0..e.seeds as u64).map(|i| s.stat_setup(ctx.seed.wrapping_add(i))?.run(snr)).collect::<Result<_>>()?;
        let nmse: Vec<f64> = runs.iter().map(|r| r.nmse).collect();
        let sampled: Vec<f64> = runs.iter().map(|r| r.nmse_sampled).collect();
        let hits: usize = runs.iter().map(|r| r.doa_hits).sum();
        let est = McEstimate::from_samples(&nmse);
        rows.push(vec![
            num(snr),
            e.seeds.to_string(),
            num(est.mean),
            num(est.std_err),
            num(mean(&sampled)),
            num(hits as f64 / (e.seeds * e.users) as f64),
        ]);
    }
    let meta = ctx.meta(&[
        ("candidates", e.candidates.to_string()),
        ("sampled", e.sampled.to_string()),
        ("grid_size", e.grid_size.to_string()),
    ]);
    ctx.out.table(
        "statistical.csv",
        &meta,
        &["snr_db", "seeds", "nmse_mean", "nmse_se", "nmse_sampled_mean", "doa_hit_rate"],
        &rows,
    )?;

    let mut rows = Vec::new();
    for &l in &e.instant_pilot_lengths {
        let runs = (0..e.instant_seeds as u64)
            .map(|i| s.instant_setup(ctx.seed.wrapping_add(i)).run(l))
            .collect::<Result<Vec<_>>>()?;
        let plain: Vec<f64> = runs.iter().map(|r| r.plain).collect();
        let sparse: Vec<f64> = runs.iter().map(|r| r.sparse).collect();
        rows.push(vec![l.to_string(), e.instant_seeds.to_string(), num(mean(&plain)), num(mean(&sparse))]);
    }
    let imeta = ctx.meta(&[
        ("users", e.instant_users.to_string()),
        ("active", e.instant_active.to_string()),
        ("snr_db", num(e.instant_snr_db)),
    ]);
    ctx.out.table("instantaneous.csv", &imeta, &["pilot_length", "seeds", "plain_ls_nmse", "sparse_ls_nmse"], &rows)?;

    // stage outputs of one full pipeline run at the last SNR
    let snr = *e.snr_db.last().expect("non-empty");
    let pilots = e.instant_pilot_lengths[0];
    let p = s.stat_setup(ctx.seed)?.pipeline(snr, e.surfaces, pilots)?;
    let meta = ctx.meta(&[
        ("snr_db", num(snr)),
        ("candidates", e.candidates.to_string()),
        ("sampled", e.sampled.to_string()),
        ("grid_size", p.stats.reconstructed.grid_size.to_string()),
    ]);
    let user_cols: Vec<String> = (0..e.users).map(|k| format!("user_{k}")).collect();
    let header: Vec<&str> = std::iter::once("pose").chain(user_cols.iter().map(String::as_str)).collect();
    let matrix = |index: &[usize], cells: &dyn Fn(usize) -> Vec<String>| -> Vec<Vec<String>> {
        index.iter().enumerate().map(|(i, &pose)| std::iter::once(pose.to_string()).chain(cells(i)).collect()).collect()
    };
    let flag = |b: bool| u8::from(b).to_string();
    let st = &p.stats;
    let all: Vec<usize> = (0..e.candidates).collect();
    let measured = &st.measured;
    let rec = &st.reconstructed;
    ctx.out.table(
        "p_bar.csv",
        &meta,
        &header,
        &matrix(&st.sampled, &|i| measured.p[i].iter().map(|&v| num(v)).collect()),
    )?;
    ctx.out.table(
        "z_bar.csv",
        &meta,
        &header,
        &matrix(&st.sampled, &|i| measured.z[i].iter().map(|&v| flag(v)).collect()),
    )?;
    ctx.out.table("p_hat.csv", &meta, &header, &matrix(&all, &|i| rec.p_hat[i].iter().map(|&v| num(v)).collect()))?;
    ctx.out.table("z_hat.csv", &meta, &header, &matrix(&all, &|i| rec.z_hat[i].iter().map(|&v| flag(v)).collect()))?;
    let users: Vec<Vec<String>> = (0..e.users)
        .map(|k| {
            let f = rec.f[k].unwrap_or(Vec3::zero());
            let (theta, phi) = spherical_angles(f);
            let defined = rec.f[k].is_some();
            vec![
                k.to_string(),
                num(rec.s[k]),
                flag(defined),
                num(if defined { theta.to_degrees() } else { 0.0 }),
                num(if defined { phi.to_degrees() } else { 0.0 }),
                num(rec.residual[k]),
            ]
        })
        .collect();
    ctx.out.table(
        "users.csv",
        &meta,
        &["user", "power", "doa_defined", "elevation_deg", "azimuth_deg", "residual"],
        &users,
    )?;
    let sel: Vec<Vec<String>> =
        p.selected.iter().enumerate().map(|(b, &m)| vec![b.to_string(), m.to_string()]).collect();
    ctx.out.table("selected.csv", &meta, &["surface", "candidate"], &sel)?;
    ctx.out.table(
        "pipeline.csv",
        &ctx.meta(&[("snr_db", num(snr)), ("pilot_length", pilots.to_string())]),
        &["nmse_power", "bound_estimated_bps_hz", "bound_true_bps_hz", "plain_ls_nmse", "sparse_ls_nmse"],
        &[vec![num(st.nmse), num(p.bound_estimated), num(p.bound_true), num(p.instant.plain), num(p.instant.sparse)]],
    )?;
    Ok(())
}

pub fn sense(ctx: &mut Ctx) -> RunResult {
    let s = ctx.scenario;
    let setup = s.sensing_setup(ctx.seed)?;
    let (mut rows, mut random, mut layout) = (Vec::new(), Vec::new(), Vec::new());
    for &p in &s.sense.power_dbm {
        let o = setup.run(dbm_to_watts(p))?;
        rows.push(vec![num(p), num(o.optimized.crb), num(o.best_random())]);
        random.extend(o.random.iter().enumerate().map(|(i, c)| vec![num(p), i.to_string(), num(*c)]));
        layout = o
            .optimized
            .poses
            .iter()
            .zip(o.optimized.params.chunks_exact(2))
            .enumerate()
            .map(|(b, (pose, ang))| {
                let mut r = vec![b.to_string(), num(ang[0].to_degrees()), num(ang[1].to_degrees())];
                r.extend(pose.position.to_array().map(num));
                r
            })
            .collect();
    }
    let meta =
        ctx.meta(&[("surfaces", s.sense.surfaces.to_string()), ("frame_length", s.sense.frame_length.to_string())]);
    ctx.out.table("crb_vs_power.csv", &meta, &["power_dbm", "crb_optimized_rad2", "crb_best_random_rad2"], &rows)?;
    ctx.out.table("crb_random.csv", &meta, &["power_dbm", "layout", "crb_rad2"], &random)?;
    ctx.out.table(
        "sense_layout.csv",
        &meta,
        &["surface", "azimuth_deg", "elevation_deg", "x_m", "y_m", "z_m"],
        &layout,
    )?;
    Ok(())
}

pub fn isac(ctx: &mut Ctx) -> RunResult {
    let s = ctx.scenario;
    let cfg = s.isac_config(ctx.seed)?;
    let sols = isac_sweep(&cfg, &s.isac.weights)?;
    let mut rows = Vec::new();
    for (w, sol) in s.isac.weights.iter().zip(&sols) {
        rows.push(vec![
            num(*w),
            num(sol.gamma.to_degrees()),
            num(sol.f_c),
            num(sol.f_s),
            num(rotatable_crb(sol.gamma, &sol.beams, &cfg)?),
            sol.candidate.to_string(),
        ]);
    }
    let meta =
        ctx.meta(&[("target_deg", num(cfg.target_angle.to_degrees())), ("grid_steps", cfg.grid_steps.to_string())]);
    ctx.out.table(
        "isac.csv",
        &meta,
        &["omega", "rotation_deg", "sum_rate_bps_hz", "sensing_metric", "crb_rad2", "beam_candidate"],
        &rows,
    )?;
    Ok(())
}

pub fn pathplan(ctx: &mut Ctx) -> RunResult {
    use rand::Rng;
    let s = &ctx.scenario.pathplan;
    let (initial, dest): (Vec<Vec3<f64>>, Vec<Vec3<f64>>) = if s.initial_m.is_empty() && s.destinations_m.is_empty() {
        if !(s.extent_m > 0.0) {
            return Err(Error::Invalid { field: "pathplan.extent_m", reason: "must be > 0".into() }.into());
        }
        let mut rng = trial_rng(ctx.seed, 0);
        let mut draw = |n: usize| -> Vec<Vec3<f64>> {
            (0..n)
                .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()).scale(s.extent_m))
                .collect()
        };
        (draw(s.antennas), draw(s.antennas))
    } else {
        (
            s.initial_m.iter().map(|p| Vec3::from_array(*p)).collect(),
            s.destinations_m.iter().map(|p| Vec3::from_array(*p)).collect(),
        )
    };
    let mut plans: Vec<(&str, MovePlan)> = vec![("greedy", greedy_match(&initial, &dest)?)];
    if initial.len() <= BRUTE_FORCE_MAX {
        plans.push(("brute_force", brute_force_match(&initial, &dest)?));
    }
    let mut rows = Vec::new();
    for (name, plan) in &plans {
        for (i, (&d, &dist)) in plan.assignment.iter().zip(&plan.distances).enumerate() {
            rows.push(vec![name.to_string(), i.to_string(), d.to_string(), num(dist)]);
        }
    }
    let meta = ctx.meta(&[("antennas", initial.len().to_string())]);
    ctx.out.table("pathplan.csv", &meta, &["method", "antenna", "destination", "distance_m"], &rows)?;
    let totals: Vec<Vec<String>> = plans.iter().map(|(n, p)| vec![n.to_string(), num(p.total)]).collect();
    ctx.out.table("pathplan_summary.csv", &meta, &["method", "total_m"], &totals)?;
    Ok(())
}

/// Checks every section of the scenario; returns the named violations.
pub fn validate(s: &Scenario, seed: u64) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    // a bad shared value (say the array) breaks every section; report it once
    let mut check = |section: &str, r: Result<()>| {
        if let Err(e) = r {
            let e = e.to_string();
            if !seen.contains(&e) {
                v.push(format!("{section}: {e}"));
                seen.push(e);
            }
        }
    };
    check("array", s.array().map(drop));
    check("pattern", s.pattern().map(drop));
    check("site", s.budget().map(drop));
    check("site.min_distance_m", s.constraints().map(drop));
    check("site.region_radius_m", s.region().map(drop));
    check("users", s.users(seed).map(drop));
    check(
        "layout",
        (|| {
            let poses = s.layout()?;
            let report = check_all(&poses, &[s.array()?], &s.constraints()?, &s.region()?);
            match report.first_violation() {
                Some(msg) => Err(Error::Infeasible(msg)),
                None => Ok(()),
            }
        })(),
    );
    if s.trials == 0 {
        check("trials", Err(Error::Invalid { field: "trials", reason: "must be ≥ 1".into() }));
    }
    for &xi in &s.continuous.xi_sweep {
        check("continuous.xi_sweep", s.continuous_setup(xi, seed).map(drop));
    }
    check(
        "discrete",
        (|| {
            for &p in &s.discrete.power_dbm {
                let d = s.discrete_setup(p, seed)?;
                for &[m, l] in &s.discrete.grids {
                    d.grid(m, l)?;
                }
            }
            Ok(())
        })(),
    );
    check("estimate", s.stat_setup(seed).map(drop));
    check("sense", s.sensing_setup(seed).and_then(|x| x.scenario(1.0)).map(drop));
    check("isac", s.isac_config(seed).map(drop));
    if s.isac.weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        check("isac.weights", Err(Error::Invalid { field: "weights", reason: "must lie in [0, 1]".into() }));
    }
    let pp = &s.pathplan;
    if pp.initial_m.len() != pp.destinations_m.len() {
        check(
            "pathplan",
            Err(Error::Dimension(format!(
                "{} initial positions for {} destinations",
                pp.initial_m.len(),
                pp.destinations_m.len()
            ))),
        );
    }
    v
}
