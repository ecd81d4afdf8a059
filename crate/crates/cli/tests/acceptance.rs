//! One pass/fail line per acceptance criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use sixdma_core::channel::{positionable_channel, rotatable_channel_1d, surface_channel, SpatialPath};
use sixdma_core::estimate::{mle_power_estimate, MleConfig};
use sixdma_core::experiments::{
    ContinuousOutcome, ContinuousSetup, DiscreteSetup, InstantEstimationSetup, SensingSetup, StatEstimationSetup,
};
use sixdma_core::geometry::{check_min_distance, check_no_blockage, check_no_reflection, rotation_matrix, Mat3};
use sixdma_core::metrics::McEstimate;
use sixdma_core::pathplan::{brute_force_match, greedy_match};
use sixdma_core::scenario::{complex_normal, trial_rng};
use sixdma_core::sensing::{
    beam_quadratic_form, crb_doa, max_rotation_gain, rotation_gain, sensing_beam, spherical_placement,
    target_channel_and_derivative, RotatableIsacConfig, SensingScenario, SensingTarget,
};
use sixdma_core::{
    AntennaPattern, CMatrix, ConstraintConfig, LinkBudget, LocalArray, PathComponent, RotationAngles, SurfacePose,
    UserChannelSpec, Vec3, C64,
};

const PI: f64 = std::f64::consts::PI;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn max_abs(a: &Mat3<f64>, b: &Mat3<f64>) -> f64 {
    (0..3)
        .map(|j| {
            let d = a.column(j) - b.column(j);
            d.x.abs().max(d.y.abs()).max(d.z.abs())
        })
        .fold(0.0, f64::max)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn geometry_suite() -> Verdict {
    let mut rng = trial_rng(1, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = RotationAngles::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let r = rotation_matrix(u);
        worst = worst.max(max_abs(&r.transpose().mul_mat(&r), &Mat3::identity())).max((r.determinant() - 1.0).abs());
    }
    let arrays = [LocalArray::upa(2, 2, 0.05).unwrap()];
    let cfg = ConstraintConfig::new(0.2).unwrap();
    let pose = |q: [f64; 3], n: [f64; 3]| SurfacePose::facing(Vec3::from_array(q), Vec3::from_array(n));
    let ok = vec![pose([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), pose([-1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])];
    let close = vec![pose([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), pose([1.0, 0.1, 0.0], [1.0, 0.0, 0.0])];
    let facing = vec![pose([0.5, 0.0, 0.0], [1.0, 0.0, 0.0]), pose([1.0, 0.0, 0.0], [1.0, 0.0, 0.0])];
    let inward = vec![pose([0.0, 1.0, 0.0], [0.0, -1.0, 0.0])];
    let fixtures = check_min_distance(&ok, &cfg).is_empty()
        && check_no_reflection(&ok, &arrays).is_empty()
        && check_no_blockage(&ok, &arrays).is_empty()
        && check_min_distance(&close, &cfg) == vec![(0, 1)]
        && check_no_reflection(&facing, &arrays) == vec![(0, 1)]
        && check_no_blockage(&inward, &arrays) == vec![0];
    verdict(worst <= 1e-12 && fixtures, format!("max orthonormality/det error {worst:.1e}, fixtures agree: {fixtures}"))
}

fn channel_equivalence() -> Verdict {
    let mut rng = trial_rng(2, 0);
    let budget = LinkBudget::new(0.1, 1.0, 1e-9).unwrap();
    let single = LocalArray::single();
    let (mut w1, mut w2): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let paths: Vec<PathComponent> = (0..rng.random_range(1..6))
            .map(|_| {
                let g = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                PathComponent::new(g, rng.random_range(-PI / 2.0..PI / 2.0), rng.random_range(-PI..PI)).unwrap()
            })
            .collect();
        let user = UserChannelSpec::new(paths).unwrap();
        let q = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let u = RotationAngles::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let basic = surface_channel(&SurfacePose::new(q, u), &single, &AntennaPattern::Isotropic, &user, &budget);
        w1 = w1.max(max_diff(&basic, &positionable_channel(&[q], &user, &budget)));

        let m = rng.random_range(1..17);
        let sp: Vec<SpatialPath<f64>> = (0..rng.random_range(1..5))
            .map(|_| SpatialPath {
                angle: rng.random_range(-PI / 2.0..PI / 2.0),
                gain: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            })
            .collect();
        let half = (m as f64 - 1.0) / 2.0;
        let ula: Vec<C64> = (0..m)
            .map(|n| sp.iter().map(|p| p.gain * C64::from_polar(1.0, PI * (n as f64 - half) * p.angle.sin())).sum())
            .collect();
        w2 = w2.max(max_diff(&rotatable_channel_1d(0.0, &sp, m), &ula));
    }
    verdict(w1 <= 1e-12 && w2 <= 1e-12, format!("positionable {w1:.1e}, rotatable(0) vs ULA {w2:.1e}"))
}

fn continuous(xi: f64) -> Vec<ContinuousOutcome> {
    (0..10u64).into_par_iter().map(|seed| ContinuousSetup::two_hotspot(xi, seed).run().unwrap()).collect()
}

struct Means {
    fpa: f64,
    rot: f64,
    six: f64,
}

fn means(o: &[ContinuousOutcome]) -> Means {
    let m = |f: &dyn Fn(&ContinuousOutcome) -> f64| mean(&o.iter().map(f).collect::<Vec<_>>());
    Means { fpa: m(&|x| x.fpa.mean), rot: m(&|x| x.rotation_only.mean), six: m(&|x| x.six_dma.mean) }
}

fn continuous_ordering(mid: &Means) -> Verdict {
    let pass = mid.six >= 1.05 * mid.rot && mid.rot >= 1.05 * mid.fpa;
    verdict(pass, format!("xi=0.6 means: 6DMA {:.2}, rotation-only {:.2}, FPA {:.2}", mid.six, mid.rot, mid.fpa))
}

fn continuous_limit(low: &Means, high: &Means) -> Verdict {
    let gain = |m: &Means| (m.six - m.fpa) / m.fpa;
    let (g_low, g_high) = (gain(low), gain(high));
    verdict(
        g_high < g_low,
        format!("6DMA-over-FPA gain {:.1}% at xi=0.2, {:.1}% at xi=1.0", 100.0 * g_low, 100.0 * g_high),
    )
}

fn discrete_trend() -> Verdict {
    let grids = [(32, 2), (32, 4), (64, 2), (64, 4)];
    let per_seed: Vec<Vec<McEstimate>> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let setup = DiscreteSetup::small(seed);
            grids.iter().map(|&(m, l)| setup.run_offline(m, l).unwrap().1).collect()
        })
        .collect();
    let n = per_seed.len() as f64;
    let stat = |g: usize| {
        let m = per_seed.iter().map(|r| r[g].mean).sum::<f64>() / n;
        let se = per_seed.iter().map(|r| r[g].std_err.powi(2)).sum::<f64>().sqrt() / n;
        (m, se)
    };
    let s: Vec<(f64, f64)> = (0..grids.len()).map(stat).collect();
    // (smaller, larger) grid pairs: rotations doubled, then positions doubled
    let pairs = [(0, 1), (2, 3), (0, 2), (1, 3)];
    let mut pass = true;
    for &(a, b) in &pairs {
        let pooled = (s[a].1.powi(2) + s[b].1.powi(2)).sqrt();
        pass &= s[b].0 >= s[a].0 - pooled;
    }
    let cells: Vec<String> =
        grids.iter().zip(&s).map(|((m, l), (v, se))| format!("({m},{l}) {v:.2}±{se:.2}")).collect();
    verdict(pass, format!("mean rates {}", cells.join(", ")))
}

fn mle_correctness() -> Verdict {
    let mut rng = trial_rng(6, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..32);
        let sigma2 = rng.random_range(0.01..2.0);
        let x = CMatrix::from_fn(1, 1, |_, _| complex_normal(&mut rng, 1.0));
        let scale = rng.random_range(0.1..3.0);
        let y = CMatrix::from_fn(1, n, |_, _| complex_normal(&mut rng, 1.0) * scale);
        let y2: f64 = y.as_slice().iter().map(|v| v.norm_sqr()).sum();
        let want = ((y2 / n as f64 - sigma2) / x[(0, 0)].norm_sqr()).max(0.0);
        let got = mle_power_estimate(&y, &x, sigma2, &MleConfig::default()).unwrap().eta[0];
        worst = worst.max((got - want).abs() / want.max(1.0));
    }
    let cfg = MleConfig { record_trace: true, ..MleConfig::default() };
    let mut monotone = true;
    for _ in 0..100 {
        let (l, k, n) = (rng.random_range(2..10), rng.random_range(1..10), rng.random_range(1..40));
        let x = CMatrix::from_fn(l, k, |_, _| complex_normal(&mut rng, 1.0));
        let y = CMatrix::from_fn(l, n, |_, _| complex_normal(&mut rng, 1.0));
        let trace = mle_power_estimate(&y, &x, rng.random_range(0.05..1.0), &cfg).unwrap().objective_trace;
        monotone &= trace.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
    }
    verdict(worst <= 1e-10 && monotone, format!("closed-form error {worst:.1e}, monotone on 100 instances: {monotone}"))
}

fn statistical_estimation() -> Verdict {
    let snrs = [0.0, 10.0, 20.0];
    let nmse: Vec<Vec<f64>> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let s = StatEstimationSetup::default_with_seed(seed);
            snrs.iter().map(|&snr| s.run(snr).unwrap().nmse).collect()
        })
        .collect();
    let m: Vec<f64> = (0..snrs.len()).map(|i| mean(&nmse.iter().map(|r| r[i]).collect::<Vec<_>>())).collect();
    let pass = m[2] < 1e-2 && m.windows(2).all(|w| w[1] <= w[0]);
    verdict(pass, format!("mean NMSE at 0/10/20 dB: {:.2e} / {:.2e} / {:.2e}", m[0], m[1], m[2]))
}

fn instantaneous_estimation() -> Verdict {
    let mut pass = true;
    let mut cells = Vec::new();
    for l in [4, 8] {
        let runs: Vec<(f64, f64)> = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let o = InstantEstimationSetup::default_with_seed(seed).run(l).unwrap();
                (o.plain, o.sparse)
            })
            .collect();
        let plain = mean(&runs.iter().map(|r| r.0).collect::<Vec<_>>());
        let sparse = mean(&runs.iter().map(|r| r.1).collect::<Vec<_>>());
        pass &= sparse < plain;
        cells.push(format!("L={l}: sparse {sparse:.3e} vs plain {plain:.3e}"));
    }
    verdict(pass, cells.join(", "))
}

fn placement<R: Rng>(rng: &mut R) -> Vec<SurfacePose> {
    let p: Vec<f64> = (0..4).flat_map(|_| [rng.random_range(-PI..PI), rng.random_range(-PI / 2.0..0.0)]).collect();
    spherical_placement(&p, 0.5)
}

fn target<R: Rng>(rng: &mut R) -> SensingTarget {
    SensingTarget { phi: rng.random_range(-PI..PI), theta: rng.random_range(-1.2..0.3), rho: C64::new(1.0, 0.0) }
}

fn sensing() -> Verdict {
    let mut rng = trial_rng(9, 0);
    let array = LocalArray::upa(2, 2, 0.05).unwrap();
    let pattern = AntennaPattern::three_gpp();
    let budget = LinkBudget::new(0.1, 1.0, 1e-10).unwrap();
    let mut fd_worst: f64 = 0.0;
    let step = 1e-6;
    for _ in 0..100 {
        let poses = placement(&mut rng);
        let t = target(&mut rng);
        let at = |phi: f64| {
            target_channel_and_derivative(&poses, &array, &pattern, &SensingTarget { phi, ..t }, &budget).unwrap()
        };
        let (_, dh) = at(t.phi);
        let (hp, hm) = (at(t.phi + step).0, at(t.phi - step).0);
        let err: f64 =
            dh.iter().zip(hp.iter().zip(&hm)).map(|(d, (a, b))| (d - (a - b) / (2.0 * step)).norm_sqr()).sum();
        let scale: f64 = dh.iter().map(|v| v.norm_sqr()).sum();
        fd_worst = fd_worst.max((err / scale).sqrt());
    }
    let mut scale_worst: f64 = 0.0;
    for _ in 0..50 {
        let poses = placement(&mut rng);
        let targets: Vec<SensingTarget> = (0..3).map(|_| target(&mut rng)).collect();
        let crb = |p: f64, frames: usize| {
            let sc = SensingScenario::new(targets.clone(), SensingScenario::isotropic_signal(16, p), frames).unwrap();
            crb_doa(&poses, &array, &pattern, &sc, &budget).unwrap()
        };
        let (base, c) = (crb(1.0, 16), rng.random_range(0.1..100.0));
        scale_worst = scale_worst.max((crb(c, 16) * c / base - 1.0).abs()).max((crb(1.0, 64) * 4.0 / base - 1.0).abs());
    }
    let runs: Vec<(f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let o = SensingSetup::default_with_seed(seed).run(1.0).unwrap();
            (o.optimized.crb, o.best_random())
        })
        .collect();
    let wins = runs.iter().filter(|(opt, rnd)| opt <= rnd).count();
    let pass = fd_worst <= 1e-5 && scale_worst <= 1e-12 && wins == runs.len();
    verdict(
        pass,
        format!("derivative rel. error {fd_worst:.1e}, scaling error {scale_worst:.1e}, PSO ≤ best random on {wins}/{} seeds", runs.len()),
    )
}

fn proposition_oracles() -> Verdict {
    let mut rng = trial_rng(10, 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let m = rng.random_range(2..12);
        let (g0, g1) = (rng.random_range(-PI / 2.0..PI / 2.0), rng.random_range(-PI / 2.0..PI / 2.0));
        let closed = max_rotation_gain(g0, g1, m);
        // a near-null reference correlation makes the gain unbounded
        if closed.degenerate || closed.value > 1e3 {
            continue;
        }
        let dense =
            (0..=100_000).map(|i| rotation_gain(-PI + 2.0 * PI * i as f64 / 1e5, g0, g1, m, 0.5)).fold(0.0, f64::max);
        worst = worst.max((closed.value - dense).abs() / dense);
        checked += 1;
    }
    let mut qf: f64 = 0.0;
    for _ in 0..100 {
        let cfg = RotatableIsacConfig {
            m_t: rng.random_range(1..17),
            m_r: 8,
            snapshots: 32,
            snr: 10.0,
            spacing: 0.5,
            wavelength: 0.1,
            target_angle: rng.random_range(-1.5..1.5),
            users: vec![vec![(0.3, C64::new(1.0, 0.0))]],
            w_comm: 0.5,
            w_sense: 0.5,
            p_max: rng.random_range(0.01..10.0),
            noise_power: 0.01,
            gamma_bounds: [-PI / 2.0, PI / 2.0],
            grid_steps: 10,
        };
        let g = rng.random_range(-1.5..1.5);
        let a = cfg.transmit_steering(cfg.target_angle + g);
        let want = cfg.p_max * cfg.m_t as f64;
        qf = qf.max((beam_quadratic_form(&a, &sensing_beam(g, &cfg, 2)) - want).abs() / want);
    }
    verdict(
        worst <= 1e-3 && qf <= 1e-12,
        format!("max-gain rel. error {worst:.1e} over 50 geometries, quadratic form rel. error {qf:.1e}"),
    )
}

fn path_planning() -> Verdict {
    let mut rng = trial_rng(11, 0);
    let mut ok = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..8);
        let mut pts = |n| -> Vec<Vec3> {
            (0..n)
                .map(|_| {
                    Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
                .collect()
        };
        let (a, d) = (pts(n), pts(n));
        if greedy_match(&a, &d).unwrap().total >= brute_force_match(&a, &d).unwrap().total - 1e-12 {
            ok += 1;
        }
    }
    let a: Vec<Vec3> = (0..6).map(|i| Vec3::new(10.0 * i as f64, 0.0, 0.0)).collect();
    let order = [3, 0, 5, 1, 4, 2];
    let d: Vec<Vec3> = order.iter().map(|&i| Vec3::new(10.0 * i as f64 + 0.3, 0.2, 0.0)).collect();
    let g = greedy_match(&a, &d).unwrap();
    let exact = g.assignment == brute_force_match(&a, &d).unwrap().assignment
        && g.assignment.iter().enumerate().all(|(i, &j)| order[j] == i);
    verdict(ok == 1000 && exact, format!("greedy ≥ brute on {ok}/1000, separable instance exact: {exact}"))
}

fn determinism() -> Verdict {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/example.toml");
    let commands = ["simulate", "optimize-continuous", "optimize-discrete", "estimate", "sense", "isac", "pathplan"];
    let run = |cmd: &str, threads: &str| -> Vec<(String, Vec<u8>)> {
        let dir = tempfile::tempdir().unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_sixdma"))
            .args([
                cmd,
                "--scenario",
                scenario.to_str().unwrap(),
                "--out",
                dir.path().to_str().unwrap(),
                "--threads",
                threads,
            ])
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "{cmd} failed");
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let mut same = Vec::new();
    let mut files = 0;
    for cmd in commands {
        let (one, eight) = (run(cmd, "1"), run(cmd, "8"));
        files += one.len();
        if one == eight && one == run(cmd, "1") {
            same.push(cmd);
        }
    }
    verdict(
        same.len() == commands.len(),
        format!("{}/{} subcommands byte-identical ({files} files)", same.len(), commands.len()),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() {
    let mut lines: Vec<(u32, &str, Verdict, Duration, Option<Duration>)> = Vec::new();
    let mut record = |n, name, (v, t): (Verdict, Duration), limit: Option<Duration>| lines.push((n, name, v, t, limit));
    let secs = Duration::from_secs;

    record(1, "geometry suite", timed(geometry_suite), Some(secs(5)));
    record(2, "channel oracle equivalence", timed(channel_equivalence), Some(secs(10)));
    let (mid, t_mid) = timed(|| means(&continuous(0.6)));
    record(3, "continuous ordering", (continuous_ordering(&mid), t_mid), Some(secs(600)));
    let (ends, t_ends) = timed(|| (means(&continuous(0.2)), means(&continuous(1.0))));
    record(4, "gain shrinks as xi grows", (continuous_limit(&ends.0, &ends.1), t_ends), None);
    record(5, "discrete grid refinement", timed(discrete_trend), None);
    record(6, "covariance MLE", timed(mle_correctness), None);
    record(7, "statistical estimation", timed(statistical_estimation), Some(secs(300)));
    record(8, "instantaneous estimation", timed(instantaneous_estimation), None);
    record(9, "sensing bound", timed(sensing), None);
    record(10, "closed-form oracles", timed(proposition_oracles), None);
    record(11, "path planning", timed(path_planning), None);
    record(12, "determinism across threads", timed(determinism), None);

    let mut failed = 0;
    for (n, name, v, t, limit) in &lines {
        let in_time = limit.is_none_or(|l| *t <= l);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let budget = limit.map_or(String::new(), |l| format!(" of {}s", l.as_secs()));
        println!(
            "criterion {n:>2} {name}: {} | {} | {:.1}s{budget}",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            t.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
