//! Channel estimation: covariance MLE of per-pose user powers, sparsity
//! thresholding, power/DOA reconstruction over a candidate pose set, and
//! support-restricted least squares for instantaneous channels.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{directional_gain, AntennaPattern};
use crate::error::{Error, Result};
use crate::geometry::{fibonacci_sphere, surface_normal, LocalArray, RotationAngles, Vec3};
use crate::linalg::{hpd_inverse, ln_det_hpd, CMatrix};
use crate::scenario::{complex_normal, trial_rng};

type C64 = Complex<f64>;

/// Frozen pilot matrix `X` (L × K).
#[derive(Debug, Clone, PartialEq)]
pub struct PilotConfig {
    x: CMatrix<f64>,
    seed: u64,
}

impl PilotConfig {
    /// i.i.d. unit-variance complex Gaussian pilots.
    pub fn generate(length: usize, users: usize, seed: u64) -> Result<Self> {
        if length == 0 || users == 0 {
            return Err(Error::invalid("pilot matrix", "need L ≥ 1 and K ≥ 1"));
        }
        let mut rng = trial_rng(seed, 0);
        let x = CMatrix::from_fn(length, users, |_, _| complex_normal(&mut rng, 1.0));
        Ok(Self { x, seed })
    }

    pub fn from_matrix(x: CMatrix<f64>, seed: u64) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::invalid("pilot matrix", "need L ≥ 1 and K ≥ 1"));
        }
        Ok(Self { x, seed })
    }

    pub fn matrix(&self) -> &CMatrix<f64> {
        &self.x
    }

    pub fn length(&self) -> usize {
        self.x.rows()
    }

    pub fn users(&self) -> usize {
        self.x.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `Y = X diag(z) Hᵀ + W` for an N × K channel `h`; `W` has i.i.d. CN(0, σ²) entries.
pub fn simulate_pilot_rx<R: Rng>(
    h: &CMatrix<f64>,
    z: &[bool],
    x: &CMatrix<f64>,
    noise_power: f64,
    rng: &mut R,
) -> Result<CMatrix<f64>> {
    let (n, k) = (h.rows(), h.cols());
    if x.cols() != k || z.len() != k {
        return Err(Error::Dimension(format!(
            "pilots for {} users, sparsity row of {}, channel with {k} users",
            x.cols(),
            z.len()
        )));
    }
    if !(noise_power >= 0.0) {
        return Err(Error::invalid("noise power", "must be ≥ 0"));
    }
    let l = x.rows();
    let mut y = CMatrix::zeros(l, n);
    for a in 0..n {
        for p in 0..l {
            let mut v = C64::new(0.0, 0.0);
            for u in (0..k).filter(|&u| z[u]) {
                v += x[(p, u)] * h[(a, u)];
            }
            y[(p, a)] = v;
        }
    }
    if noise_power > 0.0 {
        for v in y.as_mut_slice() {
            *v += complex_normal(rng, noise_power);
        }
    }
    Ok(y)
}

/// Result of the covariance MLE.
#[derive(Debug, Clone, PartialEq)]
pub struct MleOutcome {
    /// Per-user received power (power state vector), all ≥ 0.
    pub eta: Vec<f64>,
    pub passes: usize,
    /// Objective after initialization and after every coordinate update
    /// (empty unless requested).
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    pub tol: f64,
    pub max_passes: usize,
    pub record_trace: bool,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_passes: 200, record_trace: false }
    }
}

/// Sample covariance `Y Yᴴ / cols(Y)` (row-major L × L).
pub fn sample_covariance(y: &CMatrix<f64>) -> Vec<C64> {
    let (l, n) = (y.rows(), y.cols());
    let mut s = vec![C64::new(0.0, 0.0); l * l];
    for c in 0..n {
        let col = y.column(c);
        for i in 0..l {
            for j in 0..l {
                s[i * l + j] += col[i] * col[j].conj();
            }
        }
    }
    let inv = 1.0 / n.max(1) as f64;
    s.iter_mut().for_each(|v| *v *= inv);
    s
}

fn covariance_model(x: &CMatrix<f64>, eta: &[f64], noise_power: f64) -> Vec<C64> {
    let l = x.rows();
    let mut s = vec![C64::new(0.0, 0.0); l * l];
    for (k, &e) in eta.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let xk = x.column(k);
        for i in 0..l {
            for j in 0..l {
                s[i * l + j] += xk[i] * xk[j].conj() * e;
            }
        }
    }
    for i in 0..l {
        s[i * l + i] += noise_power;
    }
    s
}

/// `ln det Σ + tr(Σ⁻¹ Σ̂)` with `Σ = X diag(η) Xᴴ + σ² I`.
pub fn mle_objective(x: &CMatrix<f64>, eta: &[f64], noise_power: f64, sample_cov: &[C64]) -> Result<f64> {
    let l = x.rows();
    let sigma = covariance_model(x, eta, noise_power);
    let inv = hpd_inverse(&sigma, l).ok_or(Error::NonFinite("covariance model"))?;
    let ld = ln_det_hpd(sigma, l).ok_or(Error::NonFinite("covariance model"))?;
    let mut tr = 0.0;
    for i in 0..l {
        for j in 0..l {
            tr += (inv[i * l + j] * sample_cov[j * l + i]).re;
        }
    }
    Ok(ld + tr)
}

fn mat_vec(a: &[C64], n: usize, v: &[C64]) -> Vec<C64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum()).collect()
}

fn quad(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Coordinate-descent MLE of the power state vector from the observation
/// `y` (L × columns), normalizing the sample covariance by the column count.
///
/// Each update minimizes the likelihood exactly in one `η_k` (rank-one
/// closed form, clamped at 0) and refreshes `Σ⁻¹` by Sherman–Morrison.
pub fn mle_power_estimate(y: &CMatrix<f64>, x: &CMatrix<f64>, noise_power: f64, cfg: &MleConfig) -> Result<MleOutcome> {
    if !(noise_power > 0.0) {
        return Err(Error::invalid("noise power", "must be > 0"));
    }
    if y.rows() != x.rows() {
        return Err(Error::Dimension(format!("{} observation rows for pilot length {}", y.rows(), x.rows())));
    }
    let (l, k) = (x.rows(), x.cols());
    let cov = sample_covariance(y);
    let mut eta = vec![0.0; k];
    let mut inv = vec![C64::new(0.0, 0.0); l * l];
    for i in 0..l {
        inv[i * l + i] = C64::new(1.0 / noise_power, 0.0);
    }
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(mle_objective(x, &eta, noise_power, &cov)?);
    }
    let mut passes = 0;
    while passes < cfg.max_passes {
        passes += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..k {
            let xj = x.column(j);
            let sx = mat_vec(&inv, l, xj);
            let a = quad(xj, &sx).re;
            let csx = mat_vec(&cov, l, &sx);
            let b = quad(&sx, &csx).re;
            if a <= 0.0 {
                continue;
            }
            let delta = ((b - a) / (a * a)).max(-eta[j]);
            if delta == 0.0 {
                continue;
            }
            eta[j] += delta;
            // Σ⁻¹ ← Σ⁻¹ − δ S x xᴴ S / (1 + δ xᴴ S x)
            let scale = delta / (1.0 + delta * a);
            for r in 0..l {
                for c in 0..l {
                    inv[r * l + c] -= sx[r] * sx[c].conj() * scale;
                }
            }
            max_change = max_change.max(delta.abs());
            if cfg.record_trace {
                trace.push(mle_objective(x, &eta, noise_power, &cov)?);
            }
        }
        if max_change < cfg.tol {
            break;
        }
    }
    Ok(MleOutcome { eta, passes, objective_trace: trace })
}

/// Thresholded sparsity indicators and the powers they came from (poses × users).
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityStats {
    pub z: Vec<Vec<bool>>,
    pub p: Vec<Vec<f64>>,
    pub threshold: f64,
}

/// `Z = (P > ε)` elementwise.
pub fn threshold_sparsity(p: Vec<Vec<f64>>, threshold: f64) -> Result<SparsityStats> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("threshold", "must be ≥ 0"));
    }
    if p.iter().flatten().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("power matrix", "entries must be ≥ 0"));
    }
    let z = p.iter().map(|row| row.iter().map(|&v| v > threshold).collect()).collect();
    Ok(SparsityStats { z, p, threshold })
}

/// Default threshold: 1% of the largest entry.
pub fn default_threshold(p: &[Vec<f64>]) -> f64 {
    1e-2 * p.iter().flatten().fold(0.0f64, |a, &v| a.max(v))
}

/// Per-user power and DOA fitted from sampled poses, extrapolated to all candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedStats {
    /// Multipath average power per user.
    pub s: Vec<f64>,
    /// Unit DOA per user; `None` when the user had an empty support.
    pub f: Vec<Option<Vec3<f64>>>,
    /// Squared fitting residual per user.
    pub residual: Vec<f64>,
    /// Candidate poses × users.
    pub p_hat: Vec<Vec<f64>>,
    pub z_hat: Vec<Vec<bool>>,
    pub grid_size: usize,
}

/// Fits `P[m][k] = N g(u_m, f_k) s_k` per user over a quasi-uniform DOA grid
/// of `grid_size` points (one non-negative matching-pursuit pass: the model is
/// 1-sparse), then extrapolates to every candidate rotation.
pub fn reconstruct_statistics(
    stats: &SparsityStats,
    sampled: &[RotationAngles<f64>],
    candidates: &[RotationAngles<f64>],
    array: &LocalArray<f64>,
    pattern: &AntennaPattern<f64>,
    grid_size: usize,
) -> Result<ReconstructedStats> {
    if stats.p.len() != sampled.len() {
        return Err(Error::Dimension(format!("{} power rows for {} sampled poses", stats.p.len(), sampled.len())));
    }
    if grid_size == 0 {
        return Err(Error::invalid("grid size", "must be ≥ 1"));
    }
    let k = stats.p.first().map_or(0, Vec::len);
    let n = array.len() as f64;
    let upper = !sampled.is_empty() && sampled.iter().all(|&u| surface_normal(u, array).z > 0.0);
    let grid: Vec<Vec3<f64>> = fibonacci_sphere(grid_size, upper);
    // gains[g][m] over sampled poses
    let gains: Vec<Vec<f64>> =
        grid.par_iter().map(|&f| sampled.iter().map(|&u| directional_gain(pattern, u, f)).collect()).collect();
    let fits: Vec<(f64, Option<Vec3<f64>>, f64)> = (0..k)
        .into_par_iter()
        .map(|user| {
            let support: Vec<usize> = (0..sampled.len()).filter(|&m| stats.z[m][user]).collect();
            if support.is_empty() {
                return (0.0, None, 0.0);
            }
            let p: Vec<f64> = support.iter().map(|&m| stats.p[m][user]).collect();
            let mut best: Option<(usize, f64, f64)> = None;
            for (g, row) in gains.iter().enumerate() {
                let v: Vec<f64> = support.iter().map(|&m| n * row[m]).collect();
                let vv: f64 = v.iter().map(|x| x * x).sum();
                let vp: f64 = v.iter().zip(&p).map(|(a, b)| a * b).sum();
                let s = if vv > 0.0 { (vp / vv).max(0.0) } else { 0.0 };
                let res: f64 = v.iter().zip(&p).map(|(a, b)| (b - a * s).powi(2)).sum();
                if best.is_none_or(|(_, _, r)| res < r) {
                    best = Some((g, s, res));
                }
            }
            let (g, s, res) = best.expect("grid is non-empty");
            (s, Some(grid[g]), res)
        })
        .collect();
    let s: Vec<f64> = fits.iter().map(|f| f.0).collect();
    let f: Vec<Option<Vec3<f64>>> = fits.iter().map(|f| f.1).collect();
    let residual = fits.iter().map(|f| f.2).collect();
    let p_hat: Vec<Vec<f64>> = candidates
        .par_iter()
        .map(|&u| (0..k).map(|user| f[user].map_or(0.0, |d| n * directional_gain(pattern, u, d) * s[user])).collect())
        .collect();
    let z_hat = p_hat.iter().map(|row| row.iter().map(|&v| v > stats.threshold).collect()).collect();
    Ok(ReconstructedStats { s, f, residual, p_hat, z_hat, grid_size: grid.len() })
}

/// Least-squares estimate of the N × K channel from `y` (L × N), restricted
/// to users flagged in `z`. Returned user-major (`index = k·N + n`); entries
/// of unflagged users are exactly zero. Rank-deficient systems get the
/// minimum-norm solution.
pub fn sparsity_aided_ls(y: &CMatrix<f64>, x: &CMatrix<f64>, z: &[bool]) -> Result<Vec<C64>> {
    let (l, k, n) = (x.rows(), x.cols(), y.cols());
    if y.rows() != l || z.len() != k {
        return Err(Error::Dimension(format!(
            "observation {}×{n}, pilots {l}×{k}, sparsity row of {}",
            y.rows(),
            z.len()
        )));
    }
    let mut h = vec![C64::new(0.0, 0.0); n * k];
    let support: Vec<usize> = (0..k).filter(|&u| z[u]).collect();
    if support.is_empty() {
        return Ok(h);
    }
    // A = I ⊗ X decouples per antenna: y_n = X_S h_{n,S}
    let xs = nalgebra::DMatrix::from_fn(l, support.len(), |r, c| x[(r, support[c])]);
    let svd = xs.svd(true, true);
    let tol = svd.singular_values.max() * (l.max(support.len()) as f64) * f64::EPSILON;
    let yn = nalgebra::DMatrix::from_fn(l, n, |r, c| y[(r, c)]);
    let sol = svd.solve(&yn, tol).map_err(|e| Error::Dimension(e.to_string()))?;
    for (c, &u) in support.iter().enumerate() {
        for a in 0..n {
            h[u * n + a] = sol[(c, a)];
        }
    }
    Ok(h)
}

/// `‖est − truth‖² / ‖truth‖²`.
pub fn nmse(estimate: &[C64], truth: &[C64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::Dimension(format!("{} vs {} entries", estimate.len(), truth.len())));
    }
    let den: f64 = truth.iter().map(|v| v.norm_sqr()).sum();
    if !(den > 0.0) {
        return Err(Error::invalid("truth", "must have non-zero norm"));
    }
    Ok(estimate.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / den)
}

/// NMSE between real matrices of equal shape.
pub fn nmse_real(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    let e: Vec<C64> = estimate.iter().flatten().map(|&v| C64::new(v, 0.0)).collect();
    let t: Vec<C64> = truth.iter().flatten().map(|&v| C64::new(v, 0.0)).collect();
    if estimate.len() != truth.len() || estimate.iter().zip(truth).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Dimension("matrices of different shape".into()));
    }
    nmse(&e, &t)
}
