//! Capacity, sum-rate and Monte Carlo evaluation of surface configurations.

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{assemble_channel_matrix, AntennaPattern, ChannelMatrix, LinkBudget};
use crate::error::{Error, Result};
use crate::geometry::{LocalArray, SurfacePose};
use crate::linalg::{dotc, log2det_identity_plus, norm_sqr};
use crate::scalar::Scalar;
use crate::scenario::RealizationSource;

/// `log₂ det(I + (p/σ²) H Hᴴ)` in bits/s/Hz.
pub fn instantaneous_capacity<T: Scalar>(h: &ChannelMatrix<T>, budget: &LinkBudget<T>) -> Result<T> {
    if !h.is_finite() {
        return Err(Error::NonFinite("channel matrix"));
    }
    Ok(log2det_identity_plus(h, budget.snr()))
}

/// `Σ_k log₂(1 + (p/σ²) Σ_b P[b][k])` for a `B × K` average-power matrix.
pub fn capacity_upper_bound<T: Scalar>(power: &[Vec<T>], budget: &LinkBudget<T>) -> Result<T> {
    let k = power.first().map_or(0, Vec::len);
    if power.iter().any(|row| row.len() != k) {
        return Err(Error::Dimension("ragged power matrix".into()));
    }
    if power.iter().flatten().any(|&p| !(p >= T::zero())) {
        return Err(Error::invalid("power matrix", "entries must be ≥ 0"));
    }
    let rho = budget.snr();
    Ok((0..k).fold(T::zero(), |acc, j| {
        let s = power.iter().fold(T::zero(), |s, row| s + row[j]);
        acc + (T::one() + rho * s).log2()
    }))
}

/// Per-user beamformers with a total power cap.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSet {
    w: Vec<Vec<Complex<f64>>>,
    p_max: f64,
}

impl BeamformingSet {
    pub fn new(w: Vec<Vec<Complex<f64>>>, p_max: f64) -> Result<Self> {
        if !(p_max > 0.0) {
            return Err(Error::invalid("p_max", "must be > 0"));
        }
        let len = w.first().map_or(0, Vec::len);
        if w.iter().any(|v| v.len() != len) {
            return Err(Error::Dimension("beamformers of unequal length".into()));
        }
        let total: f64 = w.iter().map(|v| norm_sqr(v)).sum();
        if total > p_max * (1.0 + 1e-12) {
            return Err(Error::invalid("beamformers", format!("total power {total} exceeds cap {p_max}")));
        }
        Ok(Self { w, p_max })
    }

    pub fn beams(&self) -> &[Vec<Complex<f64>>] {
        &self.w
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn total_power(&self) -> f64 {
        self.w.iter().map(|v| norm_sqr(v)).sum()
    }
}

/// Per-user SINR `|h_kᴴw_k|² / (Σ_{j≠k}|h_kᴴw_j|² + σ²)`.
pub fn sinrs(h: &ChannelMatrix<f64>, w: &BeamformingSet, noise_power: f64) -> Result<Vec<f64>> {
    if w.beams().len() != h.cols() {
        return Err(Error::Dimension(format!("{} beams for {} users", w.beams().len(), h.cols())));
    }
    if w.beams().iter().any(|v| v.len() != h.rows()) {
        return Err(Error::Dimension("beam length must equal channel rows".into()));
    }
    Ok((0..h.cols())
        .map(|k| {
            let hk = h.column(k);
            let gains: Vec<f64> = w.beams().iter().map(|wj| dotc(hk, wj).norm_sqr()).collect();
            let interference: f64 = gains.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| g).sum();
            gains[k] / (interference + noise_power)
        })
        .collect())
}

/// `Σ_k log₂(1 + SINR_k)`.
pub fn sum_rate_beamforming(h: &ChannelMatrix<f64>, w: &BeamformingSet, budget: &LinkBudget<f64>) -> Result<f64> {
    Ok(sinrs(h, w, budget.noise_power())?.iter().map(|s| (1.0 + s).log2()).sum())
}

/// Sum with a fixed binary tree: identical result for identical input order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        n if n <= 8 => x.iter().sum(),
        n => pairwise_sum(&x[..n / 2]) + pairwise_sum(&x[n / 2..]),
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_samples(x: &[f64]) -> Self {
        let n = x.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_err: f64::NAN, trials: 0 };
        }
        let mean = pairwise_sum(x) / n as f64;
        let dev: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_err: (var / n as f64).sqrt(), trials: n }
    }
}

/// Monte Carlo estimate of the average capacity over `trials` realizations
/// (trial indices `0..trials`). Trials run in parallel; the result does not
/// depend on the thread count.
pub fn monte_carlo_avg_capacity(
    poses: &[SurfacePose<f64>],
    arrays: &[LocalArray<f64>],
    pattern: &AntennaPattern<f64>,
    source: &dyn RealizationSource,
    budget: &LinkBudget<f64>,
    trials: usize,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be ≥ 1"));
    }
    let samples: Result<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let users = source.realization(t);
            let h = assemble_channel_matrix(poses, arrays, pattern, &users, budget)?;
            instantaneous_capacity(&h, budget)
        })
        .collect();
    Ok(McEstimate::from_samples(&samples?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn capacity_examples() {
        let b = LinkBudget::new(0.1, 1.0, 1.0).unwrap();
        let h = CMatrix::from_fn(1, 1, |_, _| c(1.0, 0.0));
        assert!((instantaneous_capacity(&h, &b).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(instantaneous_capacity(&CMatrix::<f64>::zeros(4, 3), &b).unwrap(), 0.0);
        let b3 = LinkBudget::new(0.1, 3.0, 1.0).unwrap();
        let s = 0.5f64.sqrt();
        let h = CMatrix::from_fn(2, 2, |r, k| {
            if k == 0 {
                c(s, 0.0)
            } else if r == 0 {
                c(0.0, s)
            } else {
                c(0.0, -s)
            }
        });
        assert!((instantaneous_capacity(&h, &b3).unwrap() - 4.0).abs() < 1e-12);
        let mut bad = CMatrix::<f64>::zeros(1, 1);
        bad[(0, 0)] = c(f64::NAN, 0.0);
        assert!(instantaneous_capacity(&bad, &b).is_err());
    }

    #[test]
    fn upper_bound_examples() {
        let b = LinkBudget::new(0.1, 2.0, 1.0).unwrap();
        assert_eq!(capacity_upper_bound(&[vec![0.0, 0.0]], &b).unwrap(), 0.0);
        assert!((capacity_upper_bound(&[vec![0.25_f64], vec![0.25]], &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(capacity_upper_bound(&[vec![-1.0]], &b).is_err());
    }

    #[test]
    fn sum_rate_examples() {
        let b = LinkBudget::new(0.1, 1.0, 0.5).unwrap();
        let h = CMatrix::from_fn(2, 1, |r, _| if r == 0 { c(1.0, 1.0) } else { c(0.0, 2.0) });
        // MRT with ‖w‖² = 2
        let hn = (norm_sqr(h.column(0))).sqrt();
        let w: Vec<_> = h.column(0).iter().map(|z| z * (2f64.sqrt() / hn)).collect();
        let ws = BeamformingSet::new(vec![w], 2.0).unwrap();
        let want = (1.0 + hn * hn * 2.0 / 0.5).log2();
        assert!((sum_rate_beamforming(&h, &ws, &b).unwrap() - want).abs() < 1e-12);
        let w_perp = vec![c(0.0, -2.0), c(-1.0, 1.0)];
        assert!(dotc(h.column(0), &w_perp).norm() < 1e-12);
        let ws = BeamformingSet::new(vec![w_perp], 10.0).unwrap();
        assert_eq!(sum_rate_beamforming(&h, &ws, &b).unwrap(), 0.0);
        assert!(BeamformingSet::new(vec![vec![c(2.0, 0.0)]], 1.0).is_err());
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert_eq!(pairwise_sum(&x), pairwise_sum(&x));
        assert!((pairwise_sum(&x) - x.iter().sum::<f64>()).abs() < 1e-10);
        let e = McEstimate::from_samples(&[2.0, 2.0, 2.0]);
        assert_eq!((e.mean, e.std_err), (2.0, 0.0));
    }
}
