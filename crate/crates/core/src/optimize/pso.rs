//! Box-constrained particle swarm minimization.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self { particles: 30, iterations: 100, inertia: 0.7298, cognitive: 1.49618, social: 1.49618, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    /// Global best after initialization and after each iteration.
    pub history: Vec<f64>,
}

/// Minimizes `f` over the box `[lower, upper]`. Infeasible points should map
/// to `+∞`. `initial` seeds the first particles; the rest start uniformly in
/// the box. Objective values are evaluated in parallel but consumed in particle
/// order, so the result depends only on the seed.
pub fn pso_minimize(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    lower: &[f64],
    upper: &[f64],
    initial: &[Vec<f64>],
    cfg: &PsoConfig,
) -> Result<PsoResult> {
    let dim = lower.len();
    if upper.len() != dim || dim == 0 {
        return Err(Error::Dimension("bounds must be non-empty and of equal length".into()));
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
        return Err(Error::invalid("bounds", "need finite lower ≤ upper"));
    }
    if cfg.particles == 0 {
        return Err(Error::invalid("particles", "must be ≥ 1"));
    }
    if initial.len() > cfg.particles || initial.iter().any(|p| p.len() != dim) {
        return Err(Error::Dimension("initial particles do not fit the swarm".into()));
    }
    let clamp = |x: &mut [f64]| {
        for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
            *v = v.clamp(*l, *u);
        }
    };
    let mut rng = trial_rng(cfg.seed, 0);
    let mut x: Vec<Vec<f64>> = (0..cfg.particles)
        .map(|i| match initial.get(i) {
            Some(p) => {
                let mut p = p.clone();
                clamp(&mut p);
                p
            }
            None => lower.iter().zip(upper).map(|(l, u)| l + (u - l) * rng.random::<f64>()).collect(),
        })
        .collect();
    let mut v = vec![vec![0.0; dim]; cfg.particles];
    let mut fx: Vec<f64> = x.par_iter().map(|p| f(p)).collect();
    let mut pbest = x.clone();
    let mut pbest_f = fx.clone();
    let mut g = 0;
    for i in 1..cfg.particles {
        if pbest_f[i] < pbest_f[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_f = pbest_f[g];
    let mut history = vec![gbest_f];
    for _ in 0..cfg.iterations {
        for i in 0..cfg.particles {
            for d in 0..dim {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                v[i][d] = cfg.inertia * v[i][d]
                    + cfg.cognitive * r1 * (pbest[i][d] - x[i][d])
                    + cfg.social * r2 * (gbest[d] - x[i][d]);
                x[i][d] += v[i][d];
            }
            clamp(&mut x[i]);
        }
        fx = x.par_iter().map(|p| f(p)).collect();
        for i in 0..cfg.particles {
            if fx[i] < pbest_f[i] {
                pbest_f[i] = fx[i];
                pbest[i] = x[i].clone();
                if fx[i] < gbest_f {
                    gbest_f = fx[i];
                    gbest = x[i].clone();
                }
            }
        }
        history.push(gbest_f);
    }
    Ok(PsoResult { best: gbest, best_value: gbest_f, history })
}
