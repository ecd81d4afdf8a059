//! Discrete pose selection over a finite position/rotation grid.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use super::FrozenObjective;
use crate::error::{Error, Result};
use crate::geometry::{surface_normal, ConstraintConfig, DiscreteGrid, LocalArray, SurfacePose, FEASIBILITY_SLACK};
use crate::linalg::{cholesky_in_place, cholesky_solve};
use crate::metrics::pairwise_sum;
use crate::scenario::trial_rng;

type C64 = Complex<f64>;

/// Chosen grid position and rotation index per surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteAssignment {
    pub positions: Vec<usize>,
    pub rotations: Vec<usize>,
}

impl DiscreteAssignment {
    pub fn num_surfaces(&self) -> usize {
        self.positions.len()
    }

    /// One-hot position indicators `s_b` (length M each).
    pub fn position_indicators(&self, m: usize) -> Vec<Vec<u8>> {
        self.positions.iter().map(|&p| (0..m).map(|i| u8::from(i == p)).collect()).collect()
    }

    /// One-hot rotation indicators `g_b` (length `L_d` each).
    pub fn rotation_indicators(&self, l_d: usize) -> Vec<Vec<u8>> {
        self.rotations.iter().map(|&r| (0..l_d).map(|i| u8::from(i == r)).collect()).collect()
    }

    pub fn poses(&self, grid: &DiscreteGrid<f64>) -> Vec<SurfacePose<f64>> {
        self.positions.iter().zip(&self.rotations).map(|(&m, &l)| grid.pose(m, l)).collect()
    }
}

/// `U[m][l] = n(ŭ_l^(m))ᵀ q̆_m`.
fn u_entry(grid: &DiscreteGrid<f64>, array: &LocalArray<f64>, m: usize, l: usize) -> f64 {
    surface_normal(grid.rotations(m)[l], array).dot(grid.positions()[m])
}

/// Whether surfaces `(m_b, l_b)` and `(m_v, l_v)` can coexist.
fn pair_ok(
    grid: &DiscreteGrid<f64>,
    array: &LocalArray<f64>,
    cfg: &ConstraintConfig<f64>,
    a: (usize, usize),
    b: (usize, usize),
) -> bool {
    let slack = FEASIBILITY_SLACK;
    let (qa, qb) = (grid.positions()[a.0], grid.positions()[b.0]);
    if a.0 == b.0 || qa.distance(qb) < cfg.d_min() - slack {
        return false;
    }
    for (x, y) in [(a, b), (b, a)] {
        let (qx, qy) = (grid.positions()[x.0], grid.positions()[y.0]);
        let nx = surface_normal(grid.rotations(x.0)[x.1], array);
        if nx.dot(qy - qx) > slack {
            return false;
        }
        // literal indicator form (s_y − s_x)ᵀ U g_x ≤ 0, where U[y][l_x] exists
        if x.1 < grid.rotations(y.0).len() && u_entry(grid, array, y.0, x.1) - u_entry(grid, array, x.0, x.1) > slack {
            return false;
        }
    }
    true
}

fn single_ok(grid: &DiscreteGrid<f64>, array: &LocalArray<f64>, o: (usize, usize)) -> bool {
    u_entry(grid, array, o.0, o.1) >= -FEASIBILITY_SLACK
}

/// Human-readable list of every violated assignment constraint (empty when feasible).
pub fn discrete_violations(
    grid: &DiscreteGrid<f64>,
    assignment: &DiscreteAssignment,
    array: &LocalArray<f64>,
    cfg: &ConstraintConfig<f64>,
) -> Vec<String> {
    let mut out = Vec::new();
    let b_count = assignment.num_surfaces();
    if assignment.rotations.len() != b_count {
        out.push("position and rotation lists differ in length".to_string());
        return out;
    }
    for b in 0..b_count {
        let (m, l) = (assignment.positions[b], assignment.rotations[b]);
        if m >= grid.num_positions() || l >= grid.rotations(m).len() {
            out.push(format!("surface {b}: option ({m}, {l}) outside the grid"));
            return out;
        }
        if !single_ok(grid, array, (m, l)) {
            out.push(format!("surface {b}: normal faces the CPU"));
        }
    }
    for b in 0..b_count {
        for v in b + 1..b_count {
            let (ob, ov) = (
                (assignment.positions[b], assignment.rotations[b]),
                (assignment.positions[v], assignment.rotations[v]),
            );
            if ob.0 == ov.0 {
                out.push(format!("surfaces {b} and {v} share position {}", ob.0));
            } else if !pair_ok(grid, array, cfg, ob, ov) {
                out.push(format!("surfaces {b} and {v}: distance or reflection constraint"));
            }
        }
    }
    out
}

fn options(grid: &DiscreteGrid<f64>) -> Vec<(usize, usize)> {
    (0..grid.num_positions()).flat_map(|m| (0..grid.rotations(m).len()).map(move |l| (m, l))).collect()
}

fn compatible(
    grid: &DiscreteGrid<f64>,
    array: &LocalArray<f64>,
    cfg: &ConstraintConfig<f64>,
    o: (usize, usize),
    placed: &[(usize, usize)],
) -> bool {
    single_ok(grid, array, o) && placed.iter().all(|&p| pair_ok(grid, array, cfg, o, p))
}

/// Uniformly random feasible assignment built surface by surface (restarts on dead ends).
pub fn random_feasible_assignment<R: Rng>(
    grid: &DiscreteGrid<f64>,
    num_surfaces: usize,
    array: &LocalArray<f64>,
    cfg: &ConstraintConfig<f64>,
    rng: &mut R,
) -> Result<DiscreteAssignment> {
    let opts = options(grid);
    for _ in 0..100 {
        let mut placed: Vec<(usize, usize)> = Vec::with_capacity(num_surfaces);
        for _ in 0..num_surfaces {
            let free: Vec<(usize, usize)> =
                opts.iter().copied().filter(|&o| compatible(grid, array, cfg, o, &placed)).collect();
            if free.is_empty() {
                break;
            }
            placed.push(free[rng.random_range(0..free.len())]);
        }
        if placed.len() == num_surfaces {
            return Ok(DiscreteAssignment {
                positions: placed.iter().map(|o| o.0).collect(),
                rotations: placed.iter().map(|o| o.1).collect(),
            });
        }
    }
    Err(Error::Infeasible(format!("could not place {num_surfaces} surfaces on the grid")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfflineConfig {
    /// Projected-gradient iterations on the relaxed indicators.
    pub iterations: usize,
    /// Initial step, relative to the largest gradient entry.
    pub step: f64,
    /// Maximum coordinate sweeps over free grid options after repair (0
    /// disables); sweeping stops early once a sweep changes nothing.
    pub polish_sweeps: usize,
    /// Extra greedy starts, each forcing one of the best single options as
    /// the first pick; every start is polished and the best result kept.
    pub restarts: usize,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        Self { iterations: 100, step: 0.2, polish_sweeps: 10, restarts: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteResult {
    pub assignment: DiscreteAssignment,
    /// Frozen-objective rate of the returned assignment.
    pub rate: f64,
    /// Relaxed objective at the last projected-gradient iterate.
    pub relaxed_rate: f64,
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

struct GridCache<'a> {
    objective: &'a FrozenObjective,
    opts: Vec<(usize, usize)>,
    /// index into `opts` for (m, l)
    index: Vec<Vec<usize>>,
    /// blocks[o][t]: N × K column-major
    blocks: Vec<Vec<Vec<C64>>>,
    /// grams[o][t]: K × K
    grams: Vec<Vec<Vec<C64>>>,
}

impl<'a> GridCache<'a> {
    fn new(grid: &DiscreteGrid<f64>, objective: &'a FrozenObjective) -> Self {
        let opts = options(grid);
        let mut index = vec![Vec::new(); grid.num_positions()];
        for (i, &(m, _)) in opts.iter().enumerate() {
            index[m].push(i);
        }
        let blocks: Vec<Vec<Vec<C64>>> = opts
            .par_iter()
            .map(|&(m, l)| (0..objective.trials()).map(|t| objective.block(&grid.pose(m, l), t)).collect())
            .collect();
        let grams = blocks.par_iter().map(|per_t| per_t.iter().map(|b| objective.block_gram(b)).collect()).collect();
        Self { objective, opts, index, blocks, grams }
    }

    fn value(&self, chosen: &[usize]) -> f64 {
        let k = self.objective.users();
        let per: Vec<f64> = (0..self.objective.trials())
            .into_par_iter()
            .map(|t| {
                let mut g = vec![C64::new(0.0, 0.0); k * k];
                for &o in chosen {
                    super::add_assign(&mut g, &self.grams[o][t]);
                }
                self.objective.capacity_from_gram(&g)
            })
            .collect();
        pairwise_sum(&per) / per.len() as f64
    }
}

/// Relaxed objective and gradients w.r.t. `s` (B × M) and `g` (B × L).
/// Objective value with its gradients in the position and rotation weights.
type ValueGrad = (f64, Vec<Vec<f64>>, Vec<Vec<f64>>);

fn relaxed_value_and_grad(cache: &GridCache, grid: &DiscreteGrid<f64>, s: &[Vec<f64>], g: &[Vec<f64>]) -> ValueGrad {
    let obj = cache.objective;
    let n = obj.array().len();
    let k = obj.users();
    let rho = obj.budget().snr();
    let b_count = s.len();
    let l_d = g[0].len();
    let m_count = grid.num_positions();
    let per_t: Vec<ValueGrad> = (0..obj.trials())
        .into_par_iter()
        .map(|t| {
            // H_b = Σ_{m,l} s[m] g[l] C_{m,l}
            let h: Vec<Vec<C64>> = (0..b_count)
                .map(|b| {
                    let mut hb = vec![C64::new(0.0, 0.0); n * k];
                    for (o, &(m, l)) in cache.opts.iter().enumerate() {
                        let w = s[b][m] * g[b][l];
                        if w != 0.0 {
                            for (x, c) in hb.iter_mut().zip(&cache.blocks[o][t]) {
                                *x += c * w;
                            }
                        }
                    }
                    hb
                })
                .collect();
            let mut gram = vec![C64::new(0.0, 0.0); k * k];
            for hb in &h {
                super::add_assign(&mut gram, &obj.block_gram(hb));
            }
            let value = obj.capacity_from_gram(&gram);
            let mut a: Vec<C64> = gram.iter().map(|z| z * rho).collect();
            for i in 0..k {
                a[i * k + i] += 1.0;
            }
            cholesky_in_place(&mut a, k).expect("positive definite");
            let mut gs = vec![vec![0.0; m_count]; b_count];
            let mut gg = vec![vec![0.0; l_d]; b_count];
            for b in 0..b_count {
                // Gb = ρ H_b (I + ρ G)^{-1} / ln 2, row by row: solve (I+ρG) x = H_b row
                let mut gb = vec![C64::new(0.0, 0.0); n * k];
                for r in 0..n {
                    // row r of H_b as a K-vector; A is Hermitian so x = A^{-1} rowᵀ conj
                    let row: Vec<C64> = (0..k).map(|c| h[b][c * n + r].conj()).collect();
                    let x = cholesky_solve(&a, k, &row);
                    for c in 0..k {
                        gb[c * n + r] = x[c].conj() * (rho / std::f64::consts::LN_2);
                    }
                }
                for (o, &(m, l)) in cache.opts.iter().enumerate() {
                    let ip: f64 = gb.iter().zip(&cache.blocks[o][t]).map(|(x, y)| (x.conj() * y).re).sum::<f64>() * 2.0;
                    gs[b][m] += g[b][l] * ip;
                    gg[b][l] += s[b][m] * ip;
                }
            }
            (value, gs, gg)
        })
        .collect();
    let trials = per_t.len() as f64;
    let value = pairwise_sum(&per_t.iter().map(|x| x.0).collect::<Vec<_>>()) / trials;
    let mut gs = vec![vec![0.0; m_count]; b_count];
    let mut gg = vec![vec![0.0; l_d]; b_count];
    for (_, a, c) in &per_t {
        for b in 0..b_count {
            for (x, y) in gs[b].iter_mut().zip(&a[b]) {
                *x += y / trials;
            }
            for (x, y) in gg[b].iter_mut().zip(&c[b]) {
                *x += y / trials;
            }
        }
    }
    (value, gs, gg)
}

/// Greedy sequential pick of the best compatible option per surface.
fn greedy_options(
    cache: &GridCache,
    grid: &DiscreteGrid<f64>,
    num_surfaces: usize,
    cfg: &ConstraintConfig<f64>,
    first: Option<usize>,
) -> Result<Vec<usize>> {
    let array = cache.objective.array();
    let mut chosen: Vec<usize> = first.into_iter().collect();
    while chosen.len() < num_surfaces {
        let placed: Vec<(usize, usize)> = chosen.iter().map(|&o| cache.opts[o]).collect();
        let mut best: Option<(usize, f64)> = None;
        for (o, &opt) in cache.opts.iter().enumerate() {
            if !compatible(grid, array, cfg, opt, &placed) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(o);
            let v = cache.value(&trial);
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((o, v));
            }
        }
        let (o, _) = best.ok_or_else(|| Error::Infeasible("no compatible grid option left".into()))?;
        chosen.push(o);
    }
    Ok(chosen)
}

/// Coordinate sweeps: move one surface at a time to any compatible option
/// that improves the frozen rate.
fn polish(
    cache: &GridCache,
    grid: &DiscreteGrid<f64>,
    constraints: &ConstraintConfig<f64>,
    mut chosen: Vec<usize>,
    sweeps: usize,
) -> (Vec<usize>, f64) {
    let array = cache.objective.array();
    let mut rate = cache.value(&chosen);
    for _ in 0..sweeps {
        let mut improved = false;
        for b in 0..chosen.len() {
            let others: Vec<(usize, usize)> =
                (0..chosen.len()).filter(|&i| i != b).map(|i| cache.opts[chosen[i]]).collect();
            for (o, &candidate) in cache.opts.iter().enumerate() {
                if o == chosen[b] || !compatible(grid, array, constraints, candidate, &others) {
                    continue;
                }
                let mut trial = chosen.clone();
                trial[b] = o;
                let v = cache.value(&trial);
                if v > rate {
                    rate = v;
                    chosen = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (chosen, rate)
}

/// Relax-and-quantize search over the grid on a frozen Monte Carlo objective.
pub fn discrete_offline(
    grid: &DiscreteGrid<f64>,
    num_surfaces: usize,
    objective: &FrozenObjective,
    constraints: &ConstraintConfig<f64>,
    cfg: &OfflineConfig,
) -> Result<DiscreteResult> {
    let m_count = grid.num_positions();
    let usable = (0..m_count)
        .filter(|&m| (0..grid.rotations(m).len()).any(|l| single_ok(grid, objective.array(), (m, l))))
        .count();
    if num_surfaces == 0 || usable < num_surfaces {
        return Err(Error::Infeasible(format!("{usable} usable grid positions for {num_surfaces} surfaces")));
    }
    let array = objective.array();
    let cache = GridCache::new(grid, objective);
    let l_d = grid.max_rotations();

    // start half-way between a greedy one-hot layout and the uniform point,
    // which breaks the symmetry between otherwise identical surfaces
    let greedy = greedy_options(&cache, grid, num_surfaces, constraints, None)?;
    let mut s: Vec<Vec<f64>> = greedy
        .iter()
        .map(|&o| (0..m_count).map(|m| 0.5 / m_count as f64 + if m == cache.opts[o].0 { 0.5 } else { 0.0 }).collect())
        .collect();
    let mut g: Vec<Vec<f64>> = greedy
        .iter()
        .map(|&o| (0..l_d).map(|l| 0.5 / l_d as f64 + if l == cache.opts[o].1 { 0.5 } else { 0.0 }).collect())
        .collect();

    let mut relaxed = 0.0;
    for it in 0..cfg.iterations {
        let (v, gs, gg) = relaxed_value_and_grad(&cache, grid, &s, &g);
        relaxed = v;
        let scale = gs.iter().chain(&gg).flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            break;
        }
        let eta = cfg.step / scale / ((it + 1) as f64).sqrt();
        for b in 0..num_surfaces {
            for (x, d) in s[b].iter_mut().zip(&gs[b]) {
                *x += eta * d;
            }
            project_simplex(&mut s[b]);
            for (x, d) in g[b].iter_mut().zip(&gg[b]) {
                *x += eta * d;
            }
            project_simplex(&mut g[b]);
        }
    }

    // quantize, then repair in order of quantization error (largest first)
    let mut opt: Vec<(usize, usize)> = (0..num_surfaces)
        .map(|b| {
            let m = argmax(&s[b]);
            let n_rot = grid.rotations(m).len();
            let l = argmax(&g[b][..n_rot]);
            (m, l)
        })
        .collect();
    let err: Vec<f64> = (0..num_surfaces).map(|b| (1.0 - s[b][opt[b].0]) + (1.0 - g[b][opt[b].1])).collect();
    let mut order: Vec<usize> = (0..num_surfaces).collect();
    order.sort_by(|&a, &b| err[b].partial_cmp(&err[a]).unwrap().then(a.cmp(&b)));
    let mut fixed: Vec<usize> = Vec::new();
    for &b in &order {
        let fixed_opts: Vec<(usize, usize)> = fixed.iter().map(|&i| opt[i]).collect();
        let tentative: Vec<(usize, usize)> =
            (0..num_surfaces).filter(|i| *i != b && !fixed.contains(i)).map(|i| opt[i]).collect();
        let clean = |o: (usize, usize)| {
            compatible(grid, array, constraints, o, &fixed_opts) && compatible(grid, array, constraints, o, &tentative)
        };
        if !clean(opt[b]) {
            let here = grid.positions()[opt[b].0];
            let mut by_distance: Vec<usize> = (0..m_count).collect();
            by_distance.sort_by(|&x, &y| {
                here.distance(grid.positions()[x])
                    .partial_cmp(&here.distance(grid.positions()[y]))
                    .unwrap()
                    .then(x.cmp(&y))
            });
            let rotations_by_weight = |m: usize| {
                let mut ls: Vec<usize> = (0..grid.rotations(m).len()).collect();
                ls.sort_by(|&x, &y| g[b][y].partial_cmp(&g[b][x]).unwrap().then(x.cmp(&y)));
                ls
            };
            let pick = |strict: bool| {
                by_distance.iter().find_map(|&m| {
                    rotations_by_weight(m).into_iter().map(|l| (m, l)).find(|&o| {
                        if strict {
                            clean(o)
                        } else {
                            compatible(grid, array, constraints, o, &fixed_opts)
                        }
                    })
                })
            };
            opt[b] = pick(true)
                .or_else(|| pick(false))
                .ok_or_else(|| Error::Infeasible(format!("no feasible grid option left for surface {b}")))?;
        }
        fixed.push(b);
    }

    let repaired: Vec<usize> = opt.iter().map(|&(m, l)| cache.index[m][l]).collect();
    let mut starts = vec![repaired, greedy];
    if cfg.restarts > 0 {
        let mut singles: Vec<(usize, f64)> = (0..cache.opts.len())
            .filter(|&o| single_ok(grid, array, cache.opts[o]))
            .map(|o| (o, cache.value(&[o])))
            .collect();
        singles.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(o, _) in singles.iter().take(cfg.restarts) {
            if let Ok(start) = greedy_options(&cache, grid, num_surfaces, constraints, Some(o)) {
                starts.push(start);
            }
        }
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for start in starts {
        let (chosen, rate) = polish(&cache, grid, constraints, start, cfg.polish_sweeps);
        if best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((chosen, rate));
        }
    }
    let (chosen, rate) = best.expect("at least one start");
    let assignment = DiscreteAssignment {
        positions: chosen.iter().map(|&o| cache.opts[o].0).collect(),
        rotations: chosen.iter().map(|&o| cache.opts[o].1).collect(),
    };
    debug_assert!(discrete_violations(grid, &assignment, array, constraints).is_empty());
    Ok(DiscreteResult { assignment, rate, relaxed_rate: relaxed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsmConfig {
    /// Number of random assignments whose rates are observed.
    pub budget: usize,
    pub seed: u64,
}

/// Conditional-sample-mean search: observe the realized rate of `budget`
/// random feasible assignments, then give each surface the option with the
/// highest mean rate among samples where that surface used it. Conflicts fall
/// back to the surface's next-best option; ties go to the lowest option index.
pub fn csm_online(
    grid: &DiscreteGrid<f64>,
    num_surfaces: usize,
    array: &LocalArray<f64>,
    constraints: &ConstraintConfig<f64>,
    sampler: &mut dyn FnMut(&DiscreteAssignment, usize) -> f64,
    cfg: &CsmConfig,
) -> Result<DiscreteAssignment> {
    if cfg.budget == 0 {
        return Err(Error::invalid("sample budget", "must be ≥ 1"));
    }
    let opts = options(grid);
    let mut index = vec![Vec::new(); grid.num_positions()];
    for (i, &(m, _)) in opts.iter().enumerate() {
        index[m].push(i);
    }
    let mut sum = vec![vec![0.0; opts.len()]; num_surfaces];
    let mut count = vec![vec![0usize; opts.len()]; num_surfaces];
    let mut rng = trial_rng(cfg.seed, 0);
    for i in 0..cfg.budget {
        let a = random_feasible_assignment(grid, num_surfaces, array, constraints, &mut rng)?;
        let r = sampler(&a, i);
        for b in 0..num_surfaces {
            let o = index[a.positions[b]][a.rotations[b]];
            sum[b][o] += r;
            count[b][o] += 1;
        }
    }
    let mut placed: Vec<(usize, usize)> = Vec::with_capacity(num_surfaces);
    for b in 0..num_surfaces {
        let mean = |o: usize| if count[b][o] > 0 { sum[b][o] / count[b][o] as f64 } else { f64::NEG_INFINITY };
        let mut ranked: Vec<usize> = (0..opts.len()).collect();
        ranked.sort_by(|&x, &y| mean(y).partial_cmp(&mean(x)).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y)));
        let o = ranked
            .into_iter()
            .map(|o| opts[o])
            .find(|&o| compatible(grid, array, constraints, o, &placed))
            .ok_or_else(|| Error::Infeasible(format!("no feasible option left for surface {b}")))?;
        placed.push(o);
    }
    Ok(DiscreteAssignment {
        positions: placed.iter().map(|o| o.0).collect(),
        rotations: placed.iter().map(|o| o.1).collect(),
    })
}
