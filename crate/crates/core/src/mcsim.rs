//! Single-site Metropolis dynamics with plus boundary and cached local fields,
//! and magnetization experiments estimating `mu^+(sigma_0 = -1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::kernel::{CouplingKernel, EnergyModel, LatticeSite, PairCounting, Window};
use crate::{Error, Result};

/// Tolerance of the cache coherence check.
pub const COHERENCE_TOL: f64 = 1e-7;

/// Chain with cached `L_x = c sum_y J_xy s_y + b_x + eps h_x`.
#[derive(Debug, Clone)]
pub struct ChainState<'a> {
    pub model: &'a EnergyModel,
    pub spins: Vec<i8>,
    /// `eps h_x` per site.
    pub field: Vec<f64>,
    local: Vec<f64>,
    rng: ChaCha8Rng,
    pub sweeps: u64,
    pf: f64,
}

impl<'a> ChainState<'a> {
    /// All-plus start.
    pub fn new(model: &'a EnergyModel, field: Option<&[f64]>, epsilon: f64, seed: u64) -> Result<Self> {
        let n = model.size();
        let field: Vec<f64> = match field {
            Some(h) if h.len() != n => return Err(Error::InvalidParams(format!("field has {} values for {n} sites", h.len()))),
            Some(h) => h.iter().map(|v| epsilon * v).collect(),
            None => vec![0.0; n],
        };
        let pf = match model.pair_counting {
            PairCounting::Unordered => 1.0,
            PairCounting::Ordered => 2.0,
        };
        let mut s = Self { model, spins: vec![1; n], field, local: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed), sweeps: 0, pf };
        s.local = s.direct_fields();
        Ok(s)
    }

    fn direct_fields(&self) -> Vec<f64> {
        let n = self.spins.len();
        (0..n)
            .map(|x| {
                let inner: f64 = (0..n).filter(|&y| y != x).map(|y| self.model.j(x, y) * self.spins[y] as f64).sum();
                self.pf * inner + self.model.boundary[x] + self.field[x]
            })
            .collect()
    }

    pub fn local_field(&self, x: usize) -> f64 {
        self.local[x]
    }

    pub fn energy(&self) -> f64 {
        let f: f64 = self.field.iter().zip(&self.spins).map(|(h, &s)| h * s as f64).sum();
        self.model.energy(&self.spins, 1, 0.0, None) - f
    }

    /// Index of the configuration: bit `i` set iff site `i` is minus.
    pub fn code(&self) -> usize {
        self.spins.iter().enumerate().filter(|(_, &s)| s < 0).map(|(i, _)| 1usize << i).sum()
    }

    fn flip(&mut self, x: usize) {
        let s = self.spins[x] as f64;
        self.spins[x] = -self.spins[x];
        for (y, l) in self.local.iter_mut().enumerate() {
            if y != x {
                *l -= 2.0 * s * self.pf * self.model.j(x, y);
            }
        }
    }

    /// One random-scan sweep of `|Lambda|` proposals; returns the number accepted.
    pub fn metropolis_sweep(&mut self, beta: f64) -> usize {
        let n = self.spins.len();
        let mut accepted = 0;
        for _ in 0..n {
            let x = self.rng.random_range(0..n);
            let dh = 2.0 * self.spins[x] as f64 * self.local[x];
            if dh <= 0.0 || beta == 0.0 || self.rng.random::<f64>() < (-beta * dh).exp() {
                self.flip(x);
                accepted += 1;
            }
        }
        self.sweeps += 1;
        accepted
    }

    /// Recompute the cached fields, failing if they drifted beyond the tolerance.
    pub fn refresh(&mut self) -> Result<f64> {
        let fresh = self.direct_fields();
        let drift = fresh.iter().zip(&self.local).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if drift > COHERENCE_TOL {
            return Err(Error::CacheIncoherent(drift));
        }
        self.local = fresh;
        Ok(drift)
    }

    /// `P(sigma_x = -1 | rest) = 1 / (1 + exp(2 beta L_x))`.
    pub fn conditional_minus(&self, x: usize, beta: f64) -> f64 {
        let t = 2.0 * beta * self.local[x];
        if t > 0.0 {
            let e = (-t).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + t.exp())
        }
    }
}

/// How `mu^+(sigma_0 = -1)` is read off a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Indicator of `sigma_0 = -1`.
    Raw,
    /// Conditional probability given the other spins.
    #[default]
    RaoBlackwell,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub beta: f64,
    pub sweeps: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub refresh_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainResult {
    pub estimate: f64,
    /// Batch-means standard error over the second half.
    pub stderr: f64,
    pub acceptance: f64,
}

const BATCHES: usize = 20;

/// Run a chain, discarding the first half of the sweeps.
pub fn run_chain(model: &EnergyModel, field: Option<&[f64]>, epsilon: f64, site: usize, cfg: &ChainConfig) -> Result<ChainResult> {
    if site >= model.size() {
        return Err(Error::Precondition(format!("site {site} outside the window")));
    }
    if cfg.sweeps < 2 * BATCHES {
        return Err(Error::InvalidParams(format!("at least {} sweeps needed", 2 * BATCHES)));
    }
    let mut st = ChainState::new(model, field, epsilon, cfg.seed)?;
    let burn = cfg.sweeps / 2;
    let mut samples = Vec::with_capacity(cfg.sweeps - burn);
    let mut accepted = 0usize;
    for k in 0..cfg.sweeps {
        accepted += st.metropolis_sweep(cfg.beta);
        if cfg.refresh_every > 0 && (k + 1) % cfg.refresh_every == 0 {
            st.refresh()?;
        }
        if k >= burn {
            samples.push(match cfg.estimator {
                Estimator::Raw => f64::from(st.spins[site] < 0),
                Estimator::RaoBlackwell => st.conditional_minus(site, cfg.beta),
            });
        }
    }
    st.refresh()?;
    let (estimate, stderr) = batch_means(&samples);
    Ok(ChainResult { estimate, stderr, acceptance: accepted as f64 / (cfg.sweeps * model.size()) as f64 })
}

/// Mean and batch-means standard error.
pub fn batch_means(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let b = n / BATCHES;
    if b == 0 {
        return (mean, f64::NAN);
    }
    let means: Vec<f64> = (0..BATCHES).map(|k| xs[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64).collect();
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (mean, (var / BATCHES as f64).sqrt())
}

/// Empirical law of the configuration index, one sample per sweep after burn-in.
pub fn empirical_law(model: &EnergyModel, field: Option<&[f64]>, epsilon: f64, beta: f64, sweeps: usize, seed: u64) -> Result<Vec<f64>> {
    let n = model.size();
    if n > 16 {
        return Err(Error::SizeGuard { size: n, limit: 16 });
    }
    let mut st = ChainState::new(model, field, epsilon, seed)?;
    let mut counts = vec![0u64; 1 << n];
    let burn = sweeps / 10;
    for k in 0..sweeps {
        st.metropolis_sweep(beta);
        if k >= burn {
            counts[st.code()] += 1;
        }
    }
    st.refresh()?;
    let total = (sweeps - burn) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Grid cell of a magnetization experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

/// One row per (cell, disorder seed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub sweeps: usize,
}

pub const CSV_HEADER: [&str; 7] = ["alpha", "beta", "epsilon", "seed", "estimate", "stderr", "sweeps"];

impl Row {
    pub fn fields(&self) -> [String; 7] {
        [
            self.alpha.to_string(),
            self.beta.to_string(),
            self.epsilon.to_string(),
            self.seed.to_string(),
            format!("{:e}", self.estimate),
            format!("{:e}", self.stderr),
            self.sweeps.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub window: Window,
    pub cutoff: i64,
    pub seeds: Vec<u64>,
    pub sweeps: usize,
    /// Shift the origin field to `N(-2 beta eps, 1)` and reweight.
    pub tilt: bool,
}

/// Warning text when `alpha` is outside `(1, 3/2)` in 1D or `(2, 3]` in 2D.
pub fn range_warning(dim: usize, alpha: f64) -> Option<String> {
    let ok = match dim {
        1 => alpha > 1.0 && alpha < 1.5,
        _ => alpha > 2.0 && alpha <= 3.0,
    };
    (!ok).then(|| format!("alpha = {alpha} lies outside the phase-transition range for d = {dim}"))
}

pub fn origin_index(window: &Window) -> Result<usize> {
    let o = match window {
        Window::Interval { .. } => LatticeSite::D1(0),
        Window::Box { .. } => LatticeSite::D2(0, 0),
    };
    window.index(o).ok_or_else(|| Error::Precondition("window does not contain the origin".into()))
}

/// Disorder field for one seed; the origin value is drawn from `N(-shift, 1)`.
/// Returns the field and the likelihood ratio against the untilted law.
fn tilted_field(n: usize, origin: usize, shift: f64, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    h[origin] -= shift;
    let w = (shift * h[origin] + shift * shift / 2.0).exp();
    (h, w)
}

/// Per-seed estimates of `mu^+(sigma_0 = -1)` over the grid. Chains run in parallel
/// and rows come back in grid-then-seed order.
pub fn magnetization_experiment(cells: &[Cell], exp: &Experiment) -> Result<Vec<Row>> {
    let origin = origin_index(&exp.window)?;
    let n = exp.window.size();
    let mut models = Vec::new();
    for c in cells {
        let k = CouplingKernel::new(c.alpha, exp.window.dim())?;
        models.push(EnergyModel::new(exp.window, k, exp.cutoff, PairCounting::Unordered)?);
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|i| exp.seeds.iter().map(move |&s| (i, s))).collect();
    jobs.par_iter()
        .map(|&(i, seed)| {
            let c = cells[i];
            let shift = if exp.tilt { 2.0 * c.beta * c.epsilon } else { 0.0 };
            let (h, w) = tilted_field(n, origin, shift, seed);
            let cfg = ChainConfig { beta: c.beta, sweeps: exp.sweeps, seed: seed.wrapping_mul(0x9E37_79B9).wrapping_add(1), estimator: Estimator::RaoBlackwell, refresh_every: 100 };
            let r = run_chain(&models[i], Some(&h), c.epsilon, origin, &cfg)?;
            Ok(Row { alpha: c.alpha, beta: c.beta, epsilon: c.epsilon, seed, estimate: w * r.estimate, stderr: w * r.stderr, sweeps: exp.sweeps })
        })
        .collect()
}

/// Disorder-averaged estimate per cell with the standard error over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub mean: f64,
    pub stderr: f64,
}

pub fn summarize(cells: &[Cell], rows: &[Row]) -> Vec<CellSummary> {
    cells
        .iter()
        .map(|&cell| {
            let xs: Vec<f64> = rows.iter().filter(|r| r.alpha == cell.alpha && r.beta == cell.beta && r.epsilon == cell.epsilon).map(|r| r.estimate).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = if n > 1.0 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            // Within-chain error folded in for single-seed cells.
            let chain: f64 = rows.iter().filter(|r| r.alpha == cell.alpha && r.beta == cell.beta && r.epsilon == cell.epsilon).map(|r| r.stderr.powi(2)).sum::<f64>() / (n * n);
            CellSummary { cell, mean, stderr: (var / n + chain).sqrt() }
        })
        .collect()
}

/// Consecutive summaries move in direction `sign` by more than `k` combined standard errors.
pub fn strictly_monotone(s: &[CellSummary], sign: f64, k: f64) -> bool {
    s.windows(2).all(|w| sign * (w[1].mean - w[0].mean) > k * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt())
}
