//! Gaussian random fields, exact partition functions on small windows, the error
//! functional `Delta_A(h)`, its tail and the good-event predicates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::kernel::{EnergyModel, PairCounting};
use crate::{Error, Result};

pub const EXACT_LIMIT: usize = 22;
pub const TAIL_LIMIT: usize = 14;

/// I.i.d. standard Gaussians from a ChaCha8 stream (ziggurat sampler of `rand_distr`).
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderField {
    pub values: Vec<f64>,
    pub seed: u64,
    pub epsilon: f64,
}

pub fn sample_field(n: usize, seed: u64, epsilon: f64) -> DisorderField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DisorderField { values: gaussians(n, &mut rng), seed, epsilon }
}

fn gaussians(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `tau_A(h)`: the field negated on `A`.
pub fn tau(h: &[f64], a: &[usize]) -> Vec<f64> {
    let mut out = h.to_vec();
    for &i in a {
        out[i] = -out[i];
    }
    out
}

/// Exact Gibbs weights on a window of at most 22 sites with plus boundary.
/// Configuration `c` has spin `-1` at index `i` iff bit `i` of `c` is set.
#[derive(Debug, Clone)]
pub struct ExactGibbs {
    pub model: EnergyModel,
    pub beta: f64,
    /// Field-free energies, indexed by configuration.
    base: Vec<f64>,
}

impl ExactGibbs {
    pub fn new(model: EnergyModel, beta: f64) -> Result<Self> {
        let n = model.size();
        if n > EXACT_LIMIT {
            return Err(Error::SizeGuard { size: n, limit: EXACT_LIMIT });
        }
        // Gray-code walk: flipping site i changes H by 2 s_i L_i.
        let mut spins = vec![1i8; n];
        let mut local: Vec<f64> = (0..n).map(|i| field_without(&model, &spins, i)).collect();
        let pf = pair_factor(&model);
        let mut base = vec![0.0; 1 << n];
        let mut e = model.energy(&spins, 1, 0.0, None);
        let mut code = 0usize;
        base[0] = e;
        for k in 1..(1usize << n) {
            let i = k.trailing_zeros() as usize;
            let s = spins[i] as f64;
            e += 2.0 * s * local[i];
            spins[i] = -spins[i];
            for (j, l) in local.iter_mut().enumerate() {
                if j != i {
                    // local_j carries the pair factor on window couplings.
                    *l += -2.0 * s * pf * model.j(i, j);
                }
            }
            code ^= 1 << i;
            base[code] = e;
        }
        Ok(Self { model, beta, base })
    }

    pub fn size(&self) -> usize {
        self.model.size()
    }

    /// Field-free energy of configuration `c`.
    pub fn base_energy(&self, c: usize) -> f64 {
        self.base[c]
    }

    /// `log Z^+` with field `epsilon h`, stabilised by the maximal exponent.
    pub fn log_partition(&self, field: Option<&[f64]>, epsilon: f64) -> f64 {
        let n = self.size();
        let fs: Vec<f64> = match field {
            Some(h) if epsilon != 0.0 => h.iter().map(|v| epsilon * v).collect(),
            _ => vec![0.0; n],
        };
        let total: f64 = fs.iter().sum();
        // sum_x h_x s_x over configurations via the low and high halves of the index.
        let lo_n = n / 2;
        let half = |bits: usize, off: usize, len: usize| -> f64 {
            (0..len).filter(|b| bits >> b & 1 == 1).map(|b| 2.0 * fs[off + b]).sum::<f64>()
        };
        let lo_tab: Vec<f64> = (0..1usize << lo_n).map(|b| half(b, 0, lo_n)).collect();
        let hi_tab: Vec<f64> = (0..1usize << (n - lo_n)).map(|b| half(b, lo_n, n - lo_n)).collect();
        let lo_mask = (1usize << lo_n) - 1;
        let expo = |c: usize| -self.beta * (self.base[c] - (total - lo_tab[c & lo_mask] - hi_tab[c >> lo_n]));
        let max = (0..self.base.len()).map(expo).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = (0..self.base.len()).map(|c| (expo(c) - max).exp()).sum();
        max + sum.ln()
    }

    /// Gibbs probabilities of all configurations.
    pub fn probabilities(&self, field: Option<&[f64]>, epsilon: f64) -> Vec<f64> {
        let log_z = self.log_partition(field, epsilon);
        let n = self.size();
        (0..self.base.len())
            .map(|c| {
                let fld: f64 = match field {
                    Some(h) => (0..n).map(|i| h[i] * if c >> i & 1 == 1 { -1.0 } else { 1.0 }).sum::<f64>() * epsilon,
                    None => 0.0,
                };
                (-self.beta * (self.base[c] - fld) - log_z).exp()
            })
            .collect()
    }

    /// `Delta_A(h) = -(1/beta) log(Z(h) / Z(tau_A h))`.
    pub fn delta_a(&self, h: &[f64], epsilon: f64, a: &[usize]) -> Result<f64> {
        self.check_set(a)?;
        if a.is_empty() {
            return Ok(0.0);
        }
        Ok(-(self.log_partition(Some(h), epsilon) - self.log_partition(Some(&tau(h, a)), epsilon)) / self.beta)
    }

    /// `Delta_A(h) - Delta_{A'}(h)`, using one partition function less.
    pub fn delta_difference(&self, h: &[f64], epsilon: f64, a: &[usize], a2: &[usize]) -> Result<f64> {
        self.check_set(a)?;
        self.check_set(a2)?;
        let lz = |s: &[usize]| self.log_partition(Some(&tau(h, s)), epsilon);
        Ok((lz(a) - lz(a2)) / self.beta)
    }

    fn check_set(&self, a: &[usize]) -> Result<()> {
        match a.iter().find(|&&i| i >= self.size()) {
            Some(i) => Err(Error::Precondition(format!("site index {i} outside the window"))),
            None => Ok(()),
        }
    }
}

fn pair_factor(model: &EnergyModel) -> f64 {
    match model.pair_counting {
        PairCounting::Unordered => 1.0,
        PairCounting::Ordered => 2.0,
    }
}

fn field_without(model: &EnergyModel, spins: &[i8], i: usize) -> f64 {
    let pf = pair_factor(model);
    let inner: f64 = (0..spins.len()).filter(|&j| j != i).map(|j| model.j(i, j) * spins[j] as f64).sum();
    pf * inner + model.boundary[i]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub lambda: f64,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error of the empirical frequency.
    pub stderr: f64,
    pub pass: bool,
}

/// `2 exp(-lambda^2 / (8 eps^2 |A Δ A'|))`.
pub fn tail_bound(lambda: f64, epsilon: f64, sym_diff: usize) -> f64 {
    if sym_diff == 0 || epsilon == 0.0 {
        return 0.0;
    }
    2.0 * (-lambda * lambda / (8.0 * epsilon * epsilon * sym_diff as f64)).exp()
}

/// Tail frequencies of `|Delta_A - Delta_{A'}| > lambda` over `n_samples` fresh fields,
/// one report per `lambda`, sharing the samples.
pub fn tail_sweep(g: &ExactGibbs, a: &[usize], a2: &[usize], epsilon: f64, lambdas: &[f64], n_samples: usize, seed: u64) -> Result<Vec<TailReport>> {
    let n = g.size();
    if n > TAIL_LIMIT {
        return Err(Error::SizeGuard { size: n, limit: TAIL_LIMIT });
    }
    if n_samples == 0 {
        return Err(Error::InvalidParams("no samples".into()));
    }
    g.check_set(a)?;
    g.check_set(a2)?;
    let sa: std::collections::BTreeSet<usize> = a.iter().copied().collect();
    let sb: std::collections::BTreeSet<usize> = a2.iter().copied().collect();
    let sym = sa.symmetric_difference(&sb).count();
    const CHUNK: usize = 1000;
    let diffs: Vec<f64> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = CHUNK.min(n_samples - chunk * CHUNK);
            (0..len)
                .map(|_| {
                    let h = gaussians(n, &mut rng);
                    g.delta_difference(&h, epsilon, a, a2).expect("sets checked").abs()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let p = diffs.iter().filter(|&&d| d > lambda).count() as f64 / n_samples as f64;
            let stderr = (p * (1.0 - p) / n_samples as f64).sqrt();
            let bound = tail_bound(lambda, epsilon, sym);
            TailReport { lambda, empirical: p, bound, stderr, pass: p <= bound + 3.0 * stderr }
        })
        .collect())
}

pub fn tail_check(g: &ExactGibbs, a: &[usize], a2: &[usize], epsilon: f64, lambda: f64, n_samples: usize, seed: u64) -> Result<TailReport> {
    Ok(tail_sweep(g, a, a2, epsilon, &[lambda], n_samples, seed)?[0])
}

/// `J(A, A^c)` within the model: window couplings plus truncated boundary fields.
pub fn model_boundary(model: &EnergyModel, a: &[usize]) -> f64 {
    let inside: std::collections::BTreeSet<usize> = a.iter().copied().collect();
    let mut j = 0.0;
    for &x in &inside {
        j += model.boundary[x];
        for y in 0..model.size() {
            if !inside.contains(&y) {
                j += model.j(x, y);
            }
        }
    }
    j
}

/// A family of flip sets with their thresholds.
pub type EventFamily = Vec<(Vec<usize>, f64)>;

/// One-dimensional family: thresholds `J(A, A^c) / 10`.
pub fn family_1d(model: &EnergyModel, sets: &[Vec<usize>]) -> EventFamily {
    sets.iter().map(|a| (a.clone(), model_boundary(model, a) / 10.0)).collect()
}

/// Two-dimensional family: thresholds `(b1 |gamma| + b1 J(Int_-(gamma))) / 4`, given
/// per contour as (flip set, size, `J(Int_-)`).
pub fn family_2d(contours: &[(Vec<usize>, usize, f64)], b1: f64) -> EventFamily {
    contours.iter().map(|(a, size, j)| (a.clone(), (b1 * *size as f64 + b1 * j) / 4.0)).collect()
}

/// `Delta_A(h) <= threshold` for every member.
pub fn good_event_eval(g: &ExactGibbs, h: &[f64], epsilon: f64, family: &EventFamily) -> Result<bool> {
    for (a, t) in family {
        if g.delta_a(h, epsilon, a)? > *t {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fraction of seeds `seed0..seed0+n` on which the good event holds.
pub fn good_event_frequency(g: &ExactGibbs, epsilon: f64, family: &EventFamily, n: usize, seed0: u64) -> Result<f64> {
    let ok = (0..n as u64)
        .into_par_iter()
        .map(|s| {
            let h = sample_field(g.size(), seed0 + s, epsilon);
            good_event_eval(g, &h.values, epsilon, family).map(usize::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ok.iter().sum::<usize>() as f64 / n.max(1) as f64)
}
