//! Coarse maps `Psi_l` over the tiles `[2^l q, 2^l (q+1))`, balanced families
//! on a host interval, image counts and the nested coarse sets `A_l`.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rayon::prelude::*;

use crate::bounds1d::RatioReport;
use crate::intervals1d::{is_balanced, DyadicInterval, LineConfig, ScaleParams};
use crate::kernel::TruncatedKernel;
use crate::{Error, Result};

pub const HOST_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PsiMap {
    pub level: u32,
    /// Index `q` of the first tile.
    pub first: i64,
    pub values: Vec<i8>,
}

impl PsiMap {
    pub fn tile(&self, i: usize) -> (i64, i64) {
        let len = 1i64 << self.level;
        let q = self.first + i as i64;
        (q * len, (q + 1) * len)
    }

    pub fn zeros(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }
}

fn tile_range(level: u32, lo: i64, hi: i64) -> (i64, i64) {
    let len = 1i64 << level;
    (lo.div_euclid(len), (hi - 1).div_euclid(len) + 1)
}

/// `Psi_l(A)` on the tiles meeting `[lo, hi)`; `A` must lie inside.
pub fn psi(a: &[i64], level: u32, lo: i64, hi: i64) -> Result<PsiMap> {
    if a.iter().any(|&y| y < lo || y >= hi) {
        return Err(Error::Precondition("set leaves the window".into()));
    }
    let set: BTreeSet<i64> = a.iter().copied().collect();
    let len = 1i64 << level;
    let (q0, q1) = tile_range(level, lo, hi);
    let values = (q0..q1)
        .map(|q| {
            let inside = set.range(q * len..(q + 1) * len).count() as i64;
            if inside == len {
                -1
            } else if inside == 0 {
                1
            } else {
                0
            }
        })
        .collect();
    Ok(PsiMap { level, first: q0, values })
}

/// Members are bit masks over the host sites, bit `i` for site `host.left() + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedFamily {
    pub host: DyadicInterval,
    pub members: Vec<u32>,
    pub q_band: Option<f64>,
}

impl BalancedFamily {
    pub fn sites(&self, mask: u32) -> Vec<i64> {
        let lo = self.host.left();
        (0..self.host.len()).filter(|&i| mask >> i & 1 == 1).map(|i| lo + i).collect()
    }

    /// Members with `J(A, A^c)` in `[q, 2q)` under the truncated kernel.
    pub fn with_q_band(&self, q: f64, tk: &TruncatedKernel) -> BalancedFamily {
        let members = self
            .members
            .iter()
            .copied()
            .filter(|&m| {
                let j = tk.boundary_1d(&self.sites(m));
                j >= q && j < 2.0 * q
            })
            .collect();
        BalancedFamily { host: self.host, members, q_band: Some(q) }
    }

    fn psi_of(&self, mask: u32, level: u32) -> PsiMap {
        psi(&self.sites(mask), level, self.host.left(), self.host.right()).expect("member inside host")
    }
}

fn mask_config(host: DyadicInterval, mask: u32) -> LineConfig {
    let spins = (0..host.len()).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
    LineConfig::new(host.left(), spins, 1)
}

/// Minus sets of configurations balanced on the host, with plus spins outside it.
pub fn enumerate_balanced(host: DyadicInterval, sp: &ScaleParams) -> Result<BalancedFamily> {
    let n = host.len() as usize;
    if n > HOST_LIMIT {
        return Err(Error::SizeGuard { size: n, limit: HOST_LIMIT });
    }
    let members = (0u32..(1u32 << n))
        .into_par_iter()
        .filter(|&m| is_balanced(host.left(), host.right(), &mask_config(host, m), sp))
        .collect();
    Ok(BalancedFamily { host, members, q_band: None })
}

/// Rejection sampling of balanced minus sets for hosts beyond the enumeration cap.
/// Each site is minus with probability `p`; duplicates are kept.
pub fn sample_balanced<R: Rng>(host: DyadicInterval, sp: &ScaleParams, p: f64, tries: usize, rng: &mut R) -> Vec<Vec<i64>> {
    let n = host.len();
    let mut out = Vec::new();
    for _ in 0..tries {
        let spins: Vec<i8> = (0..n).map(|_| if rng.random_bool(p) { -1 } else { 1 }).collect();
        let cfg = LineConfig::new(host.left(), spins, 1);
        if is_balanced(host.left(), host.right(), &cfg, sp) {
            out.push((host.left()..host.right()).filter(|&y| cfg.get(y) < 0).collect());
        }
    }
    out
}

/// Number of distinct `Psi_l` images over the family.
pub fn count_images(family: &BalancedFamily, level: u32) -> usize {
    let images: std::collections::HashSet<PsiMap> = family.members.iter().map(|&m| family.psi_of(m, level)).collect();
    images.len()
}

/// One group of members sharing a `Psi_{l+1}` image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub level: u32,
    pub refinements: usize,
    pub zero_tiles: usize,
}

impl Refinement {
    pub fn bound(&self) -> f64 {
        3f64.powi(2 * self.zero_tiles as i32)
    }

    pub fn holds(&self) -> bool {
        self.refinements as f64 <= self.bound()
    }
}

/// For each fixed `Psi_{l+1}` image, the number of distinct `Psi_l` refinements.
pub fn refinement_counts(family: &BalancedFamily, level: u32) -> Vec<Refinement> {
    let mut groups: HashMap<PsiMap, BTreeSet<Vec<i8>>> = HashMap::new();
    for &m in &family.members {
        let coarse = family.psi_of(m, level + 1);
        groups.entry(coarse).or_default().insert(family.psi_of(m, level).values);
    }
    let mut out: Vec<Refinement> = groups
        .into_iter()
        .map(|(coarse, fine)| Refinement { level, refinements: fine.len(), zero_tiles: coarse.zeros() })
        .collect();
    out.sort_by_key(|r| (r.zero_tiles, r.refinements));
    out
}

/// `|S_l(A)| <= 2 J(A, A^c) / (cbar2 2^{(l+1) theta})` over members and levels `l < n`.
pub fn zero_tile_report(family: &BalancedFamily, tk: &TruncatedKernel, cbar2: f64, theta: f64) -> RatioReport {
    let mut r = RatioReport::default();
    for &m in &family.members {
        let sites = family.sites(m);
        let j = tk.boundary_1d(&sites);
        for level in 0..family.host.level {
            let zeros = family.psi_of(m, level + 1).zeros() as f64;
            r.record_leq(zeros, 2.0 * j / (cbar2 * 2f64.powf((level + 1) as f64 * theta)));
        }
    }
    r
}

/// `A_0 = A, A_1, ..., A_{n-2}` with `A_l` the union of level-`l` tiles meeting `A`.
pub fn coarse_sets(a: &[i64], n: u32) -> Vec<Vec<i64>> {
    let set: BTreeSet<i64> = a.iter().copied().collect();
    (0..n.saturating_sub(1))
        .map(|level| {
            let len = 1i64 << level;
            let tiles: BTreeSet<i64> = set.iter().map(|y| y.div_euclid(len)).collect();
            tiles.into_iter().flat_map(|q| q * len..(q + 1) * len).collect()
        })
        .collect()
}
