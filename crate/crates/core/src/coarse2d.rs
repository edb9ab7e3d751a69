//! Two-dimensional coarse graining: `l`-cubes of side `2^{rl}`, admissible cubes,
//! edge boundaries, shrunk cubes, level interactions `Q_l` and the related checks,
//! plus an annealing probe for the critical mixing bound at `alpha = 3`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds1d::Check;
use crate::contour2d::{Site, SiteSet};
use crate::kernel::{CouplingKernel, TruncatedKernel};
use crate::{leq_slack, Error, Result};

/// Cube index `(x_1, x_2)` at some level.
pub type Cube = (i64, i64);
pub type CubeSet = BTreeSet<Cube>;
pub type Edge = (Cube, Cube);

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeGrid {
    pub r: u32,
}

impl CubeGrid {
    pub fn new(r: u32) -> Result<Self> {
        if r <= 4 {
            return Err(Error::InvalidParams(format!("r must exceed 4, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn side(&self, level: u32) -> i64 {
        1i64 << (self.r * level)
    }

    pub fn cube_of(&self, s: Site, level: u32) -> Cube {
        let side = self.side(level);
        (s.0.div_euclid(side), s.1.div_euclid(side))
    }

    /// Half-open ranges `[x0, x1) x [y0, y1)` of a cube.
    pub fn bounds(&self, c: Cube, level: u32) -> (i64, i64, i64, i64) {
        let side = self.side(level);
        (c.0 * side, (c.0 + 1) * side, c.1 * side, (c.1 + 1) * side)
    }

    /// `C-hat`: the cube without an outer layer of thickness `2^{r(l-1)}`; empty at `l = 0`.
    pub fn shrunk_bounds(&self, c: Cube, level: u32) -> Option<(i64, i64, i64, i64)> {
        if level == 0 {
            return None;
        }
        let t = self.side(level - 1);
        let (x0, x1, y0, y1) = self.bounds(c, level);
        Some((x0 + t, x1 - t, y0 + t, y1 - t))
    }

    pub fn shrunk_cube(&self, c: Cube, level: u32) -> SiteSet {
        match self.shrunk_bounds(c, level) {
            None => SiteSet::new(),
            Some((x0, x1, y0, y1)) => (x0..x1).flat_map(|x| (y0..y1).map(move |y| (x, y))).collect(),
        }
    }
}

/// Cubes with `|C ∩ A| >= |C| / 2`.
pub fn admissible_cubes(a: &SiteSet, level: u32, grid: &CubeGrid) -> CubeSet {
    let mut count: HashMap<Cube, i64> = HashMap::new();
    for &s in a {
        *count.entry(grid.cube_of(s, level)).or_insert(0) += 1;
    }
    let vol = grid.side(level) * grid.side(level);
    count.into_iter().filter(|&(_, n)| 2 * n >= vol).map(|(c, _)| c).collect()
}

/// `∂S`: pairs `(C, C')` with `C` in `S`, `C'` not in `S`, sharing an edge.
pub fn edge_boundary(s: &CubeSet) -> Vec<Edge> {
    let mut out = Vec::new();
    for &c in s {
        for (dx, dy) in DIRS {
            let n = (c.0 + dx, c.1 + dy);
            if !s.contains(&n) {
                out.push((c, n));
            }
        }
    }
    out
}

/// `∂(S, S')` for disjoint cube sets.
pub fn edge_boundary_between(s: &CubeSet, t: &CubeSet) -> Vec<Edge> {
    let mut out = Vec::new();
    for &c in s {
        for (dx, dy) in DIRS {
            let n = (c.0 + dx, c.1 + dy);
            if t.contains(&n) {
                out.push((c, n));
            }
        }
    }
    out
}

/// Recover a cube set from its edge boundary by flooding from the inner cubes
/// without crossing a boundary edge.
pub fn reconstruct_from_boundary(edges: &[Edge]) -> CubeSet {
    let blocked: BTreeSet<Edge> = edges.iter().copied().collect();
    let mut out: CubeSet = CubeSet::new();
    let mut queue: VecDeque<Cube> = VecDeque::new();
    for &(c, _) in edges {
        if out.insert(c) {
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        for (dx, dy) in DIRS {
            let n = (c.0 + dx, c.1 + dy);
            if !blocked.contains(&(c, n)) && out.insert(n) {
                queue.push_back(n);
            }
        }
    }
    out
}

/// `B_l(A)` as a site set.
pub fn approximation(a: &SiteSet, level: u32, grid: &CubeGrid) -> SiteSet {
    let mut out = SiteSet::new();
    for c in admissible_cubes(a, level, grid) {
        let (x0, x1, y0, y1) = grid.bounds(c, level);
        out.extend((x0..x1).flat_map(|x| (y0..y1).map(move |y| (x, y))));
    }
    out
}

/// `J(A ∩ C-hat, A^c ∩ C-hat')` for one edge pair.
pub fn pair_interaction(a: &SiteSet, e: Edge, level: u32, grid: &CubeGrid, tk: &TruncatedKernel) -> f64 {
    let inside: Vec<Site> = grid.shrunk_cube(e.0, level).into_iter().filter(|s| a.contains(s)).collect();
    let outside: Vec<Site> = grid.shrunk_cube(e.1, level).into_iter().filter(|s| !a.contains(s)).collect();
    if inside.is_empty() || outside.is_empty() {
        return 0.0;
    }
    tk.cross_2d(&inside, &outside)
}

/// `Q_l(A)`; zero at `l = 0` since `C-hat` is empty there.
pub fn level_interaction(a: &SiteSet, level: u32, grid: &CubeGrid, tk: &TruncatedKernel) -> f64 {
    if level == 0 {
        return 0.0;
    }
    edge_boundary(&admissible_cubes(a, level, grid))
        .into_iter()
        .map(|e| pair_interaction(a, e, level, grid, tk))
        .sum()
}

/// Truncated `J(A)`.
pub fn set_boundary(a: &SiteSet, tk: &TruncatedKernel) -> f64 {
    let v: Vec<Site> = a.iter().copied().collect();
    if v.is_empty() {
        0.0
    } else {
        tk.boundary_2d(&v)
    }
}

/// Levels at which `A` still has admissible cubes (plus the first empty one).
pub fn active_levels(a: &SiteSet, grid: &CubeGrid) -> Vec<u32> {
    let mut out = Vec::new();
    for level in 0.. {
        out.push(level);
        if admissible_cubes(a, level, grid).is_empty() {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelData {
    pub level: u32,
    pub admissible: usize,
    pub boundary: usize,
    pub q: f64,
}

pub fn pyramid(a: &SiteSet, grid: &CubeGrid, tk: &TruncatedKernel) -> Vec<LevelData> {
    active_levels(a, grid)
        .into_iter()
        .map(|level| {
            let adm = admissible_cubes(a, level, grid);
            LevelData { level, admissible: adm.len(), boundary: edge_boundary(&adm).len(), q: level_interaction(a, level, grid, tk) }
        })
        .collect()
}

/// `sum_l Q_l(A) <= J(A)`.
pub fn no_overlap_check(a: &SiteSet, grid: &CubeGrid, tk: &TruncatedKernel) -> Check {
    let sum: f64 = active_levels(a, grid).into_iter().map(|l| level_interaction(a, l, grid, tk)).sum();
    let j = set_boundary(a, tk);
    Check { value: sum, bound: j, pass: leq_slack(sum, j) }
}

/// `b_6 = 1 / (16 3^alpha)`.
pub fn b6(alpha: f64) -> f64 {
    1.0 / (16.0 * 3f64.powf(alpha))
}

/// `b_7 = b_6^{-1} 2^{2r+1}`.
pub fn b7(alpha: f64, r: u32) -> f64 {
    2f64.powi(2 * r as i32 + 1) / b6(alpha)
}

/// `J(A ∩ C-hat, A^c ∩ C-hat') >= b_6 2^{rl(4-alpha)}` for each admissible edge pair.
pub fn large_int_check(a: &SiteSet, level: u32, grid: &CubeGrid, tk: &TruncatedKernel) -> Result<Vec<Check>> {
    if level == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    let alpha = tk.kernel.alpha;
    let bound = b6(alpha) * 2f64.powf((grid.r * level) as f64 * (4.0 - alpha));
    Ok(edge_boundary(&admissible_cubes(a, level, grid))
        .into_iter()
        .map(|e| {
            let j = pair_interaction(a, e, level, grid, tk);
            Check { value: j, bound, pass: crate::geq_slack(j, bound) }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfsLevel {
    pub level: u32,
    pub boundary: usize,
    pub q: f64,
    /// Bound on `|∂C_l(A)|`.
    pub bound_i: f64,
    pub sym_diff: usize,
    /// Bound on `|B_l Δ B_{l+1}|`.
    pub bound_ii: f64,
    pub pass_i: bool,
    pub pass_ii: bool,
}

/// Both inequalities per level. At `l = 0`, where `Q_0 = 0`, the weaker form with
/// `J(A)` in place of `Q_l` is used, with `b_4 = 1` and `b_7` standing in for `b_5`.
pub fn ffs_checks(a: &SiteSet, grid: &CubeGrid, tk: &TruncatedKernel) -> Vec<FfsLevel> {
    let alpha = tk.kernel.alpha;
    let r = grid.r;
    let j_a = set_boundary(a, tk);
    active_levels(a, grid)
        .into_iter()
        .map(|level| {
            let adm = admissible_cubes(a, level, grid);
            let boundary = edge_boundary(&adm).len();
            let q = level_interaction(a, level, grid, tk);
            let scale = (r * level) as f64;
            let (bound_i, bound_ii) = if level == 0 {
                (j_a, b7(alpha, r) * j_a)
            } else {
                (q / (b6(alpha) * 2f64.powf(scale * (4.0 - alpha))), b7(alpha, r) * 2f64.powf(scale * (alpha - 2.0)) * q)
            };
            let bl = approximation(a, level, grid);
            let bn = approximation(a, level + 1, grid);
            let sym_diff = bl.symmetric_difference(&bn).count();
            FfsLevel {
                level,
                boundary,
                q,
                bound_i,
                sym_diff,
                bound_ii,
                pass_i: leq_slack(boundary as f64, bound_i),
                pass_ii: leq_slack(sym_diff as f64, bound_ii),
            }
        })
        .collect()
}

/// Edge pairs at level `l < k` nested in a level-`k` edge pair where the shrunk
/// `k`-cube meets the `l`-cube. The geometric ingredient of the no-overlap lemma.
pub fn nesting_violations(grid: &CubeGrid, max_level: u32) -> Result<(usize, usize)> {
    let mut checked = 0;
    let mut bad = 0;
    for k in 1..=max_level {
        let ck: Cube = (0, 0);
        for (dx, dy) in DIRS {
            let ck2 = (dx, dy);
            let hk = grid.shrunk_bounds(ck, k).ok_or(Error::EmptySet)?;
            let hk2 = grid.shrunk_bounds(ck2, k).ok_or(Error::EmptySet)?;
            for l in 0..k {
                let per = grid.side(k) / grid.side(l);
                // l-cubes of C_k along the edge shared with C'_k.
                for t in 0..per {
                    let c = match (dx, dy) {
                        (1, 0) => (per - 1, t),
                        (-1, 0) => (0, t),
                        (0, 1) => (t, per - 1),
                        _ => (t, 0),
                    };
                    let c2 = (c.0 + dx, c.1 + dy);
                    checked += 1;
                    let meets = |h: (i64, i64, i64, i64), b: (i64, i64, i64, i64)| h.0 < b.1 && b.0 < h.1 && h.2 < b.3 && b.2 < h.3;
                    if meets(hk, grid.bounds(c, l)) || meets(hk2, grid.bounds(c2, l)) {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok((checked, bad))
}

/// `|∂(S, S')| >= sqrt(c) n` for a split of an `n x n` block of cubes.
pub fn iso_check(s: &CubeSet, t: &CubeSet, n: i64, c: f64) -> Result<Check> {
    if !(c > 0.0 && c <= 0.5) {
        return Err(Error::Precondition(format!("c must lie in (0, 0.5], got {c}")));
    }
    let in_block = |q: &Cube| (0..n).contains(&q.0) && (0..n).contains(&q.1);
    if !s.is_disjoint(t) || !s.iter().chain(t.iter()).all(in_block) || (s.len() + t.len()) as i64 != n * n {
        return Err(Error::Precondition("collections must tile the block".into()));
    }
    if (s.len().min(t.len()) as f64) < c * (n * n) as f64 {
        return Err(Error::Precondition("smaller collection below the c threshold".into()));
    }
    let b = edge_boundary_between(s, t).len() as f64;
    let bound = c.sqrt() * n as f64;
    Ok(Check { value: b, bound, pass: b >= bound })
}

/// `(|∂S|, 4 sqrt|S|)`.
pub fn isoperimetric_ingredient(s: &CubeSet) -> (usize, f64) {
    (edge_boundary(s).len(), 4.0 * (s.len() as f64).sqrt())
}

/// Mixing energy `J(C^+, C^-)` inside a `side x side` cube, with swap-move annealing.
pub struct MixingAnnealer {
    side: usize,
    /// `J` by displacement `(|dx|, |dy|)`.
    table: Vec<f64>,
}

impl MixingAnnealer {
    pub fn new(side: usize, kernel: &CouplingKernel) -> Result<Self> {
        if kernel.dim != 2 {
            return Err(Error::DimensionMismatch(kernel.dim, 2));
        }
        let mut table = vec![0.0; side * side];
        for dy in 0..side {
            for dx in 0..side {
                table[dy * side + dx] = kernel.j2(dx as i64, dy as i64);
            }
        }
        Ok(Self { side, table })
    }

    #[inline]
    fn j(&self, a: usize, b: usize) -> f64 {
        let s = self.side;
        self.table[(a / s).abs_diff(b / s) * s + (a % s).abs_diff(b % s)]
    }

    /// `J(C^+, C^-)` for a minus indicator.
    pub fn mixing(&self, minus: &[bool]) -> f64 {
        let n = minus.len();
        let mut total = 0.0;
        for a in 0..n {
            if !minus[a] {
                continue;
            }
            for b in 0..n {
                if !minus[b] {
                    total += self.j(a, b);
                }
            }
        }
        total
    }

    /// Minus sites forming the `m` sites closest to the corner.
    pub fn corner_start(&self, m: usize) -> Vec<bool> {
        let n = self.side * self.side;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| ((i / self.side).pow(2) + (i % self.side).pow(2), i));
        let mut minus = vec![false; n];
        for &i in idx.iter().take(m) {
            minus[i] = true;
        }
        minus
    }

    /// One annealing run from `start`; returns the best configuration and its energy.
    pub fn anneal(&self, start: Vec<bool>, sweeps: usize, t0: f64, t1: f64, rng: &mut ChaCha8Rng) -> (f64, Vec<bool>) {
        let n = start.len();
        let mut minus = start;
        let mut mlist: Vec<usize> = (0..n).filter(|&i| minus[i]).collect();
        let mut plist: Vec<usize> = (0..n).filter(|&i| !minus[i]).collect();
        let mut energy = self.mixing(&minus);
        if mlist.is_empty() || plist.is_empty() {
            return (energy, minus);
        }
        // g_x = sum_y J_xy s_y with s = +1 on plus, -1 on minus.
        let spin = |b: bool| if b { -1.0 } else { 1.0 };
        let mut g: Vec<f64> = (0..n).map(|x| (0..n).filter(|&y| y != x).map(|y| self.j(x, y) * spin(minus[y])).sum()).collect();
        let mut best = (energy, minus.clone());
        let steps = sweeps * n;
        for step in 0..steps {
            let temp = t0 * (t1 / t0).powf(step as f64 / steps.max(1) as f64);
            let (iu, iv) = (rng.random_range(0..mlist.len()), rng.random_range(0..plist.len()));
            let (u, v) = (mlist[iu], plist[iv]);
            // Swapping u (minus) and v (plus): J(+,-) = (T - E)/2 with E = sum_{pairs} J s s.
            let de = 2.0 * g[u] - 2.0 * g[v] - 4.0 * self.j(u, v);
            let dj = -de / 2.0;
            if dj <= 0.0 || rng.random::<f64>() < (-dj / temp).exp() {
                minus[u] = false;
                minus[v] = true;
                mlist[iu] = v;
                plist[iv] = u;
                for (x, gx) in g.iter_mut().enumerate() {
                    if x != u {
                        *gx += 2.0 * self.j(x, u);
                    }
                    if x != v {
                        *gx -= 2.0 * self.j(x, v);
                    }
                }
                energy += dj;
                if energy < best.0 {
                    best = (energy, minus.clone());
                }
            }
        }
        (self.mixing(&best.1), best.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingProbe {
    pub m: usize,
    pub min_j: f64,
    /// `sqrt(m+1) ln(m+1)`.
    pub curve: f64,
}

/// Annealed minima of the mixing energy over `restarts` seeded runs (one from the corner).
pub fn cube_mixing_bound_probe(side: usize, m: usize, kernel: &CouplingKernel, sweeps: usize, restarts: usize, seed: u64) -> Result<MixingProbe> {
    if !side.is_power_of_two() {
        return Err(Error::InvalidParams(format!("side {side} is not a power of two")));
    }
    let n = side * side;
    if m > n / 2 {
        return Err(Error::Precondition(format!("m = {m} exceeds half the cube")));
    }
    let ann = MixingAnnealer::new(side, kernel)?;
    let curve = ((m + 1) as f64).sqrt() * ((m + 1) as f64).ln();
    if m == 0 {
        return Ok(MixingProbe { m, min_j: 0.0, curve });
    }
    let min_j = (0..restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let start = if k == 0 {
                ann.corner_start(m)
            } else {
                let mut minus = vec![false; n];
                let mut placed = 0;
                while placed < m {
                    let i = rng.random_range(0..n);
                    if !minus[i] {
                        minus[i] = true;
                        placed += 1;
                    }
                }
                minus
            };
            ann.anneal(start, sweeps, 2.0, 0.01, &mut rng).0
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(MixingProbe { m, min_j, curve })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingFit {
    /// Least-squares `c` in relative error.
    pub c: f64,
    /// RMS relative residual.
    pub residual: f64,
    /// `min_m min_j / curve`: the empirical `b_8` floor.
    pub floor: f64,
}

pub fn fit_mixing(probes: &[MixingProbe]) -> Result<MixingFit> {
    let pts: Vec<(f64, f64)> = probes.iter().filter(|p| p.m > 0).map(|p| (p.curve, p.min_j)).collect();
    if pts.is_empty() {
        return Err(Error::EmptySet);
    }
    let s1: f64 = pts.iter().map(|(f, y)| f / y).sum();
    let s2: f64 = pts.iter().map(|(f, y)| (f / y).powi(2)).sum();
    let c = s1 / s2;
    let residual = (pts.iter().map(|(f, y)| ((y - c * f) / y).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let floor = pts.iter().map(|(f, y)| y / f).fold(f64::INFINITY, f64::min);
    Ok(MixingFit { c, residual, floor })
}
