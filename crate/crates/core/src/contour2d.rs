//! Two-dimensional contours: incorrect points, hulls, finest `(M, a)`-partitions,
//! labels and interiors, erasure and small-size enumeration.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::kernel::{EnergyModel, LatticeSite, SpinConfiguration, TruncatedKernel, Window};
use crate::{Error, Result};

pub type Site = (i64, i64);
pub type SiteSet = BTreeSet<Site>;

const NEIGHBOURS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionParams {
    pub m: f64,
    pub a: f64,
}

impl PartitionParams {
    /// `a = 6 / (alpha - 2)`.
    pub fn new(m: f64, alpha: f64) -> Result<Self> {
        if !(m > 0.0) || !(alpha > 2.0) {
            return Err(Error::InvalidParams(format!("need M > 0 and alpha > 2, got M={m}, alpha={alpha}")));
        }
        Ok(Self { m, a: 6.0 / (alpha - 2.0) })
    }

    /// Parts closer than this must be merged.
    pub fn threshold(&self, v1: usize, v2: usize) -> f64 {
        self.m * (v1.min(v2) as f64).powf(self.a / 2.0)
    }
}

fn box_window(sigma: &SpinConfiguration) -> Result<((i64, i64), usize, usize)> {
    match sigma.window {
        Window::Box { lo, w, h } => Ok((lo, w, h)),
        Window::Interval { .. } => Err(Error::DimensionMismatch(1, 2)),
    }
}

fn spin_at(sigma: &SpinConfiguration, s: Site) -> i8 {
    sigma.get(LatticeSite::D2(s.0, s.1))
}

/// Sites with a nearest neighbour of the opposite sign, including outside sites.
pub fn incorrect_points(sigma: &SpinConfiguration) -> Result<SiteSet> {
    let (lo, w, h) = box_window(sigma)?;
    let mut out = SiteSet::new();
    for j in 0..h as i64 {
        for i in 0..w as i64 {
            let x = (lo.0 + i, lo.1 + j);
            let sx = spin_at(sigma, x);
            for (dx, dy) in NEIGHBOURS {
                let y = (x.0 + dx, x.1 + dy);
                if spin_at(sigma, y) != sx {
                    out.insert(x);
                    out.insert(y);
                }
            }
        }
    }
    Ok(out)
}

fn bbox(a: &SiteSet) -> Option<(i64, i64, i64, i64)> {
    let first = a.iter().next()?;
    let mut b = (first.0, first.0, first.1, first.1);
    for &(x, y) in a {
        b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
    }
    Some(b)
}

/// Components of the padded bounding box minus `a`, with 4-connectivity.
/// The first returned flag marks the unbounded component.
fn complement_components(a: &SiteSet) -> Vec<(bool, SiteSet)> {
    let Some((x0, x1, y0, y1)) = bbox(a) else { return Vec::new() };
    let (x0, x1, y0, y1) = (x0 - 1, x1 + 1, y0 - 1, y1 + 1);
    let mut seen: HashSet<Site> = HashSet::new();
    let mut out = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if a.contains(&(x, y)) || seen.contains(&(x, y)) {
                continue;
            }
            let mut comp = SiteSet::new();
            let mut unbounded = false;
            let mut queue = VecDeque::from([(x, y)]);
            seen.insert((x, y));
            while let Some(p) = queue.pop_front() {
                comp.insert(p);
                if p.0 == x0 || p.0 == x1 || p.1 == y0 || p.1 == y1 {
                    unbounded = true;
                }
                for (dx, dy) in NEIGHBOURS {
                    let q = (p.0 + dx, p.1 + dy);
                    if q.0 < x0 || q.0 > x1 || q.1 < y0 || q.1 > y1 || a.contains(&q) || !seen.insert(q) {
                        continue;
                    }
                    queue.push_back(q);
                }
            }
            out.push((unbounded, comp));
        }
    }
    out
}

/// `V(A)`: `A` together with the sites it separates from infinity.
pub fn hull(a: &SiteSet) -> SiteSet {
    let mut v = a.clone();
    for (unbounded, comp) in complement_components(a) {
        if !unbounded {
            v.extend(comp);
        }
    }
    v
}

/// Euclidean distance between the closest sites of two sets.
pub fn set_distance(p: &SiteSet, q: &SiteSet) -> f64 {
    let mut best = i64::MAX;
    for &(x0, y0) in p {
        for &(x1, y1) in q {
            best = best.min((x0 - x1).pow(2) + (y0 - y1).pow(2));
        }
    }
    (best as f64).sqrt()
}

/// Conditions (A) and (B) for a candidate partition.
pub fn is_partition(a: &SiteSet, parts: &[SiteSet], pp: &PartitionParams) -> bool {
    let mut union = SiteSet::new();
    for p in parts {
        if p.is_empty() || !p.is_disjoint(&union) {
            return false;
        }
        union.extend(p.iter().copied());
    }
    if &union != a {
        return false;
    }
    let vols: Vec<usize> = parts.iter().map(|p| hull(p).len()).collect();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            if set_distance(&parts[i], &parts[j]) <= pp.threshold(vols[i], vols[j]) {
                return false;
            }
        }
    }
    true
}

fn violating_pairs(parts: &[SiteSet], pp: &PartitionParams) -> Vec<(usize, usize)> {
    let vols: Vec<usize> = parts.iter().map(|p| hull(p).len()).collect();
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            if set_distance(&parts[i], &parts[j]) <= pp.threshold(vols[i], vols[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

fn sort_parts(parts: &mut [SiteSet]) {
    parts.sort_by_key(|p| *p.iter().next().expect("nonempty part"));
}

/// Finest `(M, a)`-partition by merging violating parts until none remain.
/// Each round merges every violating pair through a union-find.
pub fn finest_partition(a: &SiteSet, pp: &PartitionParams) -> Vec<SiteSet> {
    let mut parts: Vec<SiteSet> = a.iter().map(|&s| SiteSet::from([s])).collect();
    loop {
        let pairs = violating_pairs(&parts, pp);
        if pairs.is_empty() {
            break;
        }
        let mut root: Vec<usize> = (0..parts.len()).collect();
        fn find(root: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while root[r] != r {
                r = root[r];
            }
            root[i] = r;
            r
        }
        for (i, j) in pairs {
            let (ri, rj) = (find(&mut root, i), find(&mut root, j));
            if ri != rj {
                root[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut merged: Vec<SiteSet> = vec![SiteSet::new(); parts.len()];
        for (i, p) in parts.into_iter().enumerate() {
            let r = find(&mut root, i);
            merged[r].extend(p);
        }
        parts = merged.into_iter().filter(|p| !p.is_empty()).collect();
    }
    sort_parts(&mut parts);
    assert!(is_partition(a, &parts, pp), "merge fixpoint violates (A) or (B)");
    parts
}

/// Same fixpoint, merging one uniformly chosen violating pair at a time.
pub fn finest_partition_random_order<R: Rng>(a: &SiteSet, pp: &PartitionParams, rng: &mut R) -> Vec<SiteSet> {
    let mut parts: Vec<SiteSet> = a.iter().map(|&s| SiteSet::from([s])).collect();
    parts.shuffle(rng);
    loop {
        let pairs = violating_pairs(&parts, pp);
        let Some(&(i, j)) = pairs.get(rng.random_range(0..pairs.len().max(1))) else { break };
        let q = parts.swap_remove(j);
        parts[i].extend(q);
    }
    sort_parts(&mut parts);
    parts
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub support: SiteSet,
    /// `V(gamma)`.
    pub volume: SiteSet,
    pub outer_label: i8,
    /// Bounded components of the complement with their labels.
    pub interiors: Vec<(SiteSet, i8)>,
}

impl Contour {
    pub fn size(&self) -> usize {
        self.support.len()
    }

    fn interior_with(&self, s: i8) -> SiteSet {
        self.interiors.iter().filter(|(_, l)| *l == s).flat_map(|(c, _)| c.iter().copied()).collect()
    }

    pub fn int_minus(&self) -> SiteSet {
        self.interior_with(-1)
    }

    pub fn int_plus(&self) -> SiteSet {
        self.interior_with(1)
    }

    pub fn interior(&self) -> SiteSet {
        self.volume.difference(&self.support).copied().collect()
    }

    /// Labels in a canonical order, for deduplication.
    pub fn key(&self) -> (Vec<Site>, i8, Vec<i8>) {
        (self.support.iter().copied().collect(), self.outer_label, self.interiors.iter().map(|(_, l)| *l).collect())
    }
}

/// Label a support from `sigma`: sign on the sites of each component adjacent to it.
pub fn decorate(sigma: &SpinConfiguration, support: SiteSet) -> Result<Contour> {
    let mut outer_label = 0;
    let mut interiors = Vec::new();
    for (unbounded, comp) in complement_components(&support) {
        let mut label = 0i8;
        for &p in &comp {
            let touches = NEIGHBOURS.iter().any(|&(dx, dy)| support.contains(&(p.0 + dx, p.1 + dy)));
            if !touches {
                continue;
            }
            let s = spin_at(sigma, p);
            if label == 0 {
                label = s;
            } else if label != s {
                return Err(Error::LabelNotConstant);
            }
        }
        if unbounded {
            outer_label = label;
        } else {
            interiors.push((comp, label));
        }
    }
    let volume = hull(&support);
    Ok(Contour { support, volume, outer_label, interiors })
}

/// `Gamma(sigma)`: the finest partition of the incorrect points, decorated.
pub fn extract_contours(sigma: &SpinConfiguration, pp: &PartitionParams) -> Result<Vec<Contour>> {
    if sigma.outside != 1 {
        return Err(Error::NotPlusBoundary);
    }
    let bad = incorrect_points(sigma)?;
    finest_partition(&bad, pp).into_iter().map(|p| decorate(sigma, p)).collect()
}

pub fn is_external(contours: &[Contour], i: usize) -> bool {
    let v = &contours[i].volume;
    contours.iter().enumerate().all(|(j, c)| j == i || !v.is_subset(&c.volume))
}

pub fn external_contours(contours: &[Contour]) -> Vec<Contour> {
    (0..contours.len()).filter(|&i| is_external(contours, i)).map(|i| contours[i].clone()).collect()
}

fn set_site(sigma: &mut SpinConfiguration, s: Site, v: i8) -> Result<()> {
    if sigma.window.contains(LatticeSite::D2(s.0, s.1)) {
        sigma.set(LatticeSite::D2(s.0, s.1), v)
    } else if v == sigma.outside {
        Ok(())
    } else {
        Err(Error::Precondition(format!("erasure would change the outside site {s:?}")))
    }
}

/// `tau_gamma(sigma)`: plus on the support, negated on `Int_-`, unchanged elsewhere.
pub fn erase_contour(sigma: &SpinConfiguration, gamma: &Contour, pp: &PartitionParams) -> Result<SpinConfiguration> {
    let contours = extract_contours(sigma, pp)?;
    let idx = contours.iter().position(|c| c.support == gamma.support).ok_or(Error::ContourNotFound)?;
    if !is_external(&contours, idx) {
        return Err(Error::ContourNotFound);
    }
    let gamma = &contours[idx];
    let mut out = sigma.clone();
    for &s in &gamma.support {
        set_site(&mut out, s, 1)?;
    }
    for s in gamma.int_minus() {
        let v = -spin_at(sigma, s);
        set_site(&mut out, s, v)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub delta_h: f64,
    pub size: usize,
    pub j_int_minus: f64,
    /// `delta_h / (|gamma| + J(Int_-(gamma)))`, an empirical `b_1`.
    pub ratio: f64,
}

/// Energy released by erasing an external contour at zero field.
pub fn cost_erasing_check(
    sigma: &SpinConfiguration,
    gamma: &Contour,
    pp: &PartitionParams,
    model: &EnergyModel,
    tk: &TruncatedKernel,
) -> Result<CostReport> {
    let erased = erase_contour(sigma, gamma, pp)?;
    let delta_h = model.energy(&sigma.spins, sigma.outside, 0.0, None) - model.energy(&erased.spins, erased.outside, 0.0, None);
    let int_minus: Vec<Site> = gamma.int_minus().into_iter().collect();
    let j_int_minus = if int_minus.is_empty() { 0.0 } else { tk.boundary_2d(&int_minus) };
    let size = gamma.size();
    Ok(CostReport { delta_h, size, j_int_minus, ratio: delta_h / (size as f64 + j_int_minus) })
}

pub const CONTOUR_SIZE_LIMIT: usize = 8;

/// Distinct external contours with `0 in V(gamma)`, keyed by size `1..=max_n`,
/// over every minus set of at most `max_minus` sites in `[-half, half]^2`.
pub fn enumerate_contours(max_n: usize, half: i64, max_minus: usize, pp: &PartitionParams) -> Result<Vec<usize>> {
    if max_n > CONTOUR_SIZE_LIMIT {
        return Err(Error::SizeGuard { size: max_n, limit: CONTOUR_SIZE_LIMIT });
    }
    let cells: Vec<Site> = (-half..=half).flat_map(|y| (-half..=half).map(move |x| (x, y))).collect();
    let pad = half + 2;
    let side = (2 * pad + 1) as usize;
    let window = Window::Box { lo: (-pad, -pad), w: side, h: side };
    let mut found: Vec<HashSet<(Vec<Site>, i8, Vec<i8>)>> = vec![HashSet::new(); max_n + 1];
    let mut stack: Vec<usize> = Vec::new();
    fn visit(
        cells: &[Site],
        start: usize,
        stack: &mut Vec<usize>,
        max_minus: usize,
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        f(stack)?;
        if stack.len() == max_minus {
            return Ok(());
        }
        for i in start..cells.len() {
            stack.push(i);
            visit(cells, i + 1, stack, max_minus, f)?;
            stack.pop();
        }
        Ok(())
    }
    let mut record = |chosen: &[usize]| -> Result<()> {
        let mut sigma = SpinConfiguration::uniform(window, 1, 1);
        for &i in chosen {
            sigma.set(LatticeSite::D2(cells[i].0, cells[i].1), -1)?;
        }
        let contours = extract_contours(&sigma, pp)?;
        for (i, c) in contours.iter().enumerate() {
            if c.size() <= max_n && c.volume.contains(&(0, 0)) && is_external(&contours, i) {
                found[c.size()].insert(c.key());
            }
        }
        Ok(())
    };
    visit(&cells, 0, &mut stack, max_minus, &mut record)?;
    Ok(found.iter().map(|s| s.len()).collect())
}

/// `|C_0(n)|` from [`enumerate_contours`] with three minus sites in `[-3, 3]^2`.
pub fn enumerate_contours_at_size(n: usize, pp: &PartitionParams) -> Result<usize> {
    Ok(enumerate_contours(n, 3, 3, pp)?[n])
}
