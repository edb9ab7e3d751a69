//! Brute-force oracles for the planar partition machinery.

use std::collections::{HashSet, VecDeque};

use lrfim::contour2d::SiteSet;

/// Sites of a box around `a` not reachable from its border while avoiding `a`.
pub fn oracle_hull(a: &SiteSet) -> SiteSet {
    if a.is_empty() {
        return SiteSet::new();
    }
    let x0 = a.iter().map(|s| s.0).min().unwrap() - 2;
    let x1 = a.iter().map(|s| s.0).max().unwrap() + 2;
    let y0 = a.iter().map(|s| s.1).min().unwrap() - 2;
    let y1 = a.iter().map(|s| s.1).max().unwrap() + 2;
    let inside = |s: (i64, i64)| (x0..=x1).contains(&s.0) && (y0..=y1).contains(&s.1);
    let mut outside = HashSet::new();
    let mut q = VecDeque::from([(x0, y0)]);
    outside.insert((x0, y0));
    while let Some((x, y)) = q.pop_front() {
        for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if inside(n) && !a.contains(&n) && outside.insert(n) {
                q.push_back(n);
            }
        }
    }
    (y0..=y1).flat_map(|y| (x0..=x1).map(move |x| (x, y))).filter(|s| !outside.contains(s)).collect()
}

pub fn oracle_dist(p: &SiteSet, q: &SiteSet) -> f64 {
    p.iter()
        .flat_map(|a| q.iter().map(move |b| (((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as f64).sqrt()))
        .fold(f64::INFINITY, f64::min)
}

/// All set partitions of `items`, as vectors of block labels (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            rec(i + 1, max.max(b), cur, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    rec(1, 0, &mut cur, &mut out);
    out
}

/// Intersection of every `(M, a)`-partition of `a`.
pub fn oracle_finest(a: &SiteSet, m: f64, alpha: f64) -> Vec<SiteSet> {
    let sites: Vec<(i64, i64)> = a.iter().copied().collect();
    let expo = 3.0 / (alpha - 2.0);
    let mut label_sets: Vec<Vec<usize>> = Vec::new();
    let mut cache: std::collections::HashMap<SiteSet, usize> = std::collections::HashMap::new();
    for labels in set_partitions(sites.len()) {
        let nb = labels.iter().max().map_or(0, |m| m + 1);
        let blocks: Vec<SiteSet> =
            (0..nb).map(|b| (0..sites.len()).filter(|&i| labels[i] == b).map(|i| sites[i]).collect()).collect();
        let vols: Vec<usize> = blocks.iter().map(|b| *cache.entry(b.clone()).or_insert_with(|| oracle_hull(b).len())).collect();
        let ok = (0..nb).all(|i| {
            (i + 1..nb).all(|j| oracle_dist(&blocks[i], &blocks[j]) > m * (vols[i].min(vols[j]) as f64).powf(expo))
        });
        if ok {
            label_sets.push(labels);
        }
    }
    // Two sites share a finest block iff they share a block in every valid partition.
    let n = sites.len();
    let mut parts: Vec<SiteSet> = Vec::new();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let block: SiteSet = (0..n)
            .filter(|&j| label_sets.iter().all(|l| l[i] == l[j]))
            .inspect(|&j| done[j] = true)
            .map(|j| sites[j])
            .collect();
        parts.push(block);
    }
    parts.sort_by_key(|p| *p.iter().next().unwrap());
    parts
}
