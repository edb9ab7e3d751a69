#![allow(dead_code)]

pub mod contour;

use std::collections::HashMap;

/// Integer points of the real interval `[2^{l-4} x - 2^{l-1}, 2^{l-4} x + 2^{l-1})`,
/// computed with exact rationals over the common denominator 16.
pub fn oracle_sites(level: u32, x: i64) -> Vec<i64> {
    let scale = 1i64 << level; // numerators over 16
    let a16 = scale * x - 8 * scale;
    let b16 = scale * x + 8 * scale;
    let ceil16 = |v: i64| -((-v).div_euclid(16));
    (ceil16(a16)..ceil16(b16)).collect()
}

/// Direct reading of the favored definition on an explicit spin function.
pub fn oracle_favored(spin: &dyn Fn(i64) -> i8, level: u32, x: i64, s: i8, m: f64, c1: f64, weak: bool) -> bool {
    let sites = oracle_sites(level, x);
    let (a, b) = (sites[0], *sites.last().unwrap());
    let n = sites.len() as f64;
    let half = n / 2.0;
    for y in (a - 2 * n as i64)..=(b + 2 * n as i64) {
        let d = if y < a { a - y } else if y > b { y - b } else { 0 };
        if d >= 1 && d as f64 <= half && spin(y) != s {
            return false;
        }
    }
    let mm = if weak { 2.0 * (m / (2.0 * c1)).floor() } else { m };
    let mut k = 1i64;
    while k as f64 <= mm {
        for xx in [x + 16 * k, x - 16 * k] {
            let good = oracle_sites(level, xx).iter().filter(|&&y| spin(y) == s).count() as f64;
            let ok = if weak { good > n * (1.0 - c1 / m) } else { good / n > 1.0 - 1.0 / m };
            if !ok {
                return false;
            }
        }
        k += 1;
    }
    true
}

/// Naive balancing procedure on a dense map of spins, using only the oracles above.
/// Returns the selected `(level, left, to_plus)` and the final spins.
pub fn oracle_balancing(lo: i64, spins: &[i8], m: &dyn Fn(u32) -> f64, c1: f64) -> (Vec<(u32, i64, bool)>, Vec<i8>) {
    let n = spins.len() as i64;
    let mut cur: HashMap<i64, i8> = (0..n).map(|i| (lo + i, spins[i as usize])).collect();
    let mut lmax = 0;
    while (1i64 << lmax) < 32 * n {
        lmax += 1;
    }
    let mut steps = Vec::new();
    loop {
        let spin = |y: i64| *cur.get(&y).unwrap_or(&1);
        let mut chosen = None;
        'levels: for level in 0..=lmax {
            let mut cands: Vec<(i64, i64)> = Vec::new();
            let reach = (32 * n + 64) * 16 / (1i64 << level).min(16);
            for x in -reach..=reach {
                let s = oracle_sites(level, x);
                if s[s.len() - 1] < lo || s[0] >= lo + n {
                    continue;
                }
                cands.push((s[0], x));
            }
            cands.sort();
            cands.dedup_by_key(|c| c.0);
            for (left, x) in cands {
                let sites = oracle_sites(level, x);
                let minus = sites.iter().any(|&y| spin(y) < 0);
                let plus = sites.iter().any(|&y| spin(y) > 0);
                let pf = minus && oracle_favored(&spin, level, x, 1, m(level), c1, false);
                let mf = plus && oracle_favored(&spin, level, x, -1, m(level), c1, false);
                if pf {
                    if !sites.contains(&0) {
                        chosen = Some((level, left, true, sites));
                        break 'levels;
                    }
                } else if mf {
                    chosen = Some((level, left, false, sites));
                    break 'levels;
                }
            }
        }
        match chosen {
            None => break,
            Some((level, left, to_plus, sites)) => {
                for y in sites {
                    cur.insert(y, if to_plus { 1 } else { -1 });
                }
                steps.push((level, left, to_plus));
                assert!(steps.len() < 10_000, "oracle did not terminate");
            }
        }
    }
    let fin = (0..n).map(|i| cur[&(lo + i)]).collect();
    (steps, fin)
}

/// Definition-level lambda-good check: scan every interval and every outside site.
pub fn oracle_good(bits: &[bool], lambda: f64) -> bool {
    let n = bits.len() as i64;
    for i in 0..n {
        for j in i..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if !(i..=j).any(|t| bits[t as usize]) {
                continue;
            }
            let reach = lambda * (j - i + 1) as f64 + 1.0;
            let found = (0..n).filter(|&x| x < i || x > j).any(|x| {
                let d = if x < i { i - x } else { x - j };
                bits[x as usize] && d as f64 <= reach
            });
            if !found {
                return false;
            }
        }
    }
    true
}
