//! Dyadic intervals `I_l(x) = [2^{l-4} x - 2^{l-1}, 2^{l-4} x + 2^{l-1})`,
//! density classes and the favored / isolated predicates.

use crate::kernel::{SpinConfiguration, Window};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: i64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: i64) -> Self {
        Self { level, index }
    }

    /// Canonical index among all `x` producing the same site set.
    pub fn from_left(level: u32, left: i64) -> Self {
        let index = if level <= 4 {
            8 + left * (1i64 << (4 - level))
        } else {
            debug_assert_eq!(left.rem_euclid(1i64 << (level - 4)), 0);
            left.div_euclid(1i64 << (level - 4)) + 8
        };
        Self { level, index }
    }

    pub fn len(&self) -> i64 {
        1i64 << self.level
    }

    /// First site, `ceil(2^{l-4} (x - 8))`.
    pub fn left(&self) -> i64 {
        let t = self.index - 8;
        if self.level >= 4 {
            t << (self.level - 4)
        } else {
            -((-t).div_euclid(1i64 << (4 - self.level)))
        }
    }

    /// One past the last site.
    pub fn right(&self) -> i64 {
        self.left() + self.len()
    }

    pub fn contains(&self, y: i64) -> bool {
        y >= self.left() && y < self.right()
    }

    /// `I_l(x + 16k)`.
    pub fn shifted(&self, k: i64) -> Self {
        Self { level: self.level, index: self.index + 16 * k }
    }

    pub fn sites(&self) -> std::ops::Range<i64> {
        self.left()..self.right()
    }

    /// Residue `i` with `I_l(x)` in the sub-collection `I_l^i`.
    pub fn subcollection_index(&self) -> usize {
        (self.index - 8).rem_euclid(16) as usize
    }
}

pub fn interval_sites(iv: DyadicInterval) -> Vec<i64> {
    iv.sites().collect()
}

/// Membership of `iv` in `I_l^i`: its real left endpoint is `2^{l-4}(16y + i)`.
pub fn subcollection(iv: DyadicInterval, i: usize) -> Result<bool> {
    if i > 15 {
        return Err(Error::InvalidParams(format!("sub-collection index {i} not in 0..16")));
    }
    Ok(iv.subcollection_index() == i)
}

/// The interval of `I_l^0` containing site `y`: `[2^l q, 2^l (q + 1))`.
pub fn tile0(level: u32, y: i64) -> DyadicInterval {
    let q = y.div_euclid(1i64 << level);
    DyadicInterval::from_left(level, q << level)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    pub m0: f64,
    pub delta: f64,
    pub c1: f64,
}

impl ScaleParams {
    /// `M0 >= 1` is accepted so that the toy regimes `M0 = 1` can be explored.
    pub fn new(m0: f64, delta: f64, c1: f64) -> Result<Self> {
        if !(m0 >= 1.0) || !m0.is_finite() {
            return Err(Error::InvalidParams(format!("M0 = {m0} must be at least 1")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!("delta = {delta} not in (0, 1)")));
        }
        if !(c1 >= 10.0) || !c1.is_finite() {
            return Err(Error::InvalidParams(format!("c1 = {c1} must be at least 10")));
        }
        Ok(Self { m0, delta, c1 })
    }

    /// `delta = min(0.001, (1.5 - alpha) / 20)`, `c1 = 10`.
    pub fn paper_default(m0: f64, alpha: f64) -> Result<Self> {
        Self::new(m0, f64::min(0.001, (1.5 - alpha) / 20.0), 10.0)
    }

    /// `M_l = M0 2^{delta l}`, snapped to the nearest integer when within rounding.
    pub fn m(&self, level: u32) -> f64 {
        let m = self.m0 * 2f64.powf(self.delta * level as f64);
        let r = m.round();
        if (m - r).abs() <= 1e-9 * m {
            r
        } else {
            m
        }
    }

    /// `M'_l = 2 floor(M_l / (2 c1))`.
    pub fn m_prime(&self, level: u32) -> f64 {
        2.0 * (self.m(level) / (2.0 * self.c1) + 1e-12).floor()
    }

    /// Number of neighbours on each side checked by condition (II).
    pub fn neighbours(&self, level: u32, weak: bool) -> i64 {
        let m = if weak { self.m_prime(level) } else { self.m(level) };
        (m + 1e-12).floor() as i64
    }
}

/// Infinite 1D configuration: `spins` on `[lo, lo + len)` and `outside` elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineConfig {
    pub lo: i64,
    pub spins: Vec<i8>,
    pub outside: i8,
    prefix: Vec<u32>,
}

impl LineConfig {
    pub fn new(lo: i64, spins: Vec<i8>, outside: i8) -> Self {
        let mut c = Self { lo, spins, outside, prefix: Vec::new() };
        c.rebuild();
        c
    }

    pub fn from_config(sigma: &SpinConfiguration) -> Result<Self> {
        match sigma.window {
            Window::Interval { lo, .. } => Ok(Self::new(lo, sigma.spins.clone(), sigma.outside)),
            Window::Box { .. } => Err(Error::DimensionMismatch(2, 1)),
        }
    }

    pub fn to_config(&self) -> SpinConfiguration {
        SpinConfiguration {
            window: Window::Interval { lo: self.lo, len: self.spins.len() },
            spins: self.spins.clone(),
            outside: self.outside,
        }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.spins.len() as i64
    }

    fn rebuild(&mut self) {
        self.prefix.clear();
        self.prefix.push(0);
        let mut acc = 0;
        for &s in &self.spins {
            if s < 0 {
                acc += 1;
            }
            self.prefix.push(acc);
        }
    }

    pub fn get(&self, y: i64) -> i8 {
        if y >= self.lo && y < self.hi() {
            self.spins[(y - self.lo) as usize]
        } else {
            self.outside
        }
    }

    /// Set several sites at once; every site must lie in the window.
    pub fn assign(&mut self, sites: &[i64], v: i8) {
        for &y in sites {
            let i = (y - self.lo) as usize;
            self.spins[i] = v;
        }
        self.rebuild();
    }

    /// Number of minus sites in `[a, b)`.
    pub fn minus_count(&self, a: i64, b: i64) -> i64 {
        if b <= a {
            return 0;
        }
        let (lo, hi) = (self.lo, self.hi());
        let ia = a.clamp(lo, hi);
        let ib = b.clamp(lo, hi);
        let inside = (self.prefix[(ib - lo) as usize] - self.prefix[(ia - lo) as usize]) as i64;
        let outside_count = (b - a) - (ib - ia);
        inside + if self.outside < 0 { outside_count } else { 0 }
    }

    /// Number of sites in `[a, b)` carrying spin `s`.
    pub fn count(&self, a: i64, b: i64, s: i8) -> i64 {
        let m = self.minus_count(a, b);
        if s < 0 {
            m
        } else {
            (b - a).max(0) - m
        }
    }

    pub fn is_constant(&self, a: i64, b: i64) -> bool {
        let m = self.minus_count(a, b);
        m == 0 || m == (b - a).max(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DensityClass {
    pub minus_dense: bool,
    pub minus_vacant: bool,
    pub minus_occupied: bool,
    pub plus_dense: bool,
    pub plus_vacant: bool,
    pub plus_occupied: bool,
}

pub fn classify_density(iv: DyadicInterval, sigma: &LineConfig, sp: &ScaleParams) -> DensityClass {
    let m = sp.m(iv.level);
    let n = iv.len() as f64;
    let minus = sigma.minus_count(iv.left(), iv.right()) as f64;
    let plus = n - minus;
    DensityClass {
        minus_dense: plus * m < n,
        minus_vacant: minus * m <= n,
        minus_occupied: minus * m > n,
        plus_dense: minus * m < n,
        plus_vacant: plus * m <= n,
        plus_occupied: plus * m > n,
    }
}

/// `s`-dense (or weakly `s`-dense) test on the `l`-interval starting at `left`.
fn dense(sigma: &LineConfig, level: u32, left: i64, s: i8, m: f64, c1: f64, weak: bool) -> bool {
    let n = (1i64 << level) as f64;
    let opposite = sigma.count(left, left + (1i64 << level), -s) as f64;
    if weak {
        opposite * m < c1 * n
    } else {
        opposite * m < n
    }
}

/// `s`-favored test depending only on the level and first site of the interval.
pub fn favored_at(sigma: &LineConfig, level: u32, left: i64, s: i8, sp: &ScaleParams, weak: bool) -> bool {
    let len = 1i64 << level;
    if level >= 1 {
        let half = len / 2;
        if sigma.count(left - half, left, s) != half
            || sigma.count(left + len, left + len + half, s) != half
        {
            return false;
        }
    }
    let m = sp.m(level);
    let k_max = sp.neighbours(level, weak);
    for dir in [-1i64, 1] {
        for k in 1..=k_max {
            let l = left + dir * k * len;
            let r = l + len;
            if (dir < 0 && r <= sigma.lo) || (dir > 0 && l >= sigma.hi()) {
                // Every further neighbour on this side carries the outside value.
                if sigma.outside != s {
                    let d = if weak { 1.0 * m < sp.c1 } else { m < 1.0 };
                    if !d {
                        return false;
                    }
                }
                break;
            }
            if !dense(sigma, level, l, s, m, sp.c1, weak) {
                return false;
            }
        }
    }
    true
}

pub fn is_favored(iv: DyadicInterval, sigma: &LineConfig, s: i8, sp: &ScaleParams, weak: bool) -> bool {
    favored_at(sigma, iv.level, iv.left(), s, sp, weak)
}

pub fn is_plus_favored(iv: DyadicInterval, sigma: &LineConfig, sp: &ScaleParams, weak: bool) -> bool {
    is_favored(iv, sigma, 1, sp, weak)
}

pub fn is_minus_favored(iv: DyadicInterval, sigma: &LineConfig, sp: &ScaleParams, weak: bool) -> bool {
    is_favored(iv, sigma, -1, sp, weak)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Isolation {
    pub plus: bool,
    pub minus: bool,
}

impl Isolation {
    pub fn any(&self) -> bool {
        self.plus || self.minus
    }
}

pub fn isolation_at(sigma: &LineConfig, level: u32, left: i64, sp: &ScaleParams, weak: bool) -> Isolation {
    let right = left + (1i64 << level);
    let minus = sigma.minus_count(left, right);
    let plus = (right - left) - minus;
    Isolation {
        plus: minus > 0 && favored_at(sigma, level, left, 1, sp, weak),
        minus: plus > 0 && favored_at(sigma, level, left, -1, sp, weak),
    }
}

pub fn isolation(iv: DyadicInterval, sigma: &LineConfig, sp: &ScaleParams, weak: bool) -> Isolation {
    isolation_at(sigma, iv.level, iv.left(), sp, weak)
}

pub fn is_isolated(iv: DyadicInterval, sigma: &LineConfig, sp: &ScaleParams, weak: bool) -> bool {
    isolation(iv, sigma, sp, weak).any()
}

/// `rho_r(I) = {y : d(y, I) <= (r - 1)|I|}` for the integer interval `[a, b)`.
pub fn expand(a: i64, b: i64, r: f64) -> (i64, i64) {
    let e = ((r - 1.0) * (b - a) as f64 + 1e-9).floor() as i64;
    (a - e, b + e)
}

pub fn expand_interval(iv: DyadicInterval, r: f64) -> (i64, i64) {
    expand(iv.left(), iv.right(), r)
}

/// Distinct `l`-intervals meeting `[a, b)`, from left to right.
pub fn intervals_meeting(level: u32, a: i64, b: i64) -> impl Iterator<Item = DyadicInterval> {
    let len = 1i64 << level;
    let step = if level > 4 { 1i64 << (level - 4) } else { 1 };
    let first = (a - len + 1).div_euclid(step) * step;
    let first = if first < a - len + 1 { first + step } else { first };
    (0..)
        .map(move |t| first + t * step)
        .take_while(move |&l| l < b)
        .map(move |l| DyadicInterval::from_left(level, l))
}

/// Isolated `l`-intervals `I'` with `rho_{M_l}(I') ⊆ [a, b)`.
pub fn isolated_in_region(a: i64, b: i64, sigma: &LineConfig, sp: &ScaleParams) -> Vec<DyadicInterval> {
    let mut out = Vec::new();
    let mut level = 0u32;
    while (1i64 << level) <= b - a {
        let m = sp.m(level);
        for iv in intervals_meeting(level, a, b) {
            let (ea, eb) = expand_interval(iv, m);
            if ea >= a && eb <= b && is_isolated(iv, sigma, sp, false) {
                out.push(iv);
            }
        }
        level += 1;
    }
    out
}

pub fn is_balanced(a: i64, b: i64, sigma: &LineConfig, sp: &ScaleParams) -> bool {
    isolated_in_region(a, b, sigma, sp).is_empty()
}
