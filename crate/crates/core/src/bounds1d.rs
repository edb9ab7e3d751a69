//! Energy-side lemmas in one dimension: interaction lower bounds, lambda-good
//! sequences, approximate intervals and the two Peierls energy bounds.

use crate::balance1d::{peierls_map, Direction, PeierlsResult};
use crate::intervals1d::{expand, intervals_meeting, is_balanced, DyadicInterval, LineConfig, ScaleParams};
use crate::kernel::{CouplingKernel, EnergyModel, SpinConfiguration, TruncatedKernel};
use crate::{geq_slack, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn geq(value: f64, bound: f64) -> Self {
        Self { value, bound, pass: geq_slack(value, bound) }
    }
}

/// `cbar_1 = 2^{-alpha}`, from `sum_{k=m+1}^{2m} k^{-alpha} >= m (2m)^{-alpha}`.
pub fn cbar1(alpha: f64) -> f64 {
    2f64.powf(-alpha)
}

/// `cbar_3 = 2^alpha / cbar_1`.
pub fn cbar3(alpha: f64) -> f64 {
    2f64.powf(2.0 * alpha)
}

/// `J(I^-, I^+) >= cbar_1 m^{2-alpha}` on `I = [a, b)`.
pub fn min_interaction_lower_bound_check(a: i64, b: i64, sigma: &LineConfig, k: &CouplingKernel) -> Check {
    let minus: Vec<i64> = (a..b).filter(|&y| sigma.get(y) < 0).collect();
    let plus: Vec<i64> = (a..b).filter(|&y| sigma.get(y) > 0).collect();
    let m = minus.len().min(plus.len());
    let j = crate::kernel::interaction_1d(&minus, &plus, k);
    let bound = if m == 0 { 0.0 } else { cbar1(k.alpha) * (m as f64).powf(2.0 - k.alpha) };
    Check::geq(j, bound)
}

/// `J(A, A^c) >= cbar_1 |A|^{2-alpha}` with the truncated complement.
pub fn set_interaction_lower_bound_check(a: &[i64], tk: &TruncatedKernel) -> Result<Check> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let alpha = tk.kernel.alpha;
    Ok(Check::geq(tk.boundary_1d(a), cbar1(alpha) * (a.len() as f64).powf(2.0 - alpha)))
}

/// Level from `(15/8) 2^{l-2} <= n <= (15/8) 2^{l-1}`.
pub fn band_level(n: i64) -> u32 {
    (0..63u32)
        .find(|&l| 16 * n <= 15 * (1i64 << l) && 15 * (1i64 << l) <= 32 * n)
        .unwrap_or(0)
}

fn best_cover(a: i64, b: i64, level: u32) -> Option<(DyadicInterval, i64)> {
    let n = b - a;
    let len = 1i64 << level;
    if len < n {
        return None;
    }
    let mut best: Option<(DyadicInterval, i64)> = None;
    for iv in intervals_meeting(level, b - len, b) {
        let (l, r) = (iv.left(), iv.right());
        if l > a || r < b {
            continue;
        }
        let worst = (a - l).max(r - b);
        if 10 * worst <= 7 * n && best.is_none_or(|(_, w)| worst < w) {
            best = Some((iv, worst));
        }
    }
    best
}

/// An `l`-interval `[a', b']` covering `I = [a, b)` with both endpoint
/// distances at most `0.7 |I|`. The band level is tried first; short intervals
/// where rounding defeats it fall back to the other levels.
pub fn approximate_interval(a: i64, b: i64) -> Result<DyadicInterval> {
    let n = b - a;
    if n < 1 {
        return Err(Error::Precondition("interval must be nonempty".into()));
    }
    let band = band_level(n);
    if let Some((iv, _)) = best_cover(a, b, band) {
        return Ok(iv);
    }
    (0..=band + 2)
        .filter_map(|l| best_cover(a, b, l))
        .min_by_key(|&(iv, w)| (w, iv.level))
        .map(|(iv, _)| iv)
        .ok_or_else(|| Error::Precondition(format!("no covering interval for [{a}, {b})")))
}

/// The lambda-good property of `p_1..p_N`.
pub fn is_lambda_good(bits: &[bool], lambda: f64) -> Result<bool> {
    let n = bits.len();
    if n == 0 {
        return Err(Error::Precondition("sequence must be nonempty".into()));
    }
    // nearest one strictly left of i / strictly right of j
    let mut left_one = vec![None; n];
    let mut last = None;
    for i in 0..n {
        left_one[i] = last;
        if bits[i] {
            last = Some(i);
        }
    }
    let mut right_one = vec![None; n];
    let mut next = None;
    for i in (0..n).rev() {
        right_one[i] = next;
        if bits[i] {
            next = Some(i);
        }
    }
    for i in 0..n {
        let mut has_one = false;
        for j in i..n {
            has_one |= bits[j];
            if (i == 0 && j == n - 1) || !has_one {
                continue;
            }
            let reach = lambda * (j - i + 1) as f64 + 1.0;
            let dl = left_one[i].map(|x| (i - x) as f64);
            let dr = right_one[j].map(|x| (x - j) as f64);
            let ok = dl.is_some_and(|d| d <= reach) || dr.is_some_and(|d| d <= reach);
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub const SEQUENCE_LIMIT: usize = 20;

/// Minimum number of ones over lambda-good sequences with `p_1 = p_N = 1`,
/// against `N^{log_{lambda+2} 2}`.
pub fn sequence01_bound_check(n: usize, lambda: f64) -> Result<(usize, f64, bool)> {
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    if n > SEQUENCE_LIMIT {
        return Err(Error::SizeGuard { size: n, limit: SEQUENCE_LIMIT });
    }
    let bound = (n as f64).powf(2f64.ln() / (lambda + 2.0).ln());
    if n == 1 {
        return Ok((1, bound, 1.0 >= bound));
    }
    let inner = n - 2;
    let mut best = usize::MAX;
    let mut bits = vec![false; n];
    for mask in 0u32..(1u32 << inner) {
        let ones = mask.count_ones() as usize + 2;
        if ones >= best {
            continue;
        }
        bits[0] = true;
        bits[n - 1] = true;
        for i in 0..inner {
            bits[i + 1] = mask >> i & 1 == 1;
        }
        if is_lambda_good(&bits, lambda)? {
            best = ones;
        }
    }
    Ok((best, bound, best as f64 >= bound))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParams {
    pub theta: f64,
}

impl ThetaParams {
    /// `theta = min(2 - alpha - 10 delta, log_{3.9} 2)`; negative for large toy `delta`.
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self { theta: f64::min(2.0 - alpha - 10.0 * delta, 2f64.ln() / 3.9f64.ln()) }
    }
}

/// `J(W^-, W^+)` on `W = [a, b)`, each unordered pair once.
pub fn mixed_interaction(a: i64, b: i64, sigma: &LineConfig, k: &CouplingKernel) -> f64 {
    let minus: Vec<i64> = (a..b).filter(|&y| sigma.get(y) < 0).collect();
    let plus: Vec<i64> = (a..b).filter(|&y| sigma.get(y) > 0).collect();
    crate::kernel::interaction_1d(&minus, &plus, k)
}

/// Mixed interaction over `rho_{3/2}(I)` against `cbar_2 |I|^theta`.
pub fn balanced_interaction_check(
    a: i64,
    b: i64,
    sigma: &LineConfig,
    sp: &ScaleParams,
    tp: &ThetaParams,
    cbar2: f64,
    k: &CouplingKernel,
) -> Result<Check> {
    let (wa, wb) = expand(a, b, 1.5);
    if sigma.is_constant(a, b) {
        return Err(Error::Precondition("configuration is constant on the interval".into()));
    }
    if !is_balanced(wa, wb, sigma, sp) {
        return Err(Error::Precondition("configuration is not balanced on the expansion".into()));
    }
    let j = mixed_interaction(wa, wb, sigma, k);
    Ok(Check::geq(j, cbar2 * ((b - a) as f64).powf(tp.theta)))
}

/// Empirical `cbar_2`: minimum of `J(W^-, W^+) / |I|^theta` over intervals
/// `[0, L)` with `2 <= L <= max_len` and every configuration on `W` that is
/// balanced there and not constant on `I`; plus spins outside `W`.
pub fn calibrate_cbar2(k: &CouplingKernel, sp: &ScaleParams, tp: &ThetaParams, max_len: i64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for len in 2..=max_len {
        let (wa, wb) = expand(0, len, 1.5);
        let w = (wb - wa) as usize;
        if w > 22 {
            break;
        }
        for bits in 0u32..(1 << w) {
            let spins = (0..w).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
            let cfg = LineConfig::new(wa, spins, 1);
            if cfg.is_constant(0, len) || !is_balanced(wa, wb, &cfg, sp) {
                continue;
            }
            let r = mixed_interaction(wa, wb, &cfg, k) / (len as f64).powf(tp.theta);
            best = Some(best.map_or(r, |b| b.min(r)));
        }
    }
    best
}

/// `J(A_sigma, A_sigma^c) >= c_2 |I_sigma|^theta`.
pub fn energy_bound_1_check(pr: &PeierlsResult, tk: &TruncatedKernel, tp: &ThetaParams, c2: f64) -> Result<Check> {
    let iv = pr.i_sigma.ok_or(Error::EmptySet)?;
    if pr.a_sigma.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(Check::geq(tk.boundary_1d(&pr.a_sigma), c2 * (iv.len() as f64).powf(tp.theta)))
}

/// Configurations on `[lo, lo + n)` with a minus at the origin, as bit masks.
fn origin_minus_configs(lo: i64, n: usize) -> impl Iterator<Item = SpinConfiguration> {
    let zero = (-lo) as usize;
    (0u32..(1 << n))
        .filter(move |bits| bits >> zero & 1 == 1)
        .map(move |bits| {
            let spins = (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
            SpinConfiguration::line(lo, spins, 1).expect("valid line")
        })
}

/// Empirical `c_2`: minimum of `J(A_sigma) / |I_sigma|^theta` over every
/// configuration on `[lo, lo + n)` with a minus at the origin.
pub fn calibrate_c2(lo: i64, n: usize, sp: &ScaleParams, tp: &ThetaParams, tk: &TruncatedKernel) -> Result<f64> {
    let mut best = f64::INFINITY;
    for sigma in origin_minus_configs(lo, n) {
        let pr = peierls_map(&sigma, sp)?;
        let iv = pr.i_sigma.ok_or(Error::EmptySet)?;
        let r = tk.boundary_1d(&pr.a_sigma) / (iv.len() as f64).powf(tp.theta);
        best = best.min(r);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBound2 {
    pub delta_h: f64,
    pub j_value: f64,
    pub pass: bool,
}

/// `H(sigma) - H(tau_{A_sigma} sigma) >= J(A_sigma, A_sigma^c)` at zero field;
/// both sides share the model's cutoff.
pub fn energy_bound_2_check(sigma: &SpinConfiguration, pr: &PeierlsResult, model: &EnergyModel, tk: &TruncatedKernel) -> Result<EnergyBound2> {
    if pr.a_sigma.is_empty() {
        return Err(Error::EmptySet);
    }
    let lo = match sigma.window {
        crate::kernel::Window::Interval { lo, .. } => lo,
        _ => return Err(Error::DimensionMismatch(2, 1)),
    };
    let h0 = model.energy(&sigma.spins, sigma.outside, 0.0, None);
    let mut flipped = sigma.spins.clone();
    for &y in &pr.a_sigma {
        let i = (y - lo) as usize;
        flipped[i] = -flipped[i];
    }
    let h1 = model.energy(&flipped, sigma.outside, 0.0, None);
    let delta_h = h0 - h1;
    let j_value = tk.boundary_1d(&pr.a_sigma);
    let pass = delta_h >= j_value - 1e-9 * delta_h.abs();
    Ok(EnergyBound2 { delta_h, j_value, pass })
}

/// Aggregate of a ratio-report checker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest `bound / value` seen (>= 1 means every instance holds).
    pub min_ratio: f64,
}

impl Default for RatioReport {
    fn default() -> Self {
        Self { checked: 0, violations: 0, min_ratio: f64::INFINITY }
    }
}

impl RatioReport {
    /// Record `value <= bound`.
    pub fn record_leq(&mut self, value: f64, bound: f64) {
        self.checked += 1;
        if !crate::leq_slack(value, bound) {
            self.violations += 1;
        }
        if value > 0.0 {
            self.min_ratio = self.min_ratio.min(bound / value);
        }
    }

    pub fn merge(&mut self, other: &RatioReport) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.min_ratio = self.min_ratio.min(other.min_ratio);
    }
}

/// `sum_{x in A, y notin I_sigma, sigma_x = sigma^S_y = -1} J_xy <= 0.1 J(A, A^c)`.
pub fn first_interaction_check(pr: &PeierlsResult, tk: &TruncatedKernel) -> Result<RatioReport> {
    let iv = pr.i_sigma.ok_or(Error::EmptySet)?;
    let init = &pr.trace.initial;
    let fin = &pr.trace.final_config;
    let xs: Vec<i64> = pr.a_sigma.iter().copied().filter(|&x| init.get(x) < 0).collect();
    let ys: Vec<i64> = (fin.lo..fin.hi()).filter(|&y| !iv.contains(y) && fin.get(y) < 0).collect();
    let lhs = tk.cross_1d(&xs, &ys);
    let mut r = RatioReport::default();
    r.record_leq(lhs, 0.1 * tk.boundary_1d(&pr.a_sigma));
    Ok(r)
}

/// Last interval flipping each site, with the plus (resp. minus) set of that
/// interval just before its step.
struct Flipped {
    interval: DyadicInterval,
    step: usize,
    direction: Direction,
}

fn last_flips(pr: &PeierlsResult) -> Vec<(i64, Flipped)> {
    let mut last = std::collections::BTreeMap::new();
    for (s, st) in pr.trace.steps.iter().enumerate() {
        for &y in &st.flipped {
            last.insert(y, Flipped { interval: st.interval, step: s, direction: st.direction });
        }
    }
    last.into_iter().collect()
}

/// Distinct intervals of `F_l(-, sigma)` (`to_minus`) or `F_l(+, sigma)` (`to_plus`).
fn flip_families(pr: &PeierlsResult, dir: Direction) -> Vec<(DyadicInterval, usize)> {
    let in_a = |y: i64| pr.a_sigma.binary_search(&y).is_ok();
    let init = &pr.trace.initial;
    let fin = &pr.trace.final_config;
    let mut out: Vec<(DyadicInterval, usize)> = last_flips(pr)
        .into_iter()
        .filter(|(y, f)| {
            f.direction == dir
                && match dir {
                    Direction::ToMinus => in_a(*y) && init.get(*y) > 0,
                    Direction::ToPlus => !in_a(*y) && init.get(*y) < 0 && fin.get(*y) > 0,
                }
        })
        .map(|(_, f)| (f.interval, f.step))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `rho_{M'_l/2}(I_l) ⊆ I_sigma` for every `l < n` and `I_l` in `F_l(-, sigma)`;
/// intervals with `M'_l < 2` are skipped.
pub fn fake_expansion_check(pr: &PeierlsResult) -> Result<RatioReport> {
    let isig = pr.i_sigma.ok_or(Error::EmptySet)?;
    let sp = &pr.trace.params;
    let mut r = RatioReport::default();
    for (iv, _) in flip_families(pr, Direction::ToMinus) {
        let mp = sp.m_prime(iv.level);
        if iv.level >= isig.level || mp < 2.0 {
            continue;
        }
        let (a, b) = expand(iv.left(), iv.right(), mp / 2.0);
        r.checked += 1;
        if a < isig.left() || b > isig.right() {
            r.violations += 1;
        }
    }
    Ok(r)
}

fn set_of(a: i64, b: i64, pred: impl Fn(i64) -> bool) -> Vec<i64> {
    (a..b).filter(|&y| pred(y)).collect()
}

/// Both far and close interaction lemmas for `F(-, sigma)` and `F(+, sigma)`.
/// `B` is the complement of `rho_{M'_l/2}(I)` within `reach` of the volume.
pub fn flipped_interaction_checks(pr: &PeierlsResult, k: &CouplingKernel, reach: i64) -> Result<(RatioReport, RatioReport)> {
    pr.i_sigma.ok_or(Error::EmptySet)?;
    let sp = &pr.trace.params;
    let configs = pr.trace.configs();
    let in_a = |y: i64| pr.a_sigma.binary_search(&y).is_ok();
    let fin = &pr.trace.final_config;
    let (lo, hi) = (fin.lo - reach, fin.hi() + reach);
    let alpha = k.alpha;
    let mut far = RatioReport::default();
    let mut close = RatioReport::default();
    for dir in [Direction::ToMinus, Direction::ToPlus] {
        // For F(-): flipped set is I^+(sigma^{s_I}), target side is A^c.
        let target_in_a = dir == Direction::ToPlus;
        for (iv, step) in flip_families(pr, dir) {
            let level = iv.level;
            let mp = sp.m_prime(level);
            if mp < 2.0 {
                continue;
            }
            let before = &configs[step];
            let flipped = set_of(iv.left(), iv.right(), |y| before.get(y) != dir.sign());
            let weight = flipped.len() as f64 / iv.len() as f64;
            let (ta, tb) = expand(iv.left(), iv.right(), mp / 2.0);
            let outside_b = set_of(lo, hi, |y| (y < ta || y >= tb) && in_a(y) == target_in_a);
            let inside_same = set_of(ta, tb, |y| in_a(y) != target_in_a);
            let lhs = crate::kernel::interaction_1d(&flipped, &outside_b, k);
            let rhs = 4.0 / mp * crate::kernel::interaction_1d(&inside_same, &outside_b, k) * weight;
            far.record_leq(lhs, rhs);
            let half = (mp / 2.0).floor() as i64;
            for kk in (-half..=half).filter(|&kk| kk != 0) {
                let ik = iv.shifted(kk);
                let target = set_of(ik.left(), ik.right(), |y| in_a(y) == target_in_a);
                let other = set_of(ik.left(), ik.right(), |y| in_a(y) != target_in_a);
                let lhs = crate::kernel::interaction_1d(&flipped, &target, k);
                let rhs = cbar3(alpha) * mp.powf(1.0 - alpha) * crate::kernel::interaction_1d(&target, &other, k) * weight;
                close.record_leq(lhs, rhs);
            }
        }
    }
    Ok((far, close))
}
