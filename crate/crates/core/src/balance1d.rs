//! The balancing procedure, its trace and the Peierls map `(I_sigma, A_sigma)`.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::intervals1d::{
    expand_interval, intervals_meeting, isolation, isolation_at, is_favored, DyadicInterval,
    LineConfig, ScaleParams,
};
use crate::kernel::{SpinConfiguration, Window};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    ToPlus,
    ToMinus,
}

impl Direction {
    pub fn sign(&self) -> i8 {
        match self {
            Direction::ToPlus => 1,
            Direction::ToMinus => -1,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::ToPlus => "to_plus",
            Direction::ToMinus => "to_minus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub interval: DyadicInterval,
    pub direction: Direction,
    pub flipped: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceTrace {
    pub initial: LineConfig,
    pub steps: Vec<Step>,
    pub final_config: LineConfig,
    pub params: ScaleParams,
}

impl BalanceTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `sigma^s`, replaying the first `s` steps.
    pub fn config_at(&self, s: usize) -> LineConfig {
        let mut c = self.initial.clone();
        for st in &self.steps[..s.min(self.steps.len())] {
            c.assign(&st.flipped, st.direction.sign());
        }
        c
    }

    /// All of `sigma^0, ..., sigma^S`.
    pub fn configs(&self) -> Vec<LineConfig> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut c = self.initial.clone();
        out.push(c.clone());
        for st in &self.steps {
            c.assign(&st.flipped, st.direction.sign());
            out.push(c.clone());
        }
        out
    }

    /// One line per step: `level index direction flipped-count`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for st in &self.steps {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                st.interval.level,
                st.interval.index,
                st.direction.as_str(),
                st.flipped.len()
            );
        }
        s
    }
}

/// Largest level searched for isolated intervals: `ceil(log2(32 |Lambda|))`.
pub fn max_level(n: usize) -> u32 {
    let t = 32 * n.max(1) as u64;
    64 - (t - 1).leading_zeros()
}

pub fn step_budget(n: usize) -> usize {
    let lg = (n.max(2) as f64).log2().ceil() as usize;
    64 * n.max(1) * lg
}

fn check_input(sigma: &SpinConfiguration) -> Result<LineConfig> {
    if sigma.outside != 1 {
        return Err(Error::NotPlusBoundary);
    }
    let cfg = LineConfig::from_config(sigma)?;
    match sigma.window {
        Window::Interval { lo, len } if lo <= 0 && 0 < lo + len as i64 => Ok(cfg),
        _ => Err(Error::Precondition("the volume must contain the origin".into())),
    }
}

/// Smallest, then leftmost, isolated interval outside `C^{+,0}`.
fn select(cfg: &LineConfig, sp: &ScaleParams, lmax: u32) -> Option<(DyadicInterval, Direction)> {
    for level in 0..=lmax {
        for iv in intervals_meeting(level, cfg.lo, cfg.hi()) {
            let iso = isolation_at(cfg, level, iv.left(), sp, false);
            // An interval isolated for both signs (possible only when M_l < 2) counts as plus.
            if iso.plus {
                if !iv.contains(0) {
                    return Some((iv, Direction::ToPlus));
                }
            } else if iso.minus {
                return Some((iv, Direction::ToMinus));
            }
        }
    }
    None
}

pub fn run_balancing(sigma: &SpinConfiguration, sp: &ScaleParams) -> Result<BalanceTrace> {
    let initial = check_input(sigma)?;
    let n = initial.spins.len();
    let lmax = max_level(n);
    let budget = step_budget(n);
    let mut cfg = initial.clone();
    let mut steps = Vec::new();
    while let Some((iv, dir)) = select(&cfg, sp, lmax) {
        if steps.len() >= budget {
            return Err(Error::StepBudgetExceeded(budget));
        }
        let target = dir.sign();
        let flipped: Vec<i64> = iv.sites().filter(|&y| cfg.get(y) != target).collect();
        if flipped.iter().any(|&y| y < cfg.lo || y >= cfg.hi()) {
            return Err(Error::Precondition(format!(
                "selected interval {iv:?} would flip sites outside the volume"
            )));
        }
        cfg.assign(&flipped, target);
        steps.push(Step { interval: iv, direction: dir, flipped });
    }
    Ok(BalanceTrace { initial, steps, final_config: cfg, params: *sp })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeierlsResult {
    pub trace: BalanceTrace,
    pub i_sigma: Option<DyadicInterval>,
    pub a_sigma: Vec<i64>,
}

/// Smallest, then leftmost, isolated interval with respect to `cfg` containing 0.
pub fn smallest_isolated_containing_origin(cfg: &LineConfig, sp: &ScaleParams, lmax: u32) -> Option<DyadicInterval> {
    (0..=lmax).find_map(|level| {
        intervals_meeting(level, 0, 1).find(|iv| isolation(*iv, cfg, sp, false).any())
    })
}

pub fn peierls_map(sigma: &SpinConfiguration, sp: &ScaleParams) -> Result<PeierlsResult> {
    let trace = run_balancing(sigma, sp)?;
    let lmax = max_level(trace.initial.spins.len()) + 2;
    let fin = &trace.final_config;
    let i_sigma = smallest_isolated_containing_origin(fin, sp, lmax);
    let a_sigma = i_sigma
        .map(|iv| iv.sites().filter(|&y| fin.get(y) < 0).collect())
        .unwrap_or_default();
    Ok(PeierlsResult { trace, i_sigma, a_sigma })
}

/// `|I ∩ B_t^c| >= |I| / 16` for every step `t < T`, with `I = [a, b)`.
pub fn check_tame(a: i64, b: i64, trace: &BalanceTrace, t_max: usize) -> bool {
    let len = b - a;
    trace.steps.iter().take(t_max).all(|st| {
        let (l, r) = (st.interval.left(), st.interval.right());
        let overlap = (b.min(r) - a.max(l)).max(0);
        16 * (len - overlap) >= len
    })
}

/// Steps after which `rho_{3/2}(B_s)` stops being constant; empty when the
/// frozen-core property holds throughout the trace.
pub fn frozen_core_violations(trace: &BalanceTrace) -> Vec<(usize, usize)> {
    let configs = trace.configs();
    let mut bad = Vec::new();
    for (s, st) in trace.steps.iter().enumerate() {
        let (a, b) = expand_interval(st.interval, 1.5);
        for (t, c) in configs.iter().enumerate().skip(s + 1) {
            if !c.is_constant(a, b) {
                bad.push((s, t));
            }
        }
    }
    bad
}

/// The selected intervals repeat only if the procedure cycles.
pub fn repeated_selections(trace: &BalanceTrace) -> usize {
    let mut seen = HashSet::new();
    trace
        .steps
        .iter()
        .filter(|st| !seen.insert((st.interval.level, st.interval.left())))
        .count()
}

/// Minus sites of the final configuration lying outside the volume.
pub fn outside_minuses(trace: &BalanceTrace) -> usize {
    // The configuration never changes outside the volume; recount explicitly.
    let c = &trace.final_config;
    if c.outside < 0 {
        usize::MAX
    } else {
        trace
            .steps
            .iter()
            .flat_map(|st| st.flipped.iter())
            .filter(|&&y| y < c.lo || y >= c.hi())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PersistenceReport {
    pub flipped_sites: usize,
    pub weakly_favored: usize,
}

/// For each flipped site, whether the last interval flipping it is weakly
/// favored in `sigma^S` with the sign it was flipped to.
pub fn weak_favor_persistence(trace: &BalanceTrace) -> PersistenceReport {
    let mut last = std::collections::HashMap::new();
    for st in &trace.steps {
        for &y in &st.flipped {
            last.insert(y, (st.interval, st.direction));
        }
    }
    let fin = &trace.final_config;
    let sp = &trace.params;
    let ok = last
        .values()
        .filter(|(iv, dir)| is_favored(*iv, fin, dir.sign(), sp, true))
        .count();
    PersistenceReport { flipped_sites: last.len(), weakly_favored: ok }
}
