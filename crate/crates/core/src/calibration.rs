//! Empirically calibrated constants, stored as `name alpha delta M0 value` lines.

use crate::{Error, Result};

/// The committed calibration table.
pub const BUNDLED: &str = include_str!("../data/calibration.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    pub alpha: f64,
    pub delta: f64,
    pub m0: f64,
    pub value: f64,
}

impl Entry {
    pub fn new(name: &str, alpha: f64, delta: f64, m0: f64, value: f64) -> Self {
        Self { name: name.to_string(), alpha, delta, m0, value }
    }

    fn matches(&self, name: &str, alpha: f64, delta: f64, m0: f64) -> bool {
        self.name == name && self.alpha == alpha && self.delta == delta && self.m0 == m0
    }
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::InvalidParams(format!("calibration line {}: {line}", no + 1));
        if f.len() != 5 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        out.push(Entry { name: f[0].to_string(), alpha: num(f[1])?, delta: num(f[2])?, m0: num(f[3])?, value: num(f[4])? });
    }
    Ok(out)
}

pub fn format(entries: &[Entry]) -> String {
    let mut s = String::from("# name alpha delta M0 value\n");
    for e in entries {
        s.push_str(&format!("{} {} {} {} {:e}\n", e.name, e.alpha, e.delta, e.m0, e.value));
    }
    s
}

pub fn lookup(entries: &[Entry], name: &str, alpha: f64, delta: f64, m0: f64) -> Option<f64> {
    entries.iter().find(|e| e.matches(name, alpha, delta, m0)).map(|e| e.value)
}

/// Replace or append.
pub fn upsert(entries: &mut Vec<Entry>, e: Entry) {
    match entries.iter_mut().find(|x| x.matches(&e.name, e.alpha, e.delta, e.m0)) {
        Some(x) => x.value = e.value,
        None => entries.push(e),
    }
}

pub fn bundled(name: &str, alpha: f64, delta: f64, m0: f64) -> Option<f64> {
    parse(BUNDLED).ok().and_then(|t| lookup(&t, name, alpha, delta, m0))
}

/// Cutoff used for truncated one-dimensional boundaries in calibration.
pub const CUTOFF_1D: i64 = 10_000;

/// `cbar2`, `c2` and the toy-regime `eb2_min_ratio` on `[-5, 5]`.
pub fn compute_1d(alpha: f64, delta: f64, m0: f64) -> Result<Vec<Entry>> {
    use crate::balance1d::peierls_map;
    use crate::bounds1d::{calibrate_c2, calibrate_cbar2, energy_bound_2_check, ThetaParams};
    use crate::intervals1d::ScaleParams;
    use crate::kernel::{CouplingKernel, EnergyModel, PairCounting, SpinConfiguration, TruncatedKernel, Window};

    let k = CouplingKernel::new(alpha, 1)?;
    let sp = ScaleParams::new(m0, delta, 10.0)?;
    let tp = ThetaParams::new(alpha, delta);
    let tk = TruncatedKernel::new(k, CUTOFF_1D)?;
    let mut out = Vec::new();
    if let Some(v) = calibrate_cbar2(&k, &sp, &tp, 8) {
        out.push(Entry::new("cbar2", alpha, delta, m0, v));
    }
    out.push(Entry::new("c2", alpha, delta, m0, calibrate_c2(-5, 11, &sp, &tp, &tk)?));
    let model = EnergyModel::new(Window::Interval { lo: -5, len: 11 }, k, CUTOFF_1D, PairCounting::Unordered)?;
    let mut ratio = f64::INFINITY;
    for bits in (0u32..(1 << 11)).filter(|b| b >> 5 & 1 == 1) {
        let spins = (0..11).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
        let sigma = SpinConfiguration::line(-5, spins, 1)?;
        let pr = peierls_map(&sigma, &sp)?;
        let e = energy_bound_2_check(&sigma, &pr, &model, &tk)?;
        ratio = ratio.min(e.delta_h / e.j_value);
    }
    out.push(Entry::new("eb2_min_ratio", alpha, delta, m0, ratio));
    Ok(out)
}

/// Cube side, minority sizes and annealing budget for the `b8` fit at `alpha = 3`.
pub const MIXING_SIDE: usize = 32;
pub const MIXING_SIZES: [usize; 5] = [1, 4, 16, 64, 256];
pub const MIXING_SWEEPS: usize = 60;
pub const MIXING_RESTARTS: usize = 4;
pub const MIXING_SEED: u64 = 2024;

/// Annealed minima per minority size and the fit of `c sqrt(m+1) ln(m+1)`.
pub fn compute_b8(sweeps: usize, restarts: usize, seed: u64) -> Result<(Vec<crate::coarse2d::MixingProbe>, crate::coarse2d::MixingFit)> {
    use crate::coarse2d::{cube_mixing_bound_probe, fit_mixing};
    let k = crate::kernel::CouplingKernel::new(3.0, 2)?;
    let probes = MIXING_SIZES
        .iter()
        .map(|&m| cube_mixing_bound_probe(MIXING_SIDE, m, &k, sweeps, restarts, seed.wrapping_add(m as u64)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_mixing(&probes)?;
    Ok((probes, fit))
}

/// `b8_fit` and `b8_floor` entries (stored with `delta = 0`, `M0 = 0`).
pub fn b8_entries(fit: &crate::coarse2d::MixingFit) -> Vec<Entry> {
    vec![Entry::new("b8_fit", 3.0, 0.0, 0.0, fit.c), Entry::new("b8_floor", 3.0, 0.0, 0.0, fit.floor)]
}
