//! Experiment configuration: TOML file with `[model]`, `[window]`, `[run]` and
//! `[tail]` sections, per-subcommand defaults and flag overrides.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[serde(rename = "verify-1d")]
    Verify1d,
    #[serde(rename = "verify-2d")]
    Verify2d,
    DeltaTail,
    Simulate,
    EnumerateContours,
    Calibrate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify1d => "verify-1d",
            Command::Verify2d => "verify-2d",
            Command::DeltaTail => "delta-tail",
            Command::Simulate => "simulate",
            Command::EnumerateContours => "enumerate-contours",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub m0: f64,
    pub delta: f64,
    pub c1: f64,
    /// Cube scale exponent.
    pub r: u32,
    /// Partition constant `M`.
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowConfig {
    /// Sites per side.
    pub size: usize,
    pub cutoff: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub seeds: usize,
    pub sweeps: usize,
    pub samples: usize,
    pub max_size: usize,
    pub jobs: usize,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailConfig {
    pub sym_diff: Vec<usize>,
    pub lambda_factors: Vec<f64>,
}

/// Fully resolved configuration, written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub model: ModelConfig,
    pub window: WindowConfig,
    pub run: RunConfig,
    pub tail: TailConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialModel {
    dim: Option<usize>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
    m0: Option<f64>,
    delta: Option<f64>,
    c1: Option<f64>,
    r: Option<u32>,
    m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialWindow {
    size: Option<usize>,
    cutoff: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialRun {
    seed: Option<u64>,
    seeds: Option<usize>,
    sweeps: Option<usize>,
    samples: Option<usize>,
    max_size: Option<usize>,
    jobs: Option<usize>,
    out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialTail {
    sym_diff: Option<Vec<usize>>,
    lambda_factors: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    command: Option<Command>,
    model: Option<PartialModel>,
    window: Option<PartialWindow>,
    run: Option<PartialRun>,
    tail: Option<PartialTail>,
}

/// Flag overrides; `None` leaves the file or default value in place.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub window: Option<usize>,
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        let mut c = ExperimentConfig {
            command,
            model: ModelConfig { dim: 1, alpha: vec![1.3], beta: vec![1.0], epsilon: vec![0.0], m0: 1.0, delta: 0.25, c1: 10.0, r: 5, m: 2.0 },
            window: WindowConfig { size: 11, cutoff: 10_000 },
            run: RunConfig { seed: 1, seeds: 8, sweeps: 2000, samples: 200, max_size: 8, jobs: 0, out: "out".into() },
            tail: TailConfig { sym_diff: vec![1, 4, 8], lambda_factors: vec![3.0, 4.0, 6.0] },
        };
        match command {
            Command::Verify1d | Command::Calibrate => {}
            Command::Verify2d => {
                c.model.dim = 2;
                c.model.alpha = vec![2.5, 3.0];
                c.window = WindowConfig { size: 64, cutoff: 256 };
            }
            Command::DeltaTail => {
                c.model.epsilon = vec![0.25, 0.5, 1.0];
                c.window.size = 12;
                c.window.cutoff = 1000;
                c.run.samples = 100_000;
            }
            Command::Simulate => {
                c.model.beta = vec![0.5, 1.0, 2.0, 4.0];
                c.model.epsilon = vec![0.1];
                c.window.size = 64;
            }
            Command::EnumerateContours => {
                c.model.dim = 2;
                c.model.alpha = vec![3.0];
                c.model.m = 1.5;
            }
        }
        if command == Command::Calibrate {
            c.run.sweeps = lrfim::calibration::MIXING_SWEEPS;
            c.run.seeds = lrfim::calibration::MIXING_RESTARTS;
            c.run.seed = lrfim::calibration::MIXING_SEED;
        }
        c
    }

    /// Defaults, then the file (if any), then flags; validated.
    pub fn resolve(command: Command, text: Option<&str>, o: &Overrides) -> Result<Self> {
        let mut c = Self::defaults(command);
        if let Some(text) = text {
            if text.trim().is_empty() {
                bail!("config file is empty: expected at least one of the sections [model], [window], [run], [tail]");
            }
            let p: PartialConfig = toml::from_str(text).context("config does not match the schema")?;
            if p.model.is_none() && p.window.is_none() && p.run.is_none() && p.tail.is_none() {
                bail!("config has no [model], [window], [run] or [tail] section");
            }
            if let Some(cmd) = p.command {
                if cmd != command {
                    bail!("config is for `{}` but `{}` was requested", cmd.name(), command.name());
                }
            }
            if let Some(m) = p.model {
                set(&mut c.model.dim, m.dim);
                set(&mut c.model.alpha, m.alpha);
                set(&mut c.model.beta, m.beta);
                set(&mut c.model.epsilon, m.epsilon);
                set(&mut c.model.m0, m.m0);
                set(&mut c.model.delta, m.delta);
                set(&mut c.model.c1, m.c1);
                set(&mut c.model.r, m.r);
                set(&mut c.model.m, m.m);
            }
            if let Some(w) = p.window {
                set(&mut c.window.size, w.size);
                set(&mut c.window.cutoff, w.cutoff);
            }
            if let Some(r) = p.run {
                set(&mut c.run.seed, r.seed);
                set(&mut c.run.seeds, r.seeds);
                set(&mut c.run.sweeps, r.sweeps);
                set(&mut c.run.samples, r.samples);
                set(&mut c.run.max_size, r.max_size);
                set(&mut c.run.jobs, r.jobs);
                set(&mut c.run.out, r.out);
            }
            if let Some(t) = p.tail {
                set(&mut c.tail.sym_diff, t.sym_diff);
                set(&mut c.tail.lambda_factors, t.lambda_factors);
            }
        }
        set(&mut c.run.seed, o.seed);
        set(&mut c.run.out, o.out.clone());
        set(&mut c.run.jobs, o.jobs);
        set(&mut c.model.alpha, o.alpha.clone());
        set(&mut c.model.beta, o.beta.clone());
        set(&mut c.model.epsilon, o.epsilon.clone());
        set(&mut c.window.size, o.window);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(m.dim == 1 || m.dim == 2) {
            bail!("model.dim must be 1 or 2, got {}", m.dim);
        }
        if m.alpha.is_empty() || m.beta.is_empty() || m.epsilon.is_empty() {
            bail!("model.alpha, model.beta and model.epsilon must be nonempty lists");
        }
        if let Some(a) = m.alpha.iter().find(|&&a| !(a > m.dim as f64)) {
            bail!("model.alpha = {a} must exceed the dimension {}", m.dim);
        }
        if m.beta.iter().chain(&m.epsilon).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            bail!("model.beta and model.epsilon must be finite and nonnegative");
        }
        if !(m.m0 >= 1.0 && m.delta > 0.0 && m.delta < 1.0 && m.c1 >= 10.0) {
            bail!("need m0 >= 1, 0 < delta < 1 and c1 >= 10");
        }
        if m.r <= 4 || !(m.m > 0.0) {
            bail!("need r > 4 and m > 0");
        }
        if self.window.size == 0 || self.window.cutoff < 1 {
            bail!("window.size and window.cutoff must be positive");
        }
        if self.run.seeds == 0 || self.run.samples == 0 {
            bail!("run.seeds and run.samples must be positive");
        }
        match self.command {
            Command::Verify1d if self.window.size > 16 => bail!("verify-1d enumerates 2^size configurations; window.size must be at most 16"),
            Command::DeltaTail if self.window.size > lrfim::disorder::TAIL_LIMIT => {
                bail!("delta-tail needs window.size <= {}", lrfim::disorder::TAIL_LIMIT)
            }
            Command::DeltaTail if self.tail.sym_diff.iter().any(|&d| d == 0 || d > self.window.size) => {
                bail!("tail.sym_diff entries must lie in 1..=window.size")
            }
            Command::Simulate if self.run.sweeps < 40 => bail!("simulate needs at least 40 sweeps"),
            Command::EnumerateContours if self.run.max_size > lrfim::contour2d::CONTOUR_SIZE_LIMIT => {
                bail!("run.max_size must be at most {}", lrfim::contour2d::CONTOUR_SIZE_LIMIT)
            }
            _ => Ok(()),
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}
