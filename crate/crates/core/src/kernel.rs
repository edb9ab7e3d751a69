//! Lattice geometry, the coupling `J_xy = |x - y|^{-alpha}`, spin
//! configurations on finite windows and the local Hamiltonian.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeSite {
    D1(i64),
    D2(i64, i64),
}

impl LatticeSite {
    pub fn dim(&self) -> usize {
        match self {
            LatticeSite::D1(_) => 1,
            LatticeSite::D2(..) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingKernel {
    pub alpha: f64,
    pub dim: usize,
}

impl CouplingKernel {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParams(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(alpha > dim as f64) || !alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "alpha = {alpha} must exceed the dimension {dim}"
            )));
        }
        Ok(Self { alpha, dim })
    }

    pub fn j1(&self, d: i64) -> f64 {
        if d == 0 {
            0.0
        } else {
            (d.unsigned_abs() as f64).powf(-self.alpha)
        }
    }

    pub fn j2(&self, dx: i64, dy: i64) -> f64 {
        if dx == 0 && dy == 0 {
            0.0
        } else {
            let r2 = (dx * dx + dy * dy) as f64;
            r2.powf(-0.5 * self.alpha)
        }
    }

    /// `S(R) = sum over 0 < |v| <= R of |v|^{-alpha}` in the kernel's dimension.
    pub fn ball_sum(&self, cutoff: i64) -> f64 {
        if cutoff <= 0 {
            return 0.0;
        }
        match self.dim {
            1 => 2.0 * (1..=cutoff).rev().map(|k| self.j1(k)).sum::<f64>(),
            _ => {
                let r2 = cutoff * cutoff;
                let mut s = 0.0;
                for dx in -cutoff..=cutoff {
                    for dy in -cutoff..=cutoff {
                        if dx * dx + dy * dy <= r2 {
                            s += self.j2(dx, dy);
                        }
                    }
                }
                s
            }
        }
    }
}

pub fn coupling(x: LatticeSite, y: LatticeSite, k: &CouplingKernel) -> Result<f64> {
    match (x, y) {
        (LatticeSite::D1(a), LatticeSite::D1(b)) => Ok(k.j1(a - b)),
        (LatticeSite::D2(a0, a1), LatticeSite::D2(b0, b1)) => Ok(k.j2(a0 - b0, a1 - b1)),
        _ => Err(Error::DimensionMismatch(x.dim(), y.dim())),
    }
}

/// `J(A, B) = sum_{x in A, y in B} J_xy`.
pub fn interaction_sum(a: &[LatticeSite], b: &[LatticeSite], k: &CouplingKernel) -> Result<f64> {
    let mut s = 0.0;
    for &x in a {
        for &y in b {
            s += coupling(x, y, k)?;
        }
    }
    Ok(s)
}

pub fn interaction_1d(a: &[i64], b: &[i64], k: &CouplingKernel) -> f64 {
    a.iter().map(|&x| b.iter().map(|&y| k.j1(x - y)).sum::<f64>()).sum()
}

pub fn interaction_2d(a: &[(i64, i64)], b: &[(i64, i64)], k: &CouplingKernel) -> f64 {
    a.iter()
        .map(|&(x0, x1)| b.iter().map(|&(y0, y1)| k.j2(x0 - y0, x1 - y1)).sum::<f64>())
        .sum()
}

/// Kernel truncated at radius `cutoff`, with a displacement lookup table.
///
/// `J(A)` is `J(A, A^c)` where `A^c` only contains sites within `cutoff` of `A`:
/// `J(A) = |A| S(R) - sum over ordered pairs x != y in A with |x - y| <= R`.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    pub kernel: CouplingKernel,
    pub cutoff: i64,
    pub ball: f64,
    table: Vec<f64>,
}

impl TruncatedKernel {
    pub fn new(kernel: CouplingKernel, cutoff: i64) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidParams(format!("cutoff {cutoff} must be positive")));
        }
        let ball = kernel.ball_sum(cutoff);
        let side = (cutoff + 1) as usize;
        let table = match kernel.dim {
            1 => (0..=cutoff).map(|d| kernel.j1(d)).collect(),
            _ => {
                let mut t = vec![0.0; side * side];
                for dx in 0..=cutoff {
                    for dy in 0..=cutoff {
                        if dx * dx + dy * dy <= cutoff * cutoff {
                            t[dx as usize * side + dy as usize] = kernel.j2(dx, dy);
                        }
                    }
                }
                t
            }
        };
        Ok(Self { kernel, cutoff, ball, table })
    }

    /// Truncated coupling in 1D: zero beyond the cutoff.
    #[inline]
    pub fn t1(&self, d: i64) -> f64 {
        let d = d.abs();
        if d > self.cutoff {
            0.0
        } else {
            self.table[d as usize]
        }
    }

    /// Truncated coupling in 2D: zero beyond the cutoff.
    #[inline]
    pub fn t2(&self, dx: i64, dy: i64) -> f64 {
        let (dx, dy) = (dx.abs(), dy.abs());
        if dx > self.cutoff || dy > self.cutoff {
            0.0
        } else {
            self.table[dx as usize * (self.cutoff + 1) as usize + dy as usize]
        }
    }

    pub fn boundary_1d(&self, a: &[i64]) -> f64 {
        let mut inner = 0.0;
        for (i, &x) in a.iter().enumerate() {
            for &y in &a[i + 1..] {
                inner += self.t1(x - y);
            }
        }
        a.len() as f64 * self.ball - 2.0 * inner
    }

    pub fn boundary_2d(&self, a: &[(i64, i64)]) -> f64 {
        let mut inner = 0.0;
        for (i, &(x0, x1)) in a.iter().enumerate() {
            for &(y0, y1) in &a[i + 1..] {
                inner += self.t2(x0 - y0, x1 - y1);
            }
        }
        a.len() as f64 * self.ball - 2.0 * inner
    }

    pub fn cross_1d(&self, a: &[i64], b: &[i64]) -> f64 {
        a.iter().map(|&x| b.iter().map(|&y| self.t1(x - y)).sum::<f64>()).sum()
    }

    pub fn cross_2d(&self, a: &[(i64, i64)], b: &[(i64, i64)]) -> f64 {
        a.iter()
            .map(|&(x0, x1)| b.iter().map(|&(y0, y1)| self.t2(x0 - y0, x1 - y1)).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Interval { lo: i64, len: usize },
    Box { lo: (i64, i64), w: usize, h: usize },
}

impl Window {
    pub fn size(&self) -> usize {
        match *self {
            Window::Interval { len, .. } => len,
            Window::Box { w, h, .. } => w * h,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Interval { .. } => 1,
            Window::Box { .. } => 2,
        }
    }

    /// Smallest integer radius reaching every pair of window sites.
    pub fn diameter(&self) -> i64 {
        match *self {
            Window::Interval { len, .. } => len as i64 - 1,
            Window::Box { w, h, .. } => {
                let d2 = ((w - 1) * (w - 1) + (h - 1) * (h - 1)) as f64;
                d2.sqrt().ceil() as i64
            }
        }
    }

    pub fn index(&self, s: LatticeSite) -> Option<usize> {
        match (*self, s) {
            (Window::Interval { lo, len }, LatticeSite::D1(x)) => {
                let i = x - lo;
                (i >= 0 && (i as usize) < len).then_some(i as usize)
            }
            (Window::Box { lo, w, h }, LatticeSite::D2(x, y)) => {
                let (i, j) = (x - lo.0, y - lo.1);
                (i >= 0 && j >= 0 && (i as usize) < w && (j as usize) < h)
                    .then(|| j as usize * w + i as usize)
            }
            _ => None,
        }
    }

    pub fn site(&self, idx: usize) -> LatticeSite {
        match *self {
            Window::Interval { lo, .. } => LatticeSite::D1(lo + idx as i64),
            Window::Box { lo, w, .. } => {
                LatticeSite::D2(lo.0 + (idx % w) as i64, lo.1 + (idx / w) as i64)
            }
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = LatticeSite> + '_ {
        (0..self.size()).map(move |i| self.site(i))
    }

    pub fn contains(&self, s: LatticeSite) -> bool {
        self.index(s).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    pub window: Window,
    pub spins: Vec<i8>,
    pub outside: i8,
}

impl SpinConfiguration {
    pub fn uniform(window: Window, value: i8, outside: i8) -> Self {
        Self { window, spins: vec![value; window.size()], outside }
    }

    pub fn from_spins(window: Window, spins: Vec<i8>, outside: i8) -> Result<Self> {
        if spins.len() != window.size() {
            return Err(Error::InvalidParams(format!(
                "{} spins for a window of {} sites",
                spins.len(),
                window.size()
            )));
        }
        if spins.iter().chain(std::iter::once(&outside)).any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParams("spins must be +1 or -1".into()));
        }
        Ok(Self { window, spins, outside })
    }

    /// 1D configuration on `[lo, lo + spins.len())`.
    pub fn line(lo: i64, spins: Vec<i8>, outside: i8) -> Result<Self> {
        Self::from_spins(Window::Interval { lo, len: spins.len() }, spins, outside)
    }

    pub fn get(&self, s: LatticeSite) -> i8 {
        self.window.index(s).map_or(self.outside, |i| self.spins[i])
    }

    pub fn set(&mut self, s: LatticeSite, v: i8) -> Result<()> {
        let i = self.window.index(s).ok_or_else(|| {
            Error::Precondition(format!("site {s:?} outside the window"))
        })?;
        self.spins[i] = v;
        Ok(())
    }
}

/// `tau_A(sigma)`: negate the spins of `A`.
pub fn flip_set(sigma: &SpinConfiguration, a: &[LatticeSite]) -> Result<SpinConfiguration> {
    let mut out = sigma.clone();
    for &s in a {
        let i = sigma.window.index(s).ok_or_else(|| {
            Error::Precondition(format!("site {s:?} of the flipped set lies outside the window"))
        })?;
        out.spins[i] = -out.spins[i];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCounting {
    /// Each unordered pair of window sites contributes `J_xy` once.
    #[default]
    Unordered,
    /// Ordered double sum: each unordered pair contributes `2 J_xy`.
    Ordered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianParams {
    pub beta: f64,
    pub epsilon: f64,
    pub field: Option<Vec<f64>>,
    pub boundary_cutoff: i64,
    pub pair_counting: PairCounting,
}

impl HamiltonianParams {
    pub fn new(beta: f64, epsilon: f64, boundary_cutoff: i64) -> Self {
        Self {
            beta,
            epsilon,
            field: None,
            boundary_cutoff,
            pair_counting: PairCounting::Unordered,
        }
    }
}

/// Precomputed couplings for a fixed window: displacement table plus the
/// truncated boundary fields `b_x = sum_{y not in window, |y - x| <= R} J_xy`.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub window: Window,
    pub kernel: CouplingKernel,
    pub cutoff: i64,
    pub pair_counting: PairCounting,
    jtab: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl EnergyModel {
    pub fn new(
        window: Window,
        kernel: CouplingKernel,
        cutoff: i64,
        pair_counting: PairCounting,
    ) -> Result<Self> {
        if window.dim() != kernel.dim {
            return Err(Error::DimensionMismatch(window.dim(), kernel.dim));
        }
        let diameter = window.diameter();
        if cutoff < 1 || cutoff < diameter {
            return Err(Error::CutoffTooSmall { cutoff, diameter });
        }
        let ball = kernel.ball_sum(cutoff);
        Self::with_ball(window, kernel, cutoff, ball, pair_counting)
    }

    /// As [`EnergyModel::new`] with a precomputed `S(R)`.
    pub fn with_ball(
        window: Window,
        kernel: CouplingKernel,
        cutoff: i64,
        ball: f64,
        pair_counting: PairCounting,
    ) -> Result<Self> {
        let diameter = window.diameter();
        if cutoff < 1 || cutoff < diameter {
            return Err(Error::CutoffTooSmall { cutoff, diameter });
        }
        let jtab = match window {
            Window::Interval { len, .. } => (0..len as i64).map(|d| kernel.j1(d)).collect(),
            Window::Box { w, h, .. } => {
                let mut t = vec![0.0; w * h];
                for dy in 0..h {
                    for dx in 0..w {
                        t[dy * w + dx] = kernel.j2(dx as i64, dy as i64);
                    }
                }
                t
            }
        };
        let mut m = Self { window, kernel, cutoff, pair_counting, jtab, boundary: Vec::new() };
        let n = window.size();
        m.boundary = (0..n)
            .map(|i| {
                let inside: f64 = (0..n).rev().map(|j| m.j(i, j)).sum();
                ball - inside
            })
            .collect();
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.window.size()
    }

    /// Coupling between window indices `i` and `j`.
    #[inline]
    pub fn j(&self, i: usize, j: usize) -> f64 {
        match self.window {
            Window::Interval { .. } => self.jtab[i.abs_diff(j)],
            Window::Box { w, .. } => {
                let dx = (i % w).abs_diff(j % w);
                let dy = (i / w).abs_diff(j / w);
                self.jtab[dy * w + dx]
            }
        }
    }

    fn pair_factor(&self) -> f64 {
        match self.pair_counting {
            PairCounting::Unordered => 1.0,
            PairCounting::Ordered => 2.0,
        }
    }

    /// `H = -c sum_{x<y} J sigma sigma - sum_x b_x sigma_x eta - eps sum_x h_x sigma_x`
    /// with `c = 1` (unordered) or `c = 2` (ordered).
    pub fn energy(&self, spins: &[i8], outside: i8, epsilon: f64, field: Option<&[f64]>) -> f64 {
        let n = spins.len();
        let mut pair = 0.0;
        for i in 0..n {
            let si = spins[i] as f64;
            let mut acc = 0.0;
            for j in i + 1..n {
                acc += self.j(i, j) * spins[j] as f64;
            }
            pair += si * acc;
        }
        let eta = outside as f64;
        let bnd: f64 = (0..n).map(|i| self.boundary[i] * spins[i] as f64 * eta).sum();
        let fld = match field {
            Some(h) if epsilon != 0.0 => {
                epsilon * (0..n).map(|i| h[i] * spins[i] as f64).sum::<f64>()
            }
            _ => 0.0,
        };
        -self.pair_factor() * pair - bnd - fld
    }

    /// `sum_{y in window} J_xy sigma_y + b_x eta` for window index `i`.
    pub fn coupling_field(&self, spins: &[i8], outside: i8, i: usize) -> f64 {
        let inner: f64 = (0..spins.len()).map(|j| self.j(i, j) * spins[j] as f64).sum();
        inner + self.boundary[i] * outside as f64
    }
}

/// Local Hamiltonian of `sigma` with the window as the finite volume.
pub fn hamiltonian(sigma: &SpinConfiguration, p: &HamiltonianParams, k: &CouplingKernel) -> Result<f64> {
    if let Some(h) = &p.field {
        if h.len() != sigma.spins.len() {
            return Err(Error::InvalidParams(format!(
                "field has {} values for {} sites",
                h.len(),
                sigma.spins.len()
            )));
        }
    }
    let m = EnergyModel::new(sigma.window, *k, p.boundary_cutoff, p.pair_counting)?;
    Ok(m.energy(&sigma.spins, sigma.outside, p.epsilon, p.field.as_deref()))
}
