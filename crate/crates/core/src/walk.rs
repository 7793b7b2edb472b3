//! Step distributions, seeded walk samplers, correlated Brownian surrogates,
//! and the gamma/correlation dictionary.
//!
//! All samplers are pure functions of `(distribution, window, seed)`. Walk
//! increments and Brownian unit cells each draw from their own RNG substream
//! keyed by the integer index, so enlarging a window with the same seed
//! extends the smaller sample rather than resampling it. Nested-window
//! experiments rely on this.

use crate::rng::StreamRng;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Inclusive integer interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        Window { lo, hi }
    }

    /// Symmetric window `[-n, n]`.
    pub fn symmetric(n: i64) -> Self {
        Window::new(-n, n)
    }

    /// Number of indices; windows are nonempty by construction.
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn contains_window(&self, other: Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

pub type Step = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    MullinSimple,
    Kreweras,
    BipolarUniform,
    BipolarTriangulation,
    GesselOptional,
    CustomTable,
}

/// Analytic first and second moments of a step law.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Moments {
    pub mean: (f64, f64),
    pub var: (f64, f64),
    pub cov: f64,
}

impl Moments {
    pub fn correlation(&self) -> f64 {
        self.cov / (self.var.0 * self.var.1).sqrt()
    }

    pub fn sd(&self) -> (f64, f64) {
        (self.var.0.sqrt(), self.var.1.sqrt())
    }
}

/// A step law on the allowed step set, with an exact sampler and analytic
/// moment summaries. Built-in laws have closed-form probability mass; only
/// `CustomTable` stores an explicit table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepDistribution {
    pub model: Model,
    table: Option<Vec<(Step, f64)>>,
    moments: Moments,
    /// Exponent of the exponential tail bound on |step|.
    pub tail_rate: f64,
}

const MULLIN_STEPS: [Step; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const KREWERAS_STEPS: [Step; 3] = [(1, 0), (0, 1), (-1, -1)];
const GESSEL_STEPS: [Step; 4] = [(-1, 0), (1, 0), (1, 1), (-1, -1)];

/// Build one of the enumerated step laws. `params` is only consulted for
/// `CustomTable`, where it must list `(step, probability)` pairs.
pub fn make_distribution(model: Model, params: Option<Vec<(Step, f64)>>) -> Result<StepDistribution> {
    match model {
        Model::MullinSimple => Ok(StepDistribution {
            model,
            table: None,
            moments: Moments { mean: (0.0, 0.0), var: (0.5, 0.5), cov: 0.0 },
            tail_rate: 1.0,
        }),
        Model::Kreweras => Ok(StepDistribution {
            model,
            table: None,
            // Direct summation over the 3 steps: Var = 2/3, Cov = 1/3.
            moments: Moments { mean: (0.0, 0.0), var: (2.0 / 3.0, 2.0 / 3.0), cov: 1.0 / 3.0 },
            tail_rate: 1.0,
        }),
        Model::BipolarUniform => Ok(StepDistribution {
            model,
            table: None,
            // nu(i,-j) = 2^(-i-j-3) for i,j >= 0, nu(-1,1) = 1/2. Geometric
            // series give E[i] = 1, E[i^2] = 3 per coordinate of the face part.
            moments: Moments { mean: (0.0, 0.0), var: (2.0, 2.0), cov: -1.0 },
            tail_rate: (2.0f64).ln() / 2.0,
        }),
        Model::BipolarTriangulation => Ok(StepDistribution {
            model,
            table: None,
            // nu(-1,1) = 1/2, nu(1,-j) = 2^(-j-2): Var(dL) = 1, Var(dR) = 2, Cov = -1.
            moments: Moments { mean: (0.0, 0.0), var: (1.0, 2.0), cov: -1.0 },
            tail_rate: (2.0f64).ln() / 2.0,
        }),
        Model::GesselOptional => Ok(StepDistribution {
            model,
            table: None,
            moments: Moments { mean: (0.0, 0.0), var: (1.0, 0.5), cov: 0.5 },
            tail_rate: 1.0,
        }),
        Model::CustomTable => {
            let table = params.ok_or_else(|| Error::distribution("CustomTable requires a table"))?;
            validate_custom(&table)?;
            let moments = table_moments(&table);
            if moments.mean.0.abs() > 1e-12 || moments.mean.1.abs() > 1e-12 {
                return Err(Error::distribution("CustomTable mean step is not (0,0)"));
            }
            let rho = moments.correlation();
            if !(-1.0 < rho && rho < 1.0) || !rho.is_finite() {
                return Err(Error::distribution("CustomTable correlation outside (-1,1)"));
            }
            Ok(StepDistribution { model, table: Some(table), moments, tail_rate: 1.0 })
        }
    }
}

fn validate_custom(table: &[(Step, f64)]) -> Result<()> {
    let mut total = 0.0;
    for &((dl, dr), p) in table {
        if p < 0.0 {
            return Err(Error::distribution("negative probability"));
        }
        total += p;
        let in_step_set = (dl, dr) == (-1, 1) || (dl >= 0 && dr <= 0);
        if !in_step_set {
            return Err(Error::distribution(format!(
                "step ({dl},{dr}) outside the allowed set {{(-1,1)}} u {{(i,-j): i,j >= 0}}"
            )));
        }
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::distribution(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

fn table_moments(table: &[(Step, f64)]) -> Moments {
    let (mut ml, mut mr, mut sll, mut srr, mut slr) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &((dl, dr), p) in table {
        let (l, r) = (dl as f64, dr as f64);
        ml += p * l;
        mr += p * r;
        sll += p * l * l;
        srr += p * r * r;
        slr += p * l * r;
    }
    Moments { mean: (ml, mr), var: (sll - ml * ml, srr - mr * mr), cov: slr - ml * mr }
}

impl StepDistribution {
    pub fn moments(&self) -> Moments {
        self.moments
    }

    pub fn correlation(&self) -> f64 {
        self.moments.correlation()
    }

    /// Probability mass of a single step (closed form; zero off-support).
    pub fn pmf(&self, step: Step) -> f64 {
        let (i, j) = step;
        match self.model {
            Model::MullinSimple => {
                if MULLIN_STEPS.contains(&step) {
                    0.25
                } else {
                    0.0
                }
            }
            Model::Kreweras => {
                if KREWERAS_STEPS.contains(&step) {
                    1.0 / 3.0
                } else {
                    0.0
                }
            }
            Model::BipolarUniform => {
                if step == (-1, 1) {
                    0.5
                } else if i >= 0 && j <= 0 {
                    (2.0f64).powi(-(i as i32) - (-j as i32) - 3)
                } else {
                    0.0
                }
            }
            Model::BipolarTriangulation => {
                if step == (-1, 1) {
                    0.5
                } else if i == 1 && j <= 0 {
                    (2.0f64).powi(-(-j as i32) - 2)
                } else {
                    0.0
                }
            }
            Model::GesselOptional => {
                if GESSEL_STEPS.contains(&step) {
                    0.25
                } else {
                    0.0
                }
            }
            Model::CustomTable => self
                .table
                .as_ref()
                .unwrap()
                .iter()
                .find(|(s, _)| *s == step)
                .map(|&(_, p)| p)
                .unwrap_or(0.0),
        }
    }

    /// Draw one step. Infinite supports factor into a coin and geometric
    /// variables, sampled exactly; nothing is truncated.
    pub fn sample_step(&self, rng: &mut StreamRng) -> Step {
        match self.model {
            Model::MullinSimple => MULLIN_STEPS[rng.below(4) as usize],
            Model::Kreweras => KREWERAS_STEPS[rng.below(3) as usize],
            Model::BipolarUniform => {
                if rng.coin() {
                    (-1, 1)
                } else {
                    (rng.geometric_half() as i64, -(rng.geometric_half() as i64))
                }
            }
            Model::BipolarTriangulation => {
                if rng.coin() {
                    (-1, 1)
                } else {
                    (1, -(rng.geometric_half() as i64))
                }
            }
            Model::GesselOptional => GESSEL_STEPS[rng.below(4) as usize],
            Model::CustomTable => {
                let u = rng.f64();
                let table = self.table.as_ref().unwrap();
                let mut acc = 0.0;
                for &(s, p) in table {
                    acc += p;
                    if u < acc {
                        return s;
                    }
                }
                table.last().unwrap().0
            }
        }
    }

    /// Whether every support element is a legal increment for the given model
    /// family (used by sewing preconditions).
    pub fn support_steps(&self) -> Option<Vec<Step>> {
        match self.model {
            Model::MullinSimple => Some(MULLIN_STEPS.to_vec()),
            Model::Kreweras => Some(KREWERAS_STEPS.to_vec()),
            Model::GesselOptional => Some(GESSEL_STEPS.to_vec()),
            Model::CustomTable => Some(self.table.as_ref().unwrap().iter().map(|&(s, _)| s).collect()),
            _ => None,
        }
    }
}

/// Solve `rho = -cos(pi gamma^2 / 4)` for `gamma` in (0, 2).
pub fn gamma_from_correlation(rho: f64) -> Result<f64> {
    if !(-1.0 < rho && rho < 1.0) {
        return Err(Error::domain(format!("correlation {rho} outside (-1, 1)")));
    }
    Ok((4.0 * (-rho).acos() / std::f64::consts::PI).sqrt())
}

/// Inverse of [`gamma_from_correlation`].
pub fn correlation_from_gamma(gamma: f64) -> Result<f64> {
    if !(0.0 < gamma && gamma < 2.0) {
        return Err(Error::domain(format!("gamma {gamma} outside (0, 2)")));
    }
    Ok(-(std::f64::consts::PI * gamma * gamma / 4.0).cos())
}

/// A two-coordinate integer lattice path on a window of indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WalkPath {
    pub window: Window,
    /// Value at each index, `values[0]` at `window.lo`.
    pub values: Vec<(i64, i64)>,
    /// Per-coordinate step standard deviations and step correlation of the
    /// generating law; used to normalize before comparing with Brownian paths.
    pub sigma: (f64, f64),
    pub rho: f64,
}

impl WalkPath {
    /// Wrap explicit values; normalization defaults to the identity.
    pub fn from_values(window: Window, values: Vec<(i64, i64)>) -> Self {
        assert_eq!(values.len(), window.len());
        WalkPath { window, values, sigma: (1.0, 1.0), rho: 0.0 }
    }

    pub fn value(&self, i: i64) -> (i64, i64) {
        debug_assert!(self.window.contains(i));
        self.values[(i - self.window.lo) as usize]
    }

    pub fn l(&self, i: i64) -> i64 {
        self.value(i).0
    }

    pub fn r(&self, i: i64) -> i64 {
        self.value(i).1
    }

    pub fn step(&self, i: i64) -> Step {
        let a = self.value(i - 1);
        let b = self.value(i);
        (b.0 - a.0, b.1 - a.1)
    }

    /// Indices that carry an increment, `lo+1 ..= hi`.
    pub fn step_indices(&self) -> impl Iterator<Item = i64> {
        (self.window.lo + 1)..=self.window.hi
    }

    /// Value at `i` rescaled to unit step variance per coordinate.
    pub fn normalized(&self, i: i64) -> (f64, f64) {
        let (l, r) = self.value(i);
        (l as f64 / self.sigma.0, r as f64 / self.sigma.1)
    }
}

/// Sample a two-sided walk on `window`, anchored at `Z_0 = (0, 0)` when the
/// window contains 0 (otherwise at the window end nearest 0). The increment at
/// index `i` comes from substream `i` of `seed`, so nested windows with the
/// same seed agree where they overlap.
pub fn sample_walk(dist: &StepDistribution, window: Window, seed: u64) -> WalkPath {
    let anchor = 0i64.clamp(window.lo, window.hi);
    let mut values = vec![(0i64, 0i64); window.len()];
    let mut acc = (0i64, 0i64);
    for i in (anchor + 1)..=window.hi {
        let s = dist.sample_step(&mut StreamRng::for_cell(seed, i));
        acc = (acc.0 + s.0, acc.1 + s.1);
        values[(i - window.lo) as usize] = acc;
    }
    acc = (0, 0);
    let mut i = anchor;
    while i > window.lo {
        let s = dist.sample_step(&mut StreamRng::for_cell(seed, i));
        acc = (acc.0 - s.0, acc.1 - s.1);
        values[(i - 1 - window.lo) as usize] = acc;
        i -= 1;
    }
    let m = dist.moments();
    WalkPath { window, values, sigma: m.sd(), rho: m.correlation() }
}

/// A correlated two-dimensional Brownian surrogate on a fine mesh, with
/// per-unit-cell minima.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrownianGrid {
    pub window: Window,
    /// Grid points per unit interval; a power of two so unit-cell boundaries
    /// are exact grid points.
    pub mesh: u32,
    pub rho: f64,
    /// `(window.len() - 1) * mesh + 1` points, index 0 at time `window.lo`.
    pub values: Vec<(f64, f64)>,
    /// Minimum of each coordinate over the unit cell `[j-1, j]`, for
    /// `j = lo+1 ..= hi` (grid minima, endpoints included).
    pub cell_min: Vec<(f64, f64)>,
}

impl BrownianGrid {
    fn grid_index(&self, t_num: i64) -> usize {
        // t_num counts mesh steps from window.lo.
        t_num as usize
    }

    /// Value at integer time `j`.
    pub fn at_integer(&self, j: i64) -> (f64, f64) {
        debug_assert!(self.window.contains(j));
        self.values[self.grid_index((j - self.window.lo) * self.mesh as i64)]
    }

    /// Cell minimum of the L (resp. R) coordinate over `[j-1, j]`.
    pub fn cell_minimum(&self, j: i64) -> (f64, f64) {
        debug_assert!(j > self.window.lo && j <= self.window.hi);
        self.cell_min[(j - 1 - self.window.lo) as usize]
    }

    /// Oscillation `max - min` of each coordinate over the cell `[j-1, j]`.
    pub fn cell_oscillation(&self, j: i64) -> (f64, f64) {
        let lo = ((j - 1 - self.window.lo) * self.mesh as i64) as usize;
        let hi = ((j - self.window.lo) * self.mesh as i64) as usize;
        let mut min = (f64::INFINITY, f64::INFINITY);
        let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(l, r) in &self.values[lo..=hi] {
            min.0 = min.0.min(l);
            min.1 = min.1.min(r);
            max.0 = max.0.max(l);
            max.1 = max.1.max(r);
        }
        (max.0 - min.0, max.1 - min.1)
    }

    fn compute_cell_minima(window: Window, mesh: u32, values: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(window.len() - 1);
        for c in 0..(window.len() - 1) {
            let lo = c * mesh as usize;
            let hi = lo + mesh as usize;
            let mut m = (f64::INFINITY, f64::INFINITY);
            for &(l, r) in &values[lo..=hi] {
                m.0 = m.0.min(l);
                m.1 = m.1.min(r);
            }
            out.push(m);
        }
        out
    }
}

/// Sample a two-sided correlated Brownian grid: increments are centered
/// Gaussian pairs with covariance `(1/mesh) [[1, rho], [rho, 1]]`, anchored at
/// `Z_0 = 0` (or the window end nearest 0). Each unit cell draws from its own
/// substream.
pub fn sample_brownian(rho: f64, window: Window, mesh: u32, seed: u64) -> Result<BrownianGrid> {
    if mesh < 2 || !mesh.is_power_of_two() {
        return Err(Error::domain(format!("mesh {mesh} must be a power of two >= 2")));
    }
    if !(-1.0 < rho && rho < 1.0) {
        return Err(Error::domain(format!("correlation {rho} outside (-1, 1)")));
    }
    let cells = window.len() - 1;
    let n_pts = cells * mesh as usize + 1;
    let scale = 1.0 / (mesh as f64).sqrt();
    // Increment k of cell j (the cell [j-1, j]) lives at substream j.
    let mut incs = vec![(0.0, 0.0); cells * mesh as usize];
    for c in 0..cells {
        let j = window.lo + c as i64 + 1;
        let mut rng = StreamRng::for_cell(seed, j);
        for k in 0..mesh as usize {
            let (a, b) = rng.normal_pair(rho);
            incs[c * mesh as usize + k] = (a * scale, b * scale);
        }
    }
    let anchor = 0i64.clamp(window.lo, window.hi);
    let anchor_pt = ((anchor - window.lo) * mesh as i64) as usize;
    let mut values = vec![(0.0, 0.0); n_pts];
    let mut acc = (0.0, 0.0);
    for p in (anchor_pt + 1)..n_pts {
        let inc = incs[p - 1];
        acc = (acc.0 + inc.0, acc.1 + inc.1);
        values[p] = acc;
    }
    acc = (0.0, 0.0);
    for p in (0..anchor_pt).rev() {
        let inc = incs[p];
        acc = (acc.0 - inc.0, acc.1 - inc.1);
        values[p] = acc;
    }
    let cell_min = BrownianGrid::compute_cell_minima(window, mesh, &values);
    Ok(BrownianGrid { window, mesh, rho, values, cell_min })
}

/// Couple a grid path to `walk`: the grid equals the variance-normalized walk
/// at integer indices exactly, and interpolates with independent correlated
/// Brownian bridges of the target covariance inside each unit cell. The sup
/// discrepancy at integers is 0 by construction.
pub fn bridge_couple(walk: &WalkPath, mesh: u32, seed: u64) -> Result<BrownianGrid> {
    if mesh < 2 || !mesh.is_power_of_two() {
        return Err(Error::domain(format!("mesh {mesh} must be a power of two >= 2")));
    }
    let window = walk.window;
    let rho = walk.rho;
    let m = mesh as usize;
    let cells = window.len() - 1;
    let mut values = vec![(0.0, 0.0); cells * m + 1];
    values[0] = walk.normalized(window.lo);
    let mut free = vec![(0.0, 0.0); m];
    for c in 0..cells {
        let j = window.lo + c as i64 + 1;
        let a = walk.normalized(j - 1);
        let b = walk.normalized(j);
        let mut rng = StreamRng::for_cell(seed, j);
        let scale = 1.0 / (mesh as f64).sqrt();
        let mut acc = (0.0, 0.0);
        for item in free.iter_mut() {
            let (x, y) = rng.normal_pair(rho);
            acc = (acc.0 + x * scale, acc.1 + y * scale);
            *item = acc;
        }
        let total = free[m - 1];
        for k in 1..m {
            let f = k as f64 / m as f64;
            values[c * m + k] = (
                a.0 + free[k - 1].0 - f * total.0 + f * (b.0 - a.0),
                a.1 + free[k - 1].1 - f * total.1 + f * (b.1 - a.1),
            );
        }
        values[(c + 1) * m] = b;
    }
    let cell_min = BrownianGrid::compute_cell_minima(window, mesh, &values);
    Ok(BrownianGrid { window, mesh, rho, values, cell_min })
}

/// Max over integer indices of the Euclidean distance between the normalized
/// walk and the grid.
pub fn sup_discrepancy(walk: &WalkPath, grid: &BrownianGrid) -> Result<f64> {
    if walk.window != grid.window {
        return Err(Error::WindowMismatch);
    }
    let mut d = 0.0f64;
    for j in walk.window.iter() {
        let w = walk.normalized(j);
        let g = grid.at_integer(j);
        d = d.max(((w.0 - g.0).powi(2) + (w.1 - g.1).powi(2)).sqrt());
    }
    Ok(d)
}
