//! Closed-form distance-exponent formulas and Monte Carlo exponent
//! estimation pipelines comparing measured growth against them.

use crate::bipolar::{sew_bipolar, BipolarState};
use crate::coupling::{bfs_distances, diameter, UNREACHED};
use crate::kreweras::{kreweras_window_graph, sew_kreweras};
use crate::mullin::{mullin_window_graph, sew_mullin};
use crate::stats::{fit_log_log_median, SlopeFit};
use crate::structure::build_mated_crt;
use crate::walk::{
    gamma_from_correlation, make_distribution, sample_brownian, sample_walk, Model, Window,
};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// The growth exponent predicted for gamma-LQG:
/// `d = 1 + g^2/4 + sqrt((4+g^2)^2 + 16 g^2)/4`.
pub fn watabiki(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::domain(format!("gamma {gamma} outside (0, 2]")));
    }
    let g2 = gamma * gamma;
    Ok(1.0 + g2 / 4.0 + ((4.0 + g2).powi(2) + 16.0 * g2).sqrt() / 4.0)
}

/// Lower and upper bounds for the ball-volume exponent:
/// `d- = 2 g^2 / (4 + g^2 - sqrt(16 + g^4))`, `d+ = 2 + g^2/2 + sqrt(2) g`.
pub fn ball_exponent_bounds(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::domain(format!("gamma {gamma} outside (0, 2]")));
    }
    let g2 = gamma * gamma;
    let d_minus = 2.0 * g2 / (4.0 + g2 - (16.0 + g2 * g2).sqrt());
    let d_plus = 2.0 + g2 / 2.0 + (2.0f64).sqrt() * gamma;
    Ok((d_minus, d_plus))
}

/// Bounds for the diameter exponent: `max(1/d+, 1 - 2/g^2) <= chi <= 1/2`.
pub fn chi_bounds(gamma: f64) -> Result<(f64, f64)> {
    let (_, d_plus) = ball_exponent_bounds(gamma)?;
    let lower = (1.0 / d_plus).max(1.0 - 2.0 / (gamma * gamma));
    Ok((lower, 0.5))
}

/// Per-gamma table row of the closed-form exponents.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentRow {
    pub gamma: f64,
    pub watabiki: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub chi_lower: f64,
    pub chi_upper: f64,
}

pub fn exponent_table(gammas: &[f64]) -> Result<Vec<ExponentRow>> {
    gammas
        .iter()
        .map(|&g| {
            let (d_minus, d_plus) = ball_exponent_bounds(g)?;
            let (chi_lower, chi_upper) = chi_bounds(g)?;
            Ok(ExponentRow { gamma: g, watabiki: watabiki(g)?, d_minus, d_plus, chi_lower, chi_upper })
        })
        .collect()
}

/// Models the estimation pipelines can run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ExpModel {
    /// Spanning-tree decorated map windows (gamma = sqrt 2).
    Mullin,
    /// Site-percolated triangulation windows (gamma = sqrt(8/3)).
    Uipt,
    /// Bipolar-oriented map windows, uniform face law (gamma = sqrt(4/3)).
    Bipolar,
    /// Bipolar windows with the triangulation-type step law (gamma = 1).
    BipolarTri,
    /// Schnyder-wood windows: the BipolarTri map plus the green edges.
    Schnyder,
    /// Discretized mated-CRT graph at a given correlation.
    MatedCrt { rho: f64, mesh: u32 },
    /// Square-lattice control (exponent 2).
    Lattice,
    /// Path-graph control (exponent 1).
    PathGraph,
}

impl ExpModel {
    /// The gamma whose bounds the measured slope is compared against.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            ExpModel::Mullin => Some((2.0f64).sqrt()),
            ExpModel::Uipt => Some((8.0f64 / 3.0).sqrt()),
            ExpModel::Bipolar => Some((4.0f64 / 3.0).sqrt()),
            ExpModel::BipolarTri | ExpModel::Schnyder => Some(1.0),
            ExpModel::MatedCrt { rho, .. } => gamma_from_correlation(*rho).ok(),
            _ => None,
        }
    }
}

/// A rooted test graph with the vertex set flagged as boundary when a ball
/// touching it must be discarded.
struct Instance {
    adj: Vec<Vec<u32>>,
    root: u32,
    boundary: Vec<u32>,
}

fn external_vertices(map: &crate::pmap::PlanarMap) -> Vec<u32> {
    let ext = match map.external_face {
        Some(f) => f,
        None => return Vec::new(),
    };
    let mut out: Vec<u32> =
        map.halves().filter(|&h| map.face(h) == ext).map(|h| map.origin(h)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The Schnyder window graph: the bipolar window graph plus one green edge
/// per bounded face from each non-pole west vertex to the east middle vertex.
fn schnyder_window_graph(state: &BipolarState) -> (Vec<Vec<u32>>, u32) {
    let (mut adj, root) = crate::bipolar::bipolar_window_graph(state);
    for rec in &state.faces {
        if rec.east_ups.len() != 2 {
            continue;
        }
        let map = &state.map;
        let south = map.origin(rec.east_ups[0]);
        let north = map.head(rec.east_ups[1]);
        let wf = map.head(rec.east_ups[0]);
        for &h in &rec.west_sides {
            let v = state.head_of_edge(h);
            if v != south && v != north && v != wf {
                adj[v as usize].push(wf);
                adj[wf as usize].push(v);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    (adj, root)
}

fn build_instance(model: ExpModel, n: i64, r_max: u32, seed: u64) -> Result<Instance> {
    match model {
        ExpModel::Mullin => {
            let d = make_distribution(Model::MullinSimple, None)?;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let state = sew_mullin(&w)?;
            let (adj, root) = mullin_window_graph(&state);
            Ok(Instance { adj, root, boundary: external_vertices(&state.map) })
        }
        ExpModel::Uipt => {
            let d = make_distribution(Model::Kreweras, None)?;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let state = sew_kreweras(&w)?;
            let (adj, root) = kreweras_window_graph(&state);
            Ok(Instance { adj, root, boundary: external_vertices(&state.map) })
        }
        ExpModel::Bipolar | ExpModel::BipolarTri | ExpModel::Schnyder => {
            let law = if model == ExpModel::Bipolar {
                Model::BipolarUniform
            } else {
                Model::BipolarTriangulation
            };
            let d = make_distribution(law, None)?;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let state = sew_bipolar(&w, &d)?;
            let (adj, root) = if model == ExpModel::Schnyder {
                schnyder_window_graph(&state)
            } else {
                crate::bipolar::bipolar_window_graph(&state)
            };
            Ok(Instance { adj, root, boundary: external_vertices(&state.map) })
        }
        ExpModel::MatedCrt { rho, mesh } => {
            let grid = sample_brownian(rho, Window::new(-n - 1, n), mesh, seed)?;
            let g = build_mated_crt(&grid, Window::symmetric(n))?;
            let adj = crate::coupling::adj_to_vec(&g);
            let root = (0 - g.window.lo) as u32;
            Ok(Instance { adj, root, boundary: vec![0, (g.window.len() - 1) as u32] })
        }
        ExpModel::Lattice => {
            let side = (2 * r_max + 5) as usize;
            let idx = |x: usize, y: usize| (y * side + x) as u32;
            let mut adj = vec![Vec::new(); side * side];
            for y in 0..side {
                for x in 0..side {
                    if x + 1 < side {
                        adj[idx(x, y) as usize].push(idx(x + 1, y));
                        adj[idx(x + 1, y) as usize].push(idx(x, y));
                    }
                    if y + 1 < side {
                        adj[idx(x, y) as usize].push(idx(x, y + 1));
                        adj[idx(x, y + 1) as usize].push(idx(x, y));
                    }
                }
            }
            let root = idx(side / 2, side / 2);
            let boundary = (0..side)
                .flat_map(|k| [idx(k, 0), idx(k, side - 1), idx(0, k), idx(side - 1, k)])
                .collect();
            Ok(Instance { adj, root, boundary })
        }
        ExpModel::PathGraph => {
            let len = n.max(2 * r_max as i64 + 5) as usize;
            let adj: Vec<Vec<u32>> = (0..len)
                .map(|v| {
                    let mut nb = Vec::new();
                    if v > 0 {
                        nb.push(v as u32 - 1);
                    }
                    if v + 1 < len {
                        nb.push(v as u32 + 1);
                    }
                    nb
                })
                .collect();
            Ok(Instance { adj, root: (len / 2) as u32, boundary: vec![0, len as u32 - 1] })
        }
    }
}

/// Result of a ball-volume exponent estimation.
#[derive(Clone, Debug, Serialize)]
pub struct BallExponentFit {
    pub model: ExpModel,
    pub n: i64,
    pub radii: Vec<u32>,
    pub fit: SlopeFit,
    /// Per radius: number of seed samples kept.
    pub kept: Vec<usize>,
    /// Number of (seed, radius) samples discarded for touching the window
    /// boundary.
    pub discarded: usize,
    pub gamma: Option<f64>,
    /// `(d- - margin, d+ + margin)` for the model's gamma.
    pub band: Option<(f64, f64)>,
    pub in_band: Option<bool>,
}

/// Median ball volumes at the root over seeds, with a log-log slope and a
/// bootstrap CI. Balls that reach the window boundary are discarded and
/// counted. The fit uses radii >= 8 (below that the lattice-effect regime
/// dominates).
pub fn estimate_ball_exponent(
    model: ExpModel,
    n: i64,
    radii: &[u32],
    seeds: &[u64],
    band_margin: f64,
) -> Result<BallExponentFit> {
    let r_max = *radii.iter().max().unwrap_or(&8);
    let per_seed: Vec<Result<Vec<Option<usize>>>> = seeds
        .par_iter()
        .map(|&seed| {
            let inst = build_instance(model, n, r_max, seed)?;
            let dist = bfs_distances(&inst.adj, inst.root as usize);
            let b_min = inst
                .boundary
                .iter()
                .map(|&b| dist[b as usize])
                .min()
                .unwrap_or(UNREACHED);
            let mut counts = vec![0usize; r_max as usize + 2];
            for &d in &dist {
                if d != UNREACHED {
                    counts[(d.min(r_max + 1)) as usize] += 1;
                }
            }
            let mut acc = 0usize;
            let mut vols = vec![0usize; r_max as usize + 1];
            for r in 0..=r_max as usize {
                acc += counts[r];
                vols[r] = acc;
            }
            Ok(radii
                .iter()
                .map(|&r| if r < b_min { Some(vols[r as usize]) } else { None })
                .collect())
        })
        .collect();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); radii.len()];
    let mut discarded = 0usize;
    for row in per_seed {
        for (k, v) in row?.into_iter().enumerate() {
            match v {
                Some(vol) => samples[k].push(vol as f64),
                None => discarded += 1,
            }
        }
    }
    // Fit range: radii >= 8 (lattice-effect regime excluded) where at least
    // a quarter of the seeds survive, so stray survivors of the boundary
    // discard do not dominate the medians.
    let min_kept = (seeds.len() / 4).max(3.min(seeds.len()));
    let fit_idx: Vec<usize> =
        (0..radii.len()).filter(|&k| radii[k] >= 8 && samples[k].len() >= min_kept).collect();
    if fit_idx.len() < 2 {
        return Err(Error::domain("not enough surviving radii to fit"));
    }
    let xs: Vec<f64> = fit_idx.iter().map(|&k| radii[k] as f64).collect();
    let ss: Vec<Vec<f64>> = fit_idx.iter().map(|&k| samples[k].clone()).collect();
    let fit = fit_log_log_median(&xs, &ss, 1000, 0xBA11);
    let gamma = model.gamma();
    let band = match gamma {
        Some(g) => {
            let (dm, dp) = ball_exponent_bounds(g)?;
            Some((dm - band_margin, dp + band_margin))
        }
        None => None,
    };
    let in_band = band.map(|(lo, hi)| fit.slope > lo && fit.slope < hi);
    Ok(BallExponentFit {
        model,
        n,
        radii: radii.to_vec(),
        fit,
        kept: samples.iter().map(|s| s.len()).collect(),
        discarded,
        gamma,
        band,
        in_band,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiameterExponentFit {
    pub model: ExpModel,
    pub n_grid: Vec<i64>,
    pub fit: SlopeFit,
    /// Whether every diameter entering the fit was exact (not a sampled
    /// lower bound).
    pub all_exact: bool,
    pub gamma: Option<f64>,
    pub chi_band: Option<(f64, f64)>,
}

/// Fit `log diam(M_n)` against `log n`. Diameters run on the root component.
pub fn estimate_diameter_exponent(
    model: ExpModel,
    n_grid: &[i64],
    seeds: &[u64],
) -> Result<DiameterExponentFit> {
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(n_grid.len());
    let mut all_exact = true;
    for &n in n_grid {
        let per_seed: Vec<Result<(u32, bool)>> = seeds
            .par_iter()
            .map(|&seed| {
                let inst = build_instance(model, n, 8, seed)?;
                let comp = root_component(&inst.adj, inst.root as usize);
                let d = diameter(&comp)?;
                Ok((d.value, d.exact))
            })
            .collect();
        let mut vals = Vec::with_capacity(seeds.len());
        for r in per_seed {
            let (v, exact) = r?;
            all_exact &= exact;
            vals.push(v.max(1) as f64);
        }
        samples.push(vals);
    }
    let xs: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    let fit = fit_log_log_median(&xs, &samples, 1000, 0xD1A8);
    let gamma = model.gamma();
    let chi_band = match gamma {
        Some(g) => Some(chi_bounds(g)?),
        None => None,
    };
    Ok(DiameterExponentFit { model, n_grid: n_grid.to_vec(), fit, all_exact, gamma, chi_band })
}

/// Restrict to the connected component of the root (renumbered).
fn root_component(adj: &[Vec<u32>], root: usize) -> Vec<Vec<u32>> {
    let dist = bfs_distances(adj, root);
    let ids: Vec<u32> = {
        let mut next = 0u32;
        dist.iter()
            .map(|&d| {
                if d == UNREACHED {
                    UNREACHED
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect()
    };
    let mut out = Vec::new();
    for v in 0..adj.len() {
        if dist[v] == UNREACHED {
            continue;
        }
        out.push(adj[v].iter().map(|&u| ids[u as usize]).filter(|&u| u != UNREACHED).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        // watabiki(sqrt(8/3)) = 4, up to one ulp of f64 evaluation.
        assert!((watabiki((8.0f64 / 3.0).sqrt()).unwrap() - 4.0).abs() < 1e-12);
        // gamma -> 0+: the formula tends to 2.
        assert!((watabiki(1e-9).unwrap() - 2.0).abs() < 1e-6);
        // gamma = 2: 2 + 2 sqrt 2.
        assert!((watabiki(2.0).unwrap() - (2.0 + 2.0 * (2.0f64).sqrt())).abs() < 1e-12);
        let (dm, dp) = ball_exponent_bounds((2.0f64).sqrt()).unwrap();
        assert!((dp - 5.0).abs() < 1e-12);
        assert!((dm - (3.0 + (5.0f64).sqrt()) / 2.0).abs() < 1e-12);
        let (_, dp1) = ball_exponent_bounds(1.0).unwrap();
        assert!((dp1 - (2.5 + (2.0f64).sqrt())).abs() < 1e-12);
        let (lo, hi) = chi_bounds((2.0f64).sqrt()).unwrap();
        assert!((lo - 0.2).abs() < 1e-12 && hi == 0.5);
    }

    #[test]
    fn chi_bound_spot_values() {
        // gamma = sqrt(8/3): lower bound is max(1/d+, 1/4) = 1/4.
        let g = (8.0f64 / 3.0).sqrt();
        let (lo, hi) = chi_bounds(g).unwrap();
        let (_, dp) = ball_exponent_bounds(g).unwrap();
        assert!((lo - (1.0 / dp).max(0.25)).abs() < 1e-12);
        assert_eq!(hi, 0.5);
        // gamma -> 0: the bounds pinch at 1/2.
        let (lo, hi) = chi_bounds(1e-6).unwrap();
        assert!(hi - lo < 1e-3 && hi == 0.5);
    }

    #[test]
    fn bounds_sandwich_watabiki_on_grid() {
        for k in 0..100 {
            let g = 0.2 + 1.7 * (k as f64) / 99.0;
            let w = watabiki(g).unwrap();
            let (dm, dp) = ball_exponent_bounds(g).unwrap();
            assert!(dm <= w + 1e-12 && w <= dp + 1e-12, "gamma {g}: {dm} {w} {dp}");
            let (lo, hi) = chi_bounds(g).unwrap();
            assert!(lo <= hi + 1e-12 && lo <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn lattice_control_slope_two() {
        let radii: Vec<u32> = (8..=40).step_by(4).collect();
        let fit = estimate_ball_exponent(ExpModel::Lattice, 0, &radii, &[1, 2, 3], 0.5).unwrap();
        assert!((fit.fit.slope - 2.0).abs() < 0.1, "slope {}", fit.fit.slope);
    }

    #[test]
    fn path_control_slope_one() {
        let fit = estimate_diameter_exponent(
            ExpModel::PathGraph,
            &[64, 128, 256, 512],
            &[1, 2],
        )
        .unwrap();
        assert!((fit.fit.slope - 1.0).abs() < 0.05, "slope {}", fit.fit.slope);
        assert!(fit.all_exact);
    }

    #[test]
    fn mullin_ball_fit_runs_small() {
        // Balls of radius r survive only while r^(volume exponent) stays
        // well under the window size, so the radii here are short.
        let radii: Vec<u32> = vec![8, 10, 12, 14];
        let seeds: Vec<u64> = (0..8).collect();
        let fit = estimate_ball_exponent(ExpModel::Mullin, 400_000, &radii, &seeds, 0.5)
            .unwrap();
        // Wide desk-scale band; the exact acceptance bands run in the
        // integration suite at larger n.
        assert!(fit.fit.slope > 1.5 && fit.fit.slope < 6.0, "slope {}", fit.fit.slope);
    }

    #[test]
    fn determinism() {
        let radii: Vec<u32> = vec![8, 10];
        let seeds: Vec<u64> = (0..10).collect();
        let model = ExpModel::MatedCrt { rho: 0.5, mesh: 8 };
        let a = estimate_ball_exponent(model, 30_000, &radii, &seeds, 0.5).unwrap();
        let b = estimate_ball_exponent(model, 30_000, &radii, &seeds, 0.5).unwrap();
        assert_eq!(a.fit.slope.to_bits(), b.fit.slope.to_bits());
        assert_eq!(a.kept, b.kept);
    }
}
