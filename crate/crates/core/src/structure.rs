//! Walk-encoded structure graphs and discretized mated-CRT graphs.
//!
//! Both constructions put an edge between window indices when the relevant
//! coordinate stays above both endpoint levels in between. The sweep in
//! [`visible_pairs`] finds all such pairs in one left-to-right pass with a
//! monotone stack; candidates pop in amortized O(1).

use crate::walk::{BrownianGrid, WalkPath, Window};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Consecutive,
    LMatch,
    RMatch,
}

/// Integer-vertex adjacency structure on a window, with per-edge provenance
/// tags and multiplicities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjGraph {
    pub window: Window,
    /// Sorted neighbor lists, one per window index.
    adj: Vec<Vec<i64>>,
    /// Edges with `i < j`, sorted, parallel to `tags` and `mult`.
    edges: Vec<(i64, i64)>,
    tags: Vec<Provenance>,
    mult: Vec<u32>,
}

impl AdjGraph {
    pub fn new(window: Window) -> Self {
        AdjGraph { window, adj: vec![Vec::new(); window.len()], edges: Vec::new(), tags: Vec::new(), mult: Vec::new() }
    }

    fn slot(&self, i: i64) -> usize {
        debug_assert!(self.window.contains(i));
        (i - self.window.lo) as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.window.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: i64) -> &[i64] {
        &self.adj[self.slot(i)]
    }

    pub fn degree(&self, i: i64) -> usize {
        self.adj[self.slot(i)].len()
    }

    pub fn has_edge(&self, i: i64, j: i64) -> bool {
        if !self.window.contains(i) || !self.window.contains(j) {
            return false;
        }
        self.adj[self.slot(i)].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j, provenance, multiplicity)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (i64, i64, Provenance, u32)> + '_ {
        self.edges.iter().zip(self.tags.iter()).zip(self.mult.iter()).map(|((&(i, j), &t), &m)| (i, j, t, m))
    }

    /// Record an edge; raises multiplicity if `(i, j)` is already present.
    /// No self-loops.
    pub fn add_edge(&mut self, i: i64, j: i64, tag: Provenance) {
        assert!(i != j, "self-loop at {i}");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        match self.edges.binary_search(&(a, b)) {
            Ok(pos) => self.mult[pos] += 1,
            Err(pos) => {
                self.edges.insert(pos, (a, b));
                self.tags.insert(pos, tag);
                self.mult.insert(pos, 1);
                let sa = self.slot(a);
                let sb = self.slot(b);
                let ins = self.adj[sa].binary_search(&b).unwrap_err();
                self.adj[sa].insert(ins, b);
                let ins = self.adj[sb].binary_search(&a).unwrap_err();
                self.adj[sb].insert(ins, a);
            }
        }
    }

    /// The edges tagged `Consecutive`.
    pub fn consecutive_edges(&self) -> Vec<(i64, i64)> {
        self.edges().filter(|&(_, _, t, _)| t == Provenance::Consecutive).map(|(i, j, _, _)| (i, j)).collect()
    }
}

/// Append-sorted graph builder: collects raw edges, sorts once, deduplicates
/// into multiplicities. Avoids per-edge binary-search insertion on big windows.
struct GraphAccum {
    g: AdjGraph,
    raw: Vec<(i64, i64, Provenance)>,
}

impl GraphAccum {
    fn new(window: Window) -> Self {
        GraphAccum { g: AdjGraph::new(window), raw: Vec::new() }
    }

    fn push(&mut self, i: i64, j: i64, tag: Provenance) {
        self.raw.push(if i < j { (i, j, tag) } else { (j, i, tag) });
    }

    fn finish(mut self) -> AdjGraph {
        self.raw.sort_unstable_by_key(|&(i, j, t)| (i, j, t != Provenance::Consecutive));
        for (i, j, tag) in self.raw.drain(..) {
            if let Some(pos) = self.g.edges.len().checked_sub(1) {
                if self.g.edges[pos] == (i, j) {
                    self.g.mult[pos] += 1;
                    continue;
                }
            }
            self.g.edges.push((i, j));
            self.g.tags.push(tag);
            self.g.mult.push(1);
        }
        for &(i, j) in &self.g.edges {
            let (si, sj) = ((i - self.g.window.lo) as usize, (j - self.g.window.lo) as usize);
            self.g.adj[si].push(j);
            self.g.adj[sj].push(i);
        }
        for list in &mut self.g.adj {
            list.sort_unstable();
        }
        self.g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Mullin,
    Bipolar,
}

/// Comparison mode for the sweep: walks use strict `<`, Brownian cell minima
/// use `<=` (ties break toward declaring adjacency).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Strict,
    Weak,
}

/// All pairs `(a, b)` with `a < b - 1` such that
/// `max(x[a] - off_a, x[b] - off_b) REL min(x[a+1..=b-1])`, REL being `<`
/// (Strict) or `<=` (Weak), reported through `emit(a, b)` in increasing `b`.
fn visible_pairs<F: FnMut(i64, i64)>(lo: i64, xs: &[f64], off_a: f64, off_b: f64, cmp: Cmp, mut emit: F) {
    let lt = |p: f64, q: f64| match cmp {
        Cmp::Strict => p < q,
        Cmp::Weak => p <= q,
    };
    // Stack of candidate left ends; values never decrease upward, and the top
    // is always the previous position. For an entry below the top, the
    // interior minimum up to the current position is exactly the value of the
    // entry directly above it.
    let mut stack: Vec<usize> = Vec::new();
    for b in 0..xs.len() {
        let xb = xs[b] - off_b;
        for d in (0..stack.len()).rev() {
            let a = stack[d];
            let interior_min = if d + 1 == stack.len() { f64::INFINITY } else { xs[stack[d + 1]] };
            if !lt(xb, interior_min) {
                break;
            }
            if b - a >= 2 && lt(xs[a] - off_a, interior_min) {
                emit(lo + a as i64, lo + b as i64);
            }
        }
        while let Some(&a) = stack.last() {
            let dead = match cmp {
                Cmp::Strict => xs[a] - off_a >= xs[b],
                Cmp::Weak => xs[a] - off_a > xs[b],
            };
            if dead {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(b);
    }
}

/// Build the walk-encoded graph H on `window`. The walk must extend one index
/// left of the window because the adjacency formula reads the value at
/// `i1 - 1`.
///
/// Mullin variant: `i1 ~ i2` iff `L[i1-1] v L[i2] < min L[i1..i2-1]`, the same
/// with R, or `i2 - i1 = 1`. Bipolar variant shifts one endpoint level per
/// coordinate: `(L[s-1] - 1) v L[t] < min L[s..t-1]` and
/// `R[s-1] v (R[t] - 1) < min R[s..t-1]`.
pub fn build_h_graph(walk: &WalkPath, variant: Variant, window: Window) -> Result<AdjGraph> {
    if window.len() < 2 {
        return Err(Error::domain("H-graph window shorter than 2"));
    }
    if walk.window.lo > window.lo - 1 || walk.window.hi < window.hi {
        return Err(Error::domain(format!(
            "walk on [{}, {}] does not cover window [{} - 1, {}]",
            walk.window.lo, walk.window.hi, window.lo, window.hi
        )));
    }
    let mut acc = GraphAccum::new(window);
    for i in window.lo..window.hi {
        acc.push(i, i + 1, Provenance::Consecutive);
    }
    // Sweep positions are a = i1 - 1 and b = i2, so feed values on
    // [window.lo - 1, window.hi]. Pairs with a = window.lo - 1 are legal: they
    // have i1 = window.lo.
    let lo = window.lo - 1;
    let ls: Vec<f64> = (lo..=window.hi).map(|i| walk.l(i) as f64).collect();
    let rs: Vec<f64> = (lo..=window.hi).map(|i| walk.r(i) as f64).collect();
    let (l_off_a, r_off_b) = match variant {
        Variant::Mullin => (0.0, 0.0),
        Variant::Bipolar => (1.0, 1.0),
    };
    visible_pairs(lo, &ls, l_off_a, 0.0, Cmp::Strict, |a, b| {
        // a = i1 - 1, b = i2; b - a = 2 is the consecutive pair, skip it.
        if b - a >= 3 {
            acc.push(a + 1, b, Provenance::LMatch);
        }
    });
    visible_pairs(lo, &rs, 0.0, r_off_b, Cmp::Strict, |a, b| {
        if b - a >= 3 {
            acc.push(a + 1, b, Provenance::RMatch);
        }
    });
    Ok(acc.finish())
}

/// Build the discretized mated-CRT graph on `window` from per-unit-cell grid
/// minima. The grid must cover `[window.lo - 1, window.hi]` so the cell of the
/// leftmost vertex exists. Non-consecutive pairs where both coordinate
/// conditions hold get multiplicity 2.
pub fn build_mated_crt(grid: &BrownianGrid, window: Window) -> Result<AdjGraph> {
    if window.len() < 2 {
        return Err(Error::domain("mated-CRT window shorter than 2"));
    }
    if grid.window.lo > window.lo - 1 || grid.window.hi < window.hi {
        return Err(Error::domain("grid does not cover the window plus one cell to the left"));
    }
    let mut acc = GraphAccum::new(window);
    for i in window.lo..window.hi {
        acc.push(i, i + 1, Provenance::Consecutive);
    }
    // Value at position x = minimum over the cell [x-1, x]; interior of a
    // pair (x1, x2) is the cells x1+1 .. x2-1.
    let ls: Vec<f64> = window.iter().map(|x| grid.cell_minimum(x).0).collect();
    let rs: Vec<f64> = window.iter().map(|x| grid.cell_minimum(x).1).collect();
    visible_pairs(window.lo, &ls, 0.0, 0.0, Cmp::Weak, |a, b| {
        if b - a >= 2 {
            acc.push(a, b, Provenance::LMatch);
        }
    });
    visible_pairs(window.lo, &rs, 0.0, 0.0, Cmp::Weak, |a, b| {
        if b - a >= 2 {
            acc.push(a, b, Provenance::RMatch);
        }
    });
    Ok(acc.finish())
}

/// Vertices of `graph`'s window that are adjacent, inside the wider graph, to
/// a vertex outside the window.
pub fn boundary_vertices(graph: &AdjGraph, full_graph: &AdjGraph) -> Result<Vec<i64>> {
    if !full_graph.window.contains_window(graph.window) {
        return Err(Error::NotNested);
    }
    let w = graph.window;
    let mut out = Vec::new();
    for i in w.iter() {
        if full_graph.neighbors(i).iter().any(|&j| !w.contains(j)) {
            out.push(i);
        }
    }
    Ok(out)
}

/// Brute-force O(n^3) evaluation of the walk adjacency formula; the oracle
/// for `build_h_graph`.
pub fn brute_force_h_graph(walk: &WalkPath, variant: Variant, window: Window) -> Result<AdjGraph> {
    if walk.window.lo > window.lo - 1 || walk.window.hi < window.hi {
        return Err(Error::domain("walk does not cover window"));
    }
    let mut g = AdjGraph::new(window);
    for i1 in window.iter() {
        for i2 in (i1 + 1)..=window.hi {
            if i2 - i1 == 1 {
                g.add_edge(i1, i2, Provenance::Consecutive);
                continue;
            }
            let min_l = (i1..i2).map(|j| walk.l(j)).min().unwrap();
            let min_r = (i1..i2).map(|j| walk.r(j)).min().unwrap();
            let (l_hit, r_hit) = match variant {
                Variant::Mullin => (
                    walk.l(i1 - 1).max(walk.l(i2)) < min_l,
                    walk.r(i1 - 1).max(walk.r(i2)) < min_r,
                ),
                Variant::Bipolar => (
                    (walk.l(i1 - 1) - 1).max(walk.l(i2)) < min_l,
                    walk.r(i1 - 1).max(walk.r(i2) - 1) < min_r,
                ),
            };
            if l_hit {
                g.add_edge(i1, i2, Provenance::LMatch);
            }
            if r_hit {
                g.add_edge(i1, i2, Provenance::RMatch);
            }
        }
    }
    Ok(g)
}

/// Brute-force evaluation of the Brownian adjacency on cell minima.
pub fn brute_force_mated_crt(grid: &BrownianGrid, window: Window) -> Result<AdjGraph> {
    let mut g = AdjGraph::new(window);
    for x1 in window.iter() {
        for x2 in (x1 + 1)..=window.hi {
            if x2 - x1 == 1 {
                g.add_edge(x1, x2, Provenance::Consecutive);
                continue;
            }
            let min_l = ((x1 + 1)..x2).map(|j| grid.cell_minimum(j).0).fold(f64::INFINITY, f64::min);
            let min_r = ((x1 + 1)..x2).map(|j| grid.cell_minimum(j).1).fold(f64::INFINITY, f64::min);
            if grid.cell_minimum(x1).0.max(grid.cell_minimum(x2).0) <= min_l {
                g.add_edge(x1, x2, Provenance::LMatch);
            }
            if grid.cell_minimum(x1).1.max(grid.cell_minimum(x2).1) <= min_r {
                g.add_edge(x1, x2, Provenance::RMatch);
            }
        }
    }
    Ok(g)
}

pub fn graphs_equal(a: &AdjGraph, b: &AdjGraph) -> bool {
    a.window == b.window && a.edges == b.edges && a.mult == b.mult
}

/// Check the sweep against the brute force on one instance (used by tests and
/// the selfcheck).
pub fn sweep_matches_brute_force(walk: &WalkPath, variant: Variant, window: Window) -> Result<bool> {
    let fast = build_h_graph(walk, variant, window)?;
    let slow = brute_force_h_graph(walk, variant, window)?;
    Ok(graphs_equal(&fast, &slow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{make_distribution, sample_brownian, sample_walk, Model};

    fn walk_from_values(vals: Vec<(i64, i64)>, lo: i64) -> WalkPath {
        let window = Window::new(lo, lo + vals.len() as i64 - 1);
        WalkPath::from_values(window, vals)
    }

    #[test]
    fn spec_l_match_example() {
        // L = (0,1,2,1,0) on [-1,3], R strictly decreasing so no R matches.
        let vals = vec![(0, 0), (1, -1), (2, -2), (1, -3), (0, -4)];
        let w = walk_from_values(vals, -1);
        let g = build_h_graph(&w, Variant::Mullin, Window::new(0, 3)).unwrap();
        assert!(g.has_edge(0, 3));
        assert_eq!(g.edges().filter(|&(_, _, t, _)| t == Provenance::LMatch).count(), 1);
        assert_eq!(g.edge_count(), 4); // path 0-1-2-3 plus {0,3}
    }

    #[test]
    fn constant_walk_only_consecutive() {
        let w = walk_from_values(vec![(0, 0); 12], -4);
        let g = build_h_graph(&w, Variant::Mullin, Window::new(-3, 7)).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!(g.edges().all(|(_, _, t, _)| t == Provenance::Consecutive));
    }

    #[test]
    fn sweep_equals_brute_force_mullin_and_bipolar() {
        for (model, variant) in [
            (Model::MullinSimple, Variant::Mullin),
            (Model::Kreweras, Variant::Mullin),
            (Model::BipolarUniform, Variant::Bipolar),
            (Model::BipolarTriangulation, Variant::Bipolar),
        ] {
            let d = make_distribution(model, None).unwrap();
            // 250 seeds per law gives 500 windows per adjacency variant.
            for seed in 0..250 {
                let n = 1 + (seed % 64) as i64;
                let w = sample_walk(&d, Window::new(-n - 1, n), seed);
                assert!(
                    sweep_matches_brute_force(&w, variant, Window::symmetric(n)).unwrap(),
                    "mismatch model {model:?} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn mated_crt_sweep_equals_brute_force() {
        for seed in 0..40 {
            let n = 2 + (seed % 20) as i64;
            let g = sample_brownian(0.5, Window::new(-n - 1, n), 4, seed).unwrap();
            let fast = build_mated_crt(&g, Window::symmetric(n)).unwrap();
            let slow = brute_force_mated_crt(&g, Window::symmetric(n)).unwrap();
            assert!(graphs_equal(&fast, &slow), "seed {seed}");
        }
    }

    #[test]
    fn consecutive_edges_always_present_and_tagged() {
        let d = make_distribution(Model::MullinSimple, None).unwrap();
        let w = sample_walk(&d, Window::new(-51, 50), 4);
        let g = build_h_graph(&w, Variant::Mullin, Window::symmetric(50)).unwrap();
        for i in -50..50 {
            assert!(g.has_edge(i, i + 1));
        }
        // Removing match edges leaves exactly the path on the window.
        let path: Vec<_> = g.consecutive_edges();
        assert_eq!(path.len(), 100);
        assert!(path.iter().enumerate().all(|(k, &(i, j))| i == -50 + k as i64 && j == i + 1));
    }

    #[test]
    fn boundary_of_window() {
        let w = walk_from_values(vec![(0, 0); 43], -21);
        let full = build_h_graph(&w, Variant::Mullin, Window::symmetric(20)).unwrap();
        let sub = build_h_graph(&w, Variant::Mullin, Window::symmetric(10)).unwrap();
        let b = boundary_vertices(&sub, &full).unwrap();
        assert_eq!(b, vec![-10, 10]);
    }

    #[test]
    fn boundary_contains_window_ends() {
        let d = make_distribution(Model::Kreweras, None).unwrap();
        for seed in 0..20 {
            let w = sample_walk(&d, Window::new(-41, 40), seed);
            let full = build_h_graph(&w, Variant::Mullin, Window::symmetric(40)).unwrap();
            let sub = build_h_graph(&w, Variant::Mullin, Window::symmetric(15)).unwrap();
            let b = boundary_vertices(&sub, &full).unwrap();
            assert!(b.contains(&-15) && b.contains(&15));
        }
    }
}
