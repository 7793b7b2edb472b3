//! The Mullin bijection between nearest-neighbor lattice walks and spanning
//! tree-decorated maps, realized through the sewing procedure.
//!
//! Each walk increment attaches one triangle to the frontier of the growing
//! triangulation. An up-step in the first (resp. second) coordinate attaches
//! a triangle over the head edge with two new edges, the left (resp. right)
//! one being a tree (resp. dual tree) edge; the new head is the other one. A
//! down-step attaches a triangle over the head edge and the boundary edge
//! immediately to its left (resp. right), consuming the matching tree edge.
//! The frontier left of the head carries only tree edges, the right only dual
//! tree edges, so the consumed edge is always of the right kind; edges that
//! would lie before the window are materialized lazily as boundary rays.
//!
//! Vertices alternate: tree edges join primal vertices, dual tree edges join
//! dual vertices, head edges are always primal-to-dual with the primal
//! endpoint on the left.

use crate::pmap::{
    Decoration, EdgeClass, Half, IndexMaps, MapBuilder, PlanarMap, NIL,
};
use crate::structure::{build_h_graph, AdjGraph, Provenance, Variant};
use crate::walk::{WalkPath, Window};
use crate::{Error, Result};
use std::collections::{HashMap, VecDeque};

/// Record of one sewing step.
#[derive(Clone, Debug)]
pub struct TriangleRec {
    /// The captured side of the previous head edge (shared with the previous
    /// triangle).
    pub entry: Half,
    /// This triangle's side on its tree or dual-tree edge.
    pub tree_half: Half,
    pub tag: EdgeClass,
    /// True when this step created the tree edge (up-step), false when it
    /// consumed one (down-step).
    pub created_tree: bool,
    /// The face cycle as declared, counterclockwise.
    pub cycle: [Half; 3],
}

/// The sewn window: the triangulation with tree partition plus the per-step
/// records needed for the inverse direction and the index maps.
pub struct MullinState {
    pub map: PlanarMap,
    /// Triangle indices; triangle `i` consumed walk increment `i`.
    pub window: Window,
    pub records: Vec<TriangleRec>,
    /// Edge class by edge id (half / 2).
    pub edge_class: Vec<EdgeClass>,
    /// Per edge id: the triangle indices that created / consumed it (None for
    /// pre-window ray edges and never-matched edges).
    pub tree_match: Vec<(Option<i64>, Option<i64>)>,
    /// Primal flag per compact vertex id.
    pub primal: Vec<bool>,
    /// Head edge external half per step index (position 0 = window.lo).
    pub heads: Vec<Half>,
    /// Tail vertex of the head edge entering triangle 0 (the root vertex).
    pub root_vertex: u32,
}

impl MullinState {
    pub fn record(&self, i: i64) -> &TriangleRec {
        &self.records[(i - self.window.lo) as usize]
    }

    /// Face cycle of triangle `i` starting at its entry side.
    pub fn triangle_cycle(&self, i: i64) -> [Half; 3] {
        let e = self.record(i).entry;
        let b = self.map.next(e);
        let c = self.map.next(b);
        [e, b, c]
    }
}

pub(crate) struct Sewer {
    pub(crate) b: MapBuilder,
    pub(crate) primal_raw: Vec<bool>,
    pub(crate) edge_class: Vec<EdgeClass>,
    pub(crate) tree_match: Vec<(Option<i64>, Option<i64>)>,
    left: Vec<Half>,
    right: Vec<Half>,
    pub(crate) head: Half,
    baseline: VecDeque<Half>,
}

impl Sewer {
    fn new() -> Self {
        let mut b = MapBuilder::new();
        let mut primal_raw = Vec::new();
        let p = b.new_vertex();
        primal_raw.push(true);
        let d = b.new_vertex();
        primal_raw.push(false);
        let e0 = b.new_edge(p, d);
        let baseline = VecDeque::from([b.twin(e0)]);
        Sewer {
            b,
            primal_raw,
            edge_class: vec![EdgeClass::Quad],
            tree_match: vec![(None, None)],
            left: Vec::new(),
            right: Vec::new(),
            head: e0,
            baseline,
        }
    }

    fn new_vertex(&mut self, primal: bool) -> u32 {
        let v = self.b.new_vertex();
        self.primal_raw.push(primal);
        v
    }

    fn new_edge(&mut self, u: u32, v: u32, class: EdgeClass) -> Half {
        let h = self.b.new_edge(u, v);
        self.edge_class.push(class);
        self.tree_match.push((None, None));
        h
    }

    fn pop_left(&mut self) -> Half {
        if let Some(h) = self.left.pop() {
            return h;
        }
        // Materialize a pre-window tree edge. With the left stack empty, the
        // pre-window boundary attaches at the head's left endpoint.
        let anchor = self.b.origin_raw(self.head);
        let x = self.new_vertex(true);
        let e = self.new_edge(x, anchor, EdgeClass::Tree);
        self.baseline.push_front(self.b.twin(e));
        e
    }

    fn pop_right(&mut self) -> Half {
        if let Some(h) = self.right.pop() {
            return h;
        }
        let anchor = self.b.head_raw(self.head);
        let y = self.new_vertex(false);
        let e = self.new_edge(anchor, y, EdgeClass::DualTree);
        self.baseline.push_back(self.b.twin(e));
        e
    }

    pub(crate) fn external_cycle(&self) -> Vec<Half> {
        let mut cycle: Vec<Half> = self.left.clone();
        cycle.push(self.head);
        cycle.extend(self.right.iter().rev());
        cycle.extend(self.baseline.iter().rev());
        cycle
    }
}

/// The pre-seal output of the sewing loop, shared with the contraction in
/// the percolation module.
pub(crate) struct RawSewing {
    pub(crate) sewer: Sewer,
    pub(crate) records: Vec<TriangleRec>,
    pub(crate) heads: Vec<Half>,
    pub(crate) window: Window,
}

/// The sewing loop without the seal, so the contraction in the percolation
/// module can keep operating on the builder.
pub(crate) fn sew_mullin_raw(walk: &WalkPath) -> Result<RawSewing> {
    let t_window = Window::new(walk.window.lo + 1, walk.window.hi);
    let mut s = Sewer::new();
    let mut records = Vec::with_capacity(t_window.len());
    let mut heads = Vec::with_capacity(t_window.len());
    for i in walk.step_indices() {
        let step = walk.step(i);
        let old_head = s.head;
        let rec = match step {
            (1, 0) | (0, 1) => {
                let u = s.b.origin_raw(old_head);
                let w = s.b.head_raw(old_head);
                let up_tree = step == (1, 0);
                let a = s.new_vertex(up_tree);
                let (right_class, left_class) = if up_tree {
                    (EdgeClass::Quad, EdgeClass::Tree)
                } else {
                    (EdgeClass::DualTree, EdgeClass::Quad)
                };
                let er = s.new_edge(w, a, right_class);
                let al = s.new_edge(a, u, left_class);
                s.b.make_face(&[old_head, er, al]);
                let tree_half = if up_tree { al } else { er };
                s.tree_match[(tree_half / 2) as usize].0 = Some(i);
                if up_tree {
                    s.left.push(s.b.twin(al));
                    s.head = s.b.twin(er);
                } else {
                    s.right.push(s.b.twin(er));
                    s.head = s.b.twin(al);
                }
                TriangleRec {
                    entry: old_head,
                    tree_half,
                    tag: if up_tree { EdgeClass::Tree } else { EdgeClass::DualTree },
                    created_tree: true,
                    cycle: [old_head, er, al],
                }
            }
            (-1, 0) => {
                let w_ext = s.pop_left();
                let class = s.edge_class[(w_ext / 2) as usize];
                if class != EdgeClass::Tree {
                    return Err(Error::map(format!("step ({},{}) at {} would consume a {:?} edge", step.0, step.1, i, class)));
                }
                s.tree_match[(w_ext / 2) as usize].1 = Some(i);
                let x = s.b.origin_raw(w_ext);
                let w = s.b.head_raw(old_head);
                let g = s.new_edge(w, x, EdgeClass::Quad);
                s.b.make_face(&[w_ext, old_head, g]);
                s.head = s.b.twin(g);
                TriangleRec { entry: old_head, tree_half: w_ext, tag: EdgeClass::Tree, created_tree: false, cycle: [w_ext, old_head, g] }
            }
            (0, -1) => {
                let e_ext = s.pop_right();
                let class = s.edge_class[(e_ext / 2) as usize];
                if class != EdgeClass::DualTree {
                    return Err(Error::map(format!("step ({},{}) at {} would consume a {:?} edge", step.0, step.1, i, class)));
                }
                s.tree_match[(e_ext / 2) as usize].1 = Some(i);
                let u = s.b.origin_raw(old_head);
                let y = s.b.head_raw(e_ext);
                let g = s.new_edge(y, u, EdgeClass::Quad);
                s.b.make_face(&[old_head, e_ext, g]);
                s.head = s.b.twin(g);
                TriangleRec { entry: old_head, tree_half: e_ext, tag: EdgeClass::DualTree, created_tree: false, cycle: [old_head, e_ext, g] }
            }
            other => {
                return Err(Error::domain(format!("non-nearest-neighbor step {other:?} at index {i}")));
            }
        };
        records.push(rec);
        heads.push(s.head);
    }
    Ok(RawSewing { sewer: s, records, heads, window: t_window })
}

/// Run the sewing procedure over the walk's increments. Triangle `i` is
/// attached using the increment at index `i`, so a walk on `[lo, hi]` yields
/// triangles on `[lo+1, hi]`. The walk must take nearest-neighbor steps and
/// its window must contain 0.
pub fn sew_mullin(walk: &WalkPath) -> Result<MullinState> {
    let raw = sew_mullin_raw(walk)?;
    let RawSewing { sewer: s, records, heads, window: t_window } = raw;
    if !t_window.contains(0) {
        return Err(Error::domain("triangle window must contain index 0"));
    }
    let root_half = records[(0 - t_window.lo) as usize].entry;
    let ext = s.external_cycle();
    let edge_class = s.edge_class;
    let tree_match = s.tree_match;
    let primal_raw = s.primal_raw;
    let root_raw = s.b.origin_raw(root_half);
    let (map, vertex_id) = s.b.seal_with_ids(root_half, Some(&ext), None)?;
    let mut primal = vec![false; map.n_vertices];
    for (raw, &flag) in primal_raw.iter().enumerate() {
        if vertex_id[raw] != NIL {
            primal[vertex_id[raw] as usize] = flag;
        }
    }
    let mut map = map;
    map.decoration = Some(Decoration::TreePartition { edge_class: edge_class.clone(), primal: primal.clone() });
    let root_vertex = vertex_id[root_raw as usize];
    Ok(MullinState {
        map,
        window: t_window,
        records,
        edge_class,
        tree_match,
        primal,
        heads,
        root_vertex,
    })
}

/// Invert the sewing: read the increments off the decorated window. A
/// triangle whose tree edge it created is an up-step of the matching
/// coordinate; one that consumed a tree edge (including pre-window rays) is a
/// down-step. Values are re-anchored at index 0.
pub fn extract_walk(state: &MullinState) -> WalkPath {
    let lo = state.window.lo - 1;
    let window = Window::new(lo, state.window.hi);
    let mut steps = Vec::with_capacity(state.records.len());
    for rec in &state.records {
        let sign = if rec.created_tree { 1 } else { -1 };
        match rec.tag {
            EdgeClass::Tree => steps.push((sign, 0)),
            EdgeClass::DualTree => steps.push((0, sign)),
            EdgeClass::Quad => unreachable!("triangle tree edge tagged Quad"),
        }
    }
    let mut values = vec![(0i64, 0i64); window.len()];
    for (k, &(dl, dr)) in steps.iter().enumerate() {
        values[k + 1] = (values[k].0 + dl, values[k].1 + dr);
    }
    // Re-anchor so the value at index 0 is (0, 0).
    let off = values[(0 - lo) as usize];
    for v in &mut values {
        *v = (v.0 - off.0, v.1 - off.1);
    }
    let mut walk = WalkPath::from_values(window, values);
    walk.sigma = (0.5f64.sqrt(), 0.5f64.sqrt());
    walk
}

/// Adjacency of the window triangles: consecutive triangles share a head
/// edge; a matched tree edge joins its creator and consumer. Double edges
/// (consecutive triangles also sharing their tree edge) surface as
/// multiplicity 2.
pub fn triangle_graph(state: &MullinState) -> AdjGraph {
    let mut g = AdjGraph::new(state.window);
    for i in state.window.lo..state.window.hi {
        g.add_edge(i, i + 1, Provenance::Consecutive);
    }
    for (e, (c, m)) in state.tree_match.iter().enumerate() {
        if let (Some(a), Some(b)) = (c, m) {
            let tag = match state.edge_class[e] {
                EdgeClass::Tree => Provenance::LMatch,
                EdgeClass::DualTree => Provenance::RMatch,
                EdgeClass::Quad => unreachable!("matched quad edge"),
            };
            g.add_edge(*a, *b, tag);
        }
    }
    g
}

/// The central oracle: the walk-adjacency graph H and the triangle adjacency
/// graph are isomorphic modulo multiplicity under the identity on indices.
pub fn verify_prop_tri(walk: &WalkPath) -> Result<bool> {
    let state = sew_mullin(walk)?;
    let h = build_h_graph(walk, Variant::Mullin, state.window)?;
    let t = triangle_graph(&state);
    for i in state.window.iter() {
        if h.neighbors(i) != t.neighbors(i) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The index maps of the sewn window: `phi(v)` is the window index of
/// smallest absolute value whose triangle contains `v` (ties resolved to the
/// positive sign), `psi(i)` is the first primal vertex in the half-edge orbit
/// of triangle `i` starting from its entry side.
pub fn mullin_phi_psi(state: &MullinState) -> IndexMaps {
    let mut phi: HashMap<u32, i64> = HashMap::new();
    let order = spiral_order(state.window);
    for &i in &order {
        for h in state.triangle_cycle(i) {
            let v = state.map.origin(h);
            if state.primal[v as usize] {
                phi.entry(v).or_insert(i);
            }
        }
    }
    let mut psi = Vec::with_capacity(state.window.len());
    for i in state.window.iter() {
        let v = state
            .triangle_cycle(i)
            .iter()
            .map(|&h| state.map.origin(h))
            .find(|&v| state.primal[v as usize])
            .expect("triangle with no primal vertex");
        psi.push(v);
    }
    let lambda = Some(state.heads.iter().map(|&h| h / 2).collect());
    IndexMaps {
        window: state.window,
        phi,
        psi,
        root_vertex: state.root_vertex,
        lambda,
        lambda_tilde: None,
    }
}

/// 0, 1, -1, 2, -2, ... intersected with the window.
fn spiral_order(w: Window) -> Vec<i64> {
    let mut out = Vec::with_capacity(w.len());
    if w.contains(0) {
        out.push(0);
    }
    let mut k = 1;
    while out.len() < w.len() {
        if w.contains(k) {
            out.push(k);
        }
        if w.contains(-k) {
            out.push(-k);
        }
        k += 1;
    }
    out
}

/// The spanning-tree decorated window map `M_n` as a vertex graph: vertices
/// are the primal vertices; edges are the in-window tree edges plus the
/// primal diagonals of fully matched dual-tree quadrilaterals. Returns
/// `(adjacency by compact vertex id, root vertex)`; dual vertices keep empty
/// rows.
pub fn mullin_window_graph(state: &MullinState) -> (Vec<Vec<u32>>, u32) {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); state.map.n_vertices];
    let push = |a: u32, b: u32, adj: &mut Vec<Vec<u32>>| {
        if a != b {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
    };
    for h in state.map.halves() {
        if h % 2 != 0 {
            continue;
        }
        let e = (h / 2) as usize;
        match state.edge_class[e] {
            EdgeClass::Tree => {
                push(state.map.origin(h), state.map.head(h), &mut adj);
            }
            EdgeClass::DualTree => {
                if let (Some(c), Some(m)) = state.tree_match[e] {
                    // The diagonal of the quadrilateral joins the unique
                    // primal vertices of the two incident triangles.
                    let pc = state.map.origin(state.record(c).entry);
                    let pm = state.map.origin(state.record(m).entry);
                    push(pc, pm, &mut adj);
                }
            }
            EdgeClass::Quad => {}
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    (adj, state.root_vertex)
}

/// Number of window triangles incident to each vertex (0 for dual vertices);
/// the degree statistic with an expected exponential tail.
pub fn triangle_incidences(state: &MullinState) -> Vec<u32> {
    let mut count = vec![0u32; state.map.n_vertices];
    for i in state.window.iter() {
        for h in state.triangle_cycle(i) {
            let v = state.map.origin(h) as usize;
            if state.primal[v] {
                count[v] += 1;
            }
        }
    }
    count
}

/// Checks that the first coordinate restricted to tree steps traces the
/// contour of the tree: every down-step closes the most recently opened
/// unclosed tree edge, and it is the same physical edge.
pub fn tree_contour_consistent(state: &MullinState) -> bool {
    for class in [EdgeClass::Tree, EdgeClass::DualTree] {
        let mut open: Vec<Half> = Vec::new();
        for i in state.window.iter() {
            let rec = state.record(i);
            if rec.tag != class {
                continue;
            }
            if rec.created_tree {
                open.push(rec.tree_half / 2);
            } else if let Some(top) = open.pop() {
                if top != rec.tree_half / 2 {
                    return false;
                }
            }
            // Down-steps with an empty stack consume pre-window rays; fine.
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmap::validate;
    use crate::walk::{make_distribution, sample_walk, Model};

    fn mullin_walk(n: i64, seed: u64) -> WalkPath {
        let d = make_distribution(Model::MullinSimple, None).unwrap();
        sample_walk(&d, Window::new(-n - 1, n), seed)
    }

    #[test]
    fn single_up_step() {
        let w = WalkPath::from_values(Window::new(-1, 0), vec![(0, 0), (1, 0)]);
        let state = sew_mullin(&w).unwrap();
        assert_eq!(state.window, Window::new(0, 0));
        let r = validate(&state.map);
        assert!(r.ok(), "{:?}", r.violation);
        // 1 bounded triangle + external.
        assert_eq!(state.map.n_faces, 2);
        assert_eq!(state.record(0).tag, EdgeClass::Tree);
        assert!(state.record(0).created_tree);
    }

    #[test]
    fn up_down_pair_round_trips() {
        // Anchored at index 0: steps (1,0) then (-1,0).
        let w = WalkPath::from_values(Window::new(-1, 1), vec![(-1, 0), (0, 0), (-1, 0)]);
        let state = sew_mullin(&w).unwrap();
        assert!(validate(&state.map).ok());
        // The second triangle consumed the first one's tree edge.
        assert_eq!(state.tree_match[(state.record(0).tree_half / 2) as usize], (Some(0), Some(1)));
        let back = extract_walk(&state);
        assert_eq!(back.values, w.values);
    }

    #[test]
    fn face_count_is_window_length() {
        for seed in [3u64, 17, 99] {
            let w = mullin_walk(40, seed);
            let state = sew_mullin(&w).unwrap();
            let r = validate(&state.map);
            assert!(r.ok(), "{:?}", r.violation);
            // 2n+1 bounded triangles plus the external face.
            assert_eq!(state.map.n_faces, state.window.len() + 1);
            for f in 0..state.map.n_faces as u32 {
                if Some(f) != state.map.external_face {
                    assert_eq!(state.map.face_degree(f), 3);
                }
            }
        }
    }

    #[test]
    fn round_trip_random_windows() {
        for seed in 0..300 {
            let n = 1 + (seed % 100) as i64;
            let w = mullin_walk(n, seed);
            let state = sew_mullin(&w).unwrap();
            let back = extract_walk(&state);
            assert_eq!(back.values, w.values, "seed {seed}");
        }
    }

    #[test]
    fn prop_tri_small_and_random() {
        // n = 1: all four single-step windows.
        for vals in [
            vec![(0, 0), (1, 0), (2, 0)],
            vec![(0, 0), (1, 0), (0, 0)],
            vec![(0, 0), (0, 1), (0, 2)],
            vec![(0, 0), (0, 1), (1, 1)],
        ] {
            let w = WalkPath::from_values(Window::new(-1, 1), vals);
            assert!(verify_prop_tri(&w).unwrap());
        }
        for seed in 0..300 {
            let n = 1 + (seed % 64) as i64;
            let w = mullin_walk(n, seed + 1000);
            assert!(verify_prop_tri(&w).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn prop_tri_adversarial_monotone() {
        // Long monotone run then full descent.
        let mut vals = vec![(0i64, 0i64)];
        for k in 1..=30 {
            vals.push((k, 0));
        }
        for k in 1..=30 {
            vals.push((30 - k, 0));
        }
        let w = WalkPath::from_values(Window::new(-31, 29), vals);
        assert!(verify_prop_tri(&w).unwrap());
        assert!(tree_contour_consistent(&sew_mullin(&w).unwrap()));
    }

    #[test]
    fn interior_triangle_degree_at_most_three() {
        let w = mullin_walk(80, 5);
        let state = sew_mullin(&w).unwrap();
        let t = triangle_graph(&state);
        for i in state.window.iter() {
            assert!(t.degree(i) <= 3);
        }
    }

    #[test]
    fn phi_psi_root_and_contraction() {
        for seed in 0..50 {
            let n = 2 + (seed % 40) as i64;
            let w = mullin_walk(n, seed);
            let state = sew_mullin(&w).unwrap();
            let maps = mullin_phi_psi(&state);
            assert_eq!(maps.psi_of(0), state.root_vertex);
            assert_eq!(maps.phi_of(state.root_vertex), Some(0));
            for i in state.window.iter() {
                let v = maps.psi_of(i);
                let fi = maps.phi_of(v).unwrap();
                assert!(fi.abs() <= i.abs(), "phi(psi({i})) = {fi}");
            }
        }
    }

    #[test]
    fn phi_tie_breaks_positive() {
        for seed in 0..40 {
            let w = mullin_walk(10, seed);
            let state = sew_mullin(&w).unwrap();
            let maps = mullin_phi_psi(&state);
            // Any vertex on both t(-i) and t(i) and nothing nearer zero must
            // map to +i.
            for (&v, &i) in maps.phi.iter() {
                if i < 0 {
                    // The positive twin must not contain v.
                    let on_pos = state
                        .triangle_cycle(-i)
                        .iter()
                        .any(|&h| state.map.origin(h) == v);
                    assert!(!on_pos, "tie at +-{i} broke negative for vertex {v}");
                }
            }
        }
    }

    #[test]
    fn contour_property_random() {
        for seed in 0..100 {
            let w = mullin_walk(60, seed);
            let state = sew_mullin(&w).unwrap();
            assert!(tree_contour_consistent(&state), "seed {seed}");
        }
    }

    #[test]
    fn window_graph_connected() {
        for seed in 0..30 {
            let w = mullin_walk(50, seed);
            let state = sew_mullin(&w).unwrap();
            let (adj, root) = mullin_window_graph(&state);
            // BFS over primal component.
            let mut seen = vec![false; adj.len()];
            let mut queue = vec![root];
            seen[root as usize] = true;
            let mut cnt = 1;
            while let Some(v) = queue.pop() {
                for &u in &adj[v as usize] {
                    if !seen[u as usize] {
                        seen[u as usize] = true;
                        cnt += 1;
                        queue.push(u);
                    }
                }
            }
            let primal_with_edges =
                (0..adj.len()).filter(|&v| !adj[v].is_empty() || v == root as usize).count();
            assert_eq!(cnt, primal_with_edges, "seed {seed}: tree component disconnected");
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let w = WalkPath::from_values(Window::new(-1, 0), vec![(0, 0), (1, 1)]);
        assert!(sew_mullin(&w).is_err());
    }
}
