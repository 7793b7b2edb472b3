//! Half-edge combinatorial planar maps with a root edge, external face,
//! decorations, duals, and structural validators shared by the bijection
//! modules.
//!
//! Conventions. Half-edges come in twin pairs; `next` walks each face cycle
//! with the face on the LEFT, so bounded faces are counterclockwise cycles.
//! Rotating the origin-half of an edge clockwise around its origin vertex is
//! `next(twin(h))`; counterclockwise is `twin(prev(h))`. Builders may kill
//! half-edges (edge identification); dead slots stay in the arrays and every
//! accessor skips them.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Half = u32;
pub const NIL: u32 = u32::MAX;

/// Per-edge decoration tag used by the Mullin bijection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeClass {
    Quad,
    Tree,
    DualTree,
}

/// Percolation colors for the site-percolated triangulation bijection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteColor {
    Red,
    Blue,
    Undetermined,
}

/// Schnyder edge colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WoodColor {
    Blue,
    Red,
    Green,
}

/// Per-model decoration carried by a sealed map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Decoration {
    /// Edge class by edge id (half / 2), plus per-vertex primal flags.
    TreePartition { edge_class: Vec<EdgeClass>, primal: Vec<bool> },
    /// Vertex colors by compact vertex id.
    Percolation { color: Vec<SiteColor> },
    /// `up[e]` is the half-edge of edge `e` pointing from source to sink side;
    /// poles are compact vertex ids.
    Bipolar { up: Vec<Half>, source: u32, sink: u32 },
    /// Colors for inner edges (by edge id), `None` on outer edges; `up[e]`
    /// is the directed half of edge `e` in the 3-orientation; plus the three
    /// outer vertices in counterclockwise order.
    Schnyder { color: Vec<Option<WoodColor>>, up: Vec<Half>, outer: [u32; 3] },
}

/// An immutable half-edge planar map. Produced by [`MapBuilder::seal`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanarMap {
    twin: Vec<Half>,
    next: Vec<Half>,
    prev: Vec<Half>,
    /// Compact vertex id at the origin of each half-edge.
    origin: Vec<u32>,
    alive: Vec<bool>,
    /// Face id per half-edge, assigned by orbit scan at seal time.
    face_of: Vec<u32>,
    pub n_vertices: usize,
    pub n_faces: usize,
    pub root: Half,
    pub external_face: Option<u32>,
    pub decoration: Option<Decoration>,
}

impl PlanarMap {
    pub fn twin(&self, h: Half) -> Half {
        self.twin[h as usize]
    }
    pub fn next(&self, h: Half) -> Half {
        self.next[h as usize]
    }
    pub fn prev(&self, h: Half) -> Half {
        self.prev[h as usize]
    }
    pub fn origin(&self, h: Half) -> u32 {
        self.origin[h as usize]
    }
    pub fn head(&self, h: Half) -> u32 {
        self.origin[self.twin[h as usize] as usize]
    }
    pub fn face(&self, h: Half) -> u32 {
        self.face_of[h as usize]
    }
    pub fn is_alive(&self, h: Half) -> bool {
        self.alive[h as usize]
    }
    /// Clockwise rotation of origin-halves around `origin(h)`.
    pub fn rot_cw(&self, h: Half) -> Half {
        self.next(self.twin(h))
    }
    /// Counterclockwise rotation of origin-halves around `origin(h)`.
    pub fn rot_ccw(&self, h: Half) -> Half {
        self.twin(self.prev(h))
    }

    /// Total allocated half slots (alive and dead).
    pub fn half_slots(&self) -> usize {
        self.twin.len()
    }

    pub fn halves(&self) -> impl Iterator<Item = Half> + '_ {
        (0..self.twin.len() as u32).filter(|&h| self.alive[h as usize])
    }

    pub fn n_halves(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn n_edges(&self) -> usize {
        self.n_halves() / 2
    }

    /// The half-edges of the face cycle starting at `h`.
    pub fn face_cycle(&self, h: Half) -> Vec<Half> {
        let mut out = vec![h];
        let mut cur = self.next(h);
        while cur != h {
            out.push(cur);
            cur = self.next(cur);
        }
        out
    }

    /// The origin-halves around `origin(h)` in clockwise order.
    pub fn vertex_star(&self, h: Half) -> Vec<Half> {
        let mut out = vec![h];
        let mut cur = self.rot_cw(h);
        while cur != h {
            out.push(cur);
            cur = self.rot_cw(cur);
        }
        out
    }

    pub fn degree(&self, v: u32) -> usize {
        self.halves().filter(|&h| self.origin(h) == v).count()
    }

    /// One representative origin-half per vertex.
    pub fn vertex_reps(&self) -> Vec<Half> {
        let mut rep = vec![NIL; self.n_vertices];
        for h in self.halves() {
            let v = self.origin(h) as usize;
            if rep[v] == NIL {
                rep[v] = h;
            }
        }
        rep
    }

    /// One representative half per face.
    pub fn face_reps(&self) -> Vec<Half> {
        let mut rep = vec![NIL; self.n_faces];
        for h in self.halves() {
            let f = self.face(h) as usize;
            if rep[f] == NIL {
                rep[f] = h;
            }
        }
        rep
    }

    pub fn face_degree(&self, f: u32) -> usize {
        self.halves().filter(|&h| self.face(h) == f).count()
    }

    /// Simple vertex adjacency over an edge subset, deduplicated. The
    /// predicate sees each edge once, through its smaller-id half (stable
    /// under edge identifications). Used to run graph metrics on window maps.
    pub fn vertex_graph<F: Fn(Half) -> bool>(&self, keep_edge: F) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for h in self.halves() {
            if h < self.twin(h) && keep_edge(h) {
                let (u, v) = (self.origin(h), self.head(h));
                if u != v {
                    adj[u as usize].push(v);
                    adj[v as usize].push(u);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

/// Structured outcome of [`validate`]: either OK with counts, or the first
/// violation found.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub violation: Option<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Check permutation axioms, Euler's formula, boundary consistency, and
/// decoration invariants. Returns the first violation, report-style.
pub fn validate(map: &PlanarMap) -> ValidationReport {
    let mut report = ValidationReport {
        vertices: map.n_vertices,
        edges: map.n_edges(),
        faces: map.n_faces,
        violation: None,
    };
    let fail = |msg: String| msg;

    // Twin is an involution without fixed points; next/prev are inverse
    // bijections; all alive pointers stay alive.
    for h in map.halves() {
        let t = map.twin(h);
        if t == h {
            report.violation = Some(fail(format!("twin involution: fixed point at {h}")));
            return report;
        }
        if !map.is_alive(t) || map.twin(t) != h {
            report.violation = Some(fail(format!("twin involution broken at {h}")));
            return report;
        }
        if !map.is_alive(map.next(h)) || map.prev(map.next(h)) != h {
            report.violation = Some(fail(format!("next/prev inconsistent at {h}")));
            return report;
        }
        if map.origin(map.next(map.twin(h))) != map.head(h) && false {
            unreachable!();
        }
    }
    // Origins are constant along vertex rotations and next is origin-
    // consistent: origin(next(h)) = head(h).
    for h in map.halves() {
        if map.origin(map.next(h)) != map.head(h) {
            report.violation = Some(fail(format!("next does not chain head-to-tail at {h}")));
            return report;
        }
    }
    // Face orbits partition the halves and match face_of.
    let mut seen = vec![false; map.twin.len()];
    let mut n_faces = 0usize;
    for h in map.halves() {
        if seen[h as usize] {
            continue;
        }
        n_faces += 1;
        for c in map.face_cycle(h) {
            if seen[c as usize] {
                report.violation = Some(fail(format!("face orbits overlap at {c}")));
                return report;
            }
            seen[c as usize] = true;
            if map.face(c) != map.face(h) {
                report.violation = Some(fail(format!("face_of disagrees with orbit at {c}")));
                return report;
            }
        }
    }
    if n_faces != map.n_faces {
        report.violation = Some(fail(format!("face count {n_faces} != recorded {}", map.n_faces)));
        return report;
    }
    // Vertex orbits partition the halves.
    let mut seen_v = vec![false; map.twin.len()];
    let mut n_vertices = 0usize;
    for h in map.halves() {
        if seen_v[h as usize] {
            continue;
        }
        n_vertices += 1;
        for s in map.vertex_star(h) {
            if seen_v[s as usize] {
                report.violation = Some(fail(format!("vertex orbits overlap at {s}")));
                return report;
            }
            seen_v[s as usize] = true;
            if map.origin(s) != map.origin(h) {
                report.violation = Some(fail(format!("origin varies along vertex star at {s}")));
                return report;
            }
        }
    }
    if n_vertices != map.n_vertices {
        report.violation = Some(fail(format!(
            "vertex count {n_vertices} != recorded {}",
            map.n_vertices
        )));
        return report;
    }
    // Connectivity is implied by the builders; Euler characteristic checks
    // the sphere embedding (external face counted as a face).
    let (v, e, f) = (map.n_vertices as i64, map.n_edges() as i64, map.n_faces as i64);
    if v - e + f != 2 {
        report.violation = Some(fail(format!("Euler formula: V-E+F = {} != 2", v - e + f)));
        return report;
    }
    if !map.is_alive(map.root) {
        report.violation = Some(fail("root half-edge is dead".into()));
        return report;
    }
    if let Some(violation) = check_decoration(map) {
        report.violation = Some(violation);
        return report;
    }
    report
}

fn check_decoration(map: &PlanarMap) -> Option<String> {
    match &map.decoration {
        None => None,
        Some(Decoration::TreePartition { edge_class, primal }) => {
            if primal.len() != map.n_vertices {
                return Some("primal flag table size mismatch".into());
            }
            // Tree edges join primal vertices, dual-tree edges join dual
            // vertices, quad edges are mixed.
            for h in map.halves() {
                if h % 2 != 0 {
                    continue;
                }
                let (u, w) = (map.origin(h) as usize, map.head(h) as usize);
                match edge_class.get((h / 2) as usize) {
                    Some(EdgeClass::Tree) => {
                        if !primal[u] || !primal[w] {
                            return Some(format!("tree edge {h} with non-primal endpoint"));
                        }
                    }
                    Some(EdgeClass::DualTree) => {
                        if primal[u] || primal[w] {
                            return Some(format!("dual tree edge {h} with primal endpoint"));
                        }
                    }
                    Some(EdgeClass::Quad) => {
                        if primal[u] == primal[w] {
                            return Some(format!("quad edge {h} with same-parity endpoints"));
                        }
                    }
                    None => return Some(format!("edge {} missing class", h / 2)),
                }
            }
            // Tree edges are acyclic (a sub-forest of the spanning tree), and
            // symmetrically for the dual tree.
            for class in [EdgeClass::Tree, EdgeClass::DualTree] {
                let mut dsu = Dsu::new(map.n_vertices);
                for h in map.halves() {
                    if h % 2 == 0 && edge_class[(h / 2) as usize] == class
                        && !dsu.union(map.origin(h) as usize, map.head(h) as usize) {
                            return Some(format!("{class:?} edges contain a cycle"));
                        }
                }
            }
            None
        }
        Some(Decoration::Percolation { color }) => {
            if color.len() != map.n_vertices {
                return Some("color table size mismatch".into());
            }
            None
        }
        Some(Decoration::Bipolar { up, source, sink }) => {
            // Orientation is acyclic and only the poles are source/sink.
            let mut out_deg = vec![0usize; map.n_vertices];
            let mut in_deg = vec![0usize; map.n_vertices];
            let mut arcs: Vec<(u32, u32)> = Vec::new();
            for h in map.halves() {
                if h % 2 != 0 {
                    continue;
                }
                let u = up[(h / 2) as usize];
                if !map.is_alive(u) || (u != h && u != map.twin(h)) {
                    return Some(format!("edge {} has no valid orientation", h / 2));
                }
                let (a, b) = (map.origin(u), map.head(u));
                out_deg[a as usize] += 1;
                in_deg[b as usize] += 1;
                arcs.push((a, b));
            }
            for v in 0..map.n_vertices {
                let v32 = v as u32;
                if out_deg[v] == 0 && v32 != *sink {
                    return Some(format!("non-sink vertex {v} has no outgoing edge"));
                }
                if in_deg[v] == 0 && v32 != *source {
                    return Some(format!("non-source vertex {v} has no incoming edge"));
                }
            }
            if toposort_ok(map.n_vertices, &arcs) {
                None
            } else {
                Some("orientation has a directed cycle".into())
            }
        }
        Some(Decoration::Schnyder { color, up, outer }) => {
            // Each inner vertex has out-degree exactly 3, one edge of each
            // color, with direction read from the stored directed halves.
            let mut per_vertex: HashMap<u32, Vec<WoodColor>> = HashMap::new();
            for h in map.halves() {
                if h != up[(h / 2) as usize] {
                    continue;
                }
                if let Some(c) = color[(h / 2) as usize] {
                    per_vertex.entry(map.origin(h)).or_default().push(c);
                }
            }
            for v in 0..map.n_vertices as u32 {
                if outer.contains(&v) {
                    continue;
                }
                let colors = per_vertex.get(&v).cloned().unwrap_or_default();
                if colors.len() != 3 {
                    return Some(format!("inner vertex {v} has out-degree {}", colors.len()));
                }
                for c in [WoodColor::Blue, WoodColor::Red, WoodColor::Green] {
                    if !colors.contains(&c) {
                        return Some(format!("inner vertex {v} missing out-color {c:?}"));
                    }
                }
            }
            None
        }
    }
}

fn toposort_ok(n: usize, arcs: &[(u32, u32)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, b) in arcs {
        adj[a as usize].push(b as usize);
        indeg[b as usize] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    seen == n
}

/// Union-find over vertex slots.
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Mutable half-edge assembler used by the sewing procedures. Vertices are
/// raw ids merged through a union-find; faces are declared by explicit
/// cycles; the external face is closed at seal time.
pub struct MapBuilder {
    twin: Vec<Half>,
    next: Vec<Half>,
    origin: Vec<u32>,
    alive: Vec<bool>,
    in_face: Vec<bool>,
    /// Bounded-face id per half once captured.
    face_tag: Vec<u32>,
    n_bounded_faces: u32,
    dsu: Dsu,
    n_raw_vertices: usize,
}

impl MapBuilder {
    pub fn new() -> Self {
        MapBuilder {
            twin: Vec::new(),
            next: Vec::new(),
            origin: Vec::new(),
            alive: Vec::new(),
            in_face: Vec::new(),
            face_tag: Vec::new(),
            n_bounded_faces: 0,
            dsu: Dsu::new(0),
            n_raw_vertices: 0,
        }
    }

    pub fn new_vertex(&mut self) -> u32 {
        self.dsu.parent.push(self.n_raw_vertices);
        self.n_raw_vertices += 1;
        (self.n_raw_vertices - 1) as u32
    }

    /// Allocate a twin pair `u -> v` and `v -> u`; returns the `u -> v` half.
    pub fn new_edge(&mut self, u: u32, v: u32) -> Half {
        let h = self.twin.len() as Half;
        self.twin.push(h + 1);
        self.twin.push(h);
        self.next.push(NIL);
        self.next.push(NIL);
        self.origin.push(u);
        self.origin.push(v);
        self.alive.push(true);
        self.alive.push(true);
        self.in_face.push(false);
        self.in_face.push(false);
        self.face_tag.push(NIL);
        self.face_tag.push(NIL);
        h
    }

    pub fn twin(&self, h: Half) -> Half {
        self.twin[h as usize]
    }

    pub fn origin_raw(&self, h: Half) -> u32 {
        self.origin[h as usize]
    }

    pub fn head_raw(&self, h: Half) -> u32 {
        self.origin[self.twin[h as usize] as usize]
    }

    pub fn resolve(&mut self, v: u32) -> u32 {
        self.dsu.find(v as usize) as u32
    }

    /// Declare a bounded face from its counterclockwise half-edge cycle.
    /// Returns the face tag.
    pub fn make_face(&mut self, cycle: &[Half]) -> u32 {
        let tag = self.n_bounded_faces;
        self.n_bounded_faces += 1;
        for k in 0..cycle.len() {
            let h = cycle[k];
            debug_assert!(self.alive[h as usize] && !self.in_face[h as usize]);
            self.next[h as usize] = cycle[(k + 1) % cycle.len()];
            self.in_face[h as usize] = true;
            self.face_tag[h as usize] = tag;
        }
        tag
    }

    /// Bounded face tag behind a half (NIL if uncaptured).
    pub fn face_tag_of(&self, h: Half) -> u32 {
        self.face_tag[h as usize]
    }

    /// Identify two edges by killing the halves `kill_a`, `kill_b` and
    /// re-twinning their partners. Callers merge endpoint vertices themselves.
    pub fn retwin(&mut self, kill_a: Half, kill_b: Half) {
        let keep_a = self.twin[kill_a as usize];
        let keep_b = self.twin[kill_b as usize];
        self.alive[kill_a as usize] = false;
        self.alive[kill_b as usize] = false;
        self.twin[keep_a as usize] = keep_b;
        self.twin[keep_b as usize] = keep_a;
    }

    pub fn kill(&mut self, h: Half) {
        self.alive[h as usize] = false;
    }

    pub fn merge_vertices(&mut self, a: u32, b: u32) {
        self.dsu.union(a as usize, b as usize);
    }

    pub fn is_alive(&self, h: Half) -> bool {
        self.alive[h as usize]
    }

    /// Seal the map. `external_cycle` lists the still-uncaptured halves of
    /// the external face in cycle order (each half's head must be the next
    /// half's origin after vertex merges); pass `None` for sphere maps whose
    /// faces are all declared.
    pub fn seal(
        self,
        root: Half,
        external_cycle: Option<&[Half]>,
        decoration: Option<Decoration>,
    ) -> Result<PlanarMap> {
        Ok(self.seal_with_ids(root, external_cycle, decoration)?.0)
    }

    /// Like [`seal`](Self::seal), but also returns the raw-to-compact vertex
    /// id translation (NIL for raw ids that no alive half references).
    pub fn seal_with_ids(
        mut self,
        root: Half,
        external_cycle: Option<&[Half]>,
        decoration: Option<Decoration>,
    ) -> Result<(PlanarMap, Vec<u32>)> {
        let mut external_face = None;
        if let Some(cycle) = external_cycle {
            let tag = self.n_bounded_faces;
            self.n_bounded_faces += 1;
            external_face = Some(tag);
            for k in 0..cycle.len() {
                let h = cycle[k];
                if !self.alive[h as usize] {
                    return Err(Error::map(format!("external cycle uses dead half {h}")));
                }
                if self.in_face[h as usize] {
                    return Err(Error::map(format!("external cycle reuses captured half {h}")));
                }
                self.next[h as usize] = cycle[(k + 1) % cycle.len()];
                self.face_tag[h as usize] = tag;
            }
            for &h in cycle {
                self.in_face[h as usize] = true;
            }
        }
        // Every alive half must now be in a face.
        for h in 0..self.twin.len() {
            if self.alive[h] && !self.in_face[h] {
                return Err(Error::map(format!("half {h} captured by no face")));
            }
        }
        // Resolve merged vertices to compact ids, preserving raw id order so
        // callers can rely on their allocation order (e.g. primal-first).
        let mut roots: Vec<usize> = Vec::new();
        for h in 0..self.origin.len() {
            if self.alive[h] {
                roots.push(self.dsu.find(self.origin[h] as usize));
            }
        }
        roots.sort_unstable();
        roots.dedup();
        let compact: HashMap<usize, u32> =
            roots.iter().enumerate().map(|(k, &r)| (r, k as u32)).collect();
        let mut origin = vec![0u32; self.origin.len()];
        for h in 0..self.origin.len() {
            if self.alive[h] {
                origin[h] = compact[&self.dsu.find(self.origin[h] as usize)];
            }
        }
        let n_vertices = compact.len();
        let mut vertex_id = vec![NIL; self.n_raw_vertices];
        for (raw, slot) in vertex_id.iter_mut().enumerate() {
            if let Some(&c) = compact.get(&self.dsu.find(raw)) {
                *slot = c;
            }
        }
        // prev from next.
        let mut prev = vec![NIL; self.next.len()];
        for h in 0..self.next.len() {
            if self.alive[h] {
                let n = self.next[h];
                if n == NIL || !self.alive[n as usize] {
                    return Err(Error::map(format!("half {h} has dead or missing next")));
                }
                prev[n as usize] = h as Half;
            }
        }
        // Face ids in declared-tag order, so bounded faces keep their
        // declaration indices (gaps from killed faces compact away; the
        // external face, declared last, sorts last).
        let mut alive_tags: Vec<u32> = Vec::new();
        for h in 0..self.next.len() {
            if self.alive[h] {
                let tag = self.face_tag[h];
                if tag == NIL {
                    return Err(Error::map(format!("half {h} missing face tag")));
                }
                alive_tags.push(tag);
            }
        }
        alive_tags.sort_unstable();
        alive_tags.dedup();
        let face_ids: HashMap<u32, u32> =
            alive_tags.iter().enumerate().map(|(k, &t)| (t, k as u32)).collect();
        let mut face_of = vec![NIL; self.next.len()];
        for h in 0..self.next.len() {
            if self.alive[h] {
                face_of[h] = face_ids[&self.face_tag[h]];
            }
        }
        let n_faces = face_ids.len();
        let external_face = external_face.map(|t| face_ids[&t]);
        if !self.alive[root as usize] {
            return Err(Error::map("root half is dead".to_string()));
        }
        Ok((
            PlanarMap {
                twin: self.twin,
                next: self.next,
                prev,
                origin,
                alive: self.alive,
                face_of,
                n_vertices,
                n_faces,
                root,
                external_face,
                decoration,
            },
            vertex_id,
        ))
    }
}

impl Default for MapBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Canonical code of a rooted combinatorial map: half-edges are relabeled in
/// BFS discovery order over the `twin`/`next` generators starting from the
/// root, and the permutations are emitted in that labeling. Two rooted maps
/// are isomorphic iff their codes are equal.
pub fn canonical_code(map: &PlanarMap, root: Half) -> Vec<u32> {
    let mut label = HashMap::new();
    let mut order = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    label.insert(root, 0u32);
    order.push(root);
    queue.push_back(root);
    while let Some(h) = queue.pop_front() {
        for g in [map.twin(h), map.next(h)] {
            if !label.contains_key(&g) {
                let l = label.len() as u32;
                label.insert(g, l);
                order.push(g);
                queue.push_back(g);
            }
        }
    }
    let mut code = Vec::with_capacity(order.len() * 2);
    for &h in &order {
        code.push(label[&map.twin(h)]);
        code.push(label[&map.next(h)]);
    }
    code
}

/// Rooted-map isomorphism via canonical codes.
pub fn isomorphic_rooted(a: &PlanarMap, root_a: Half, b: &PlanarMap, root_b: Half) -> bool {
    canonical_code(a, root_a) == canonical_code(b, root_b)
}

/// The dual map: faces and vertices exchange roles. Darts are preserved;
/// `dual.next = next o twin`, so applying `dual` twice gives back the
/// original arrays.
pub fn dual(map: &PlanarMap) -> PlanarMap {
    let n = map.twin.len();
    let mut next = vec![NIL; n];
    let mut prev = vec![NIL; n];
    let mut origin = vec![0u32; n];
    for h in 0..n as u32 {
        if !map.is_alive(h) {
            continue;
        }
        let nh = map.next(map.twin(h));
        next[h as usize] = nh;
        prev[nh as usize] = h;
        origin[h as usize] = map.face(h);
    }
    // Faces of the dual are orbits of dual-next; their count equals the
    // primal vertex count.
    let mut face_of = vec![NIL; n];
    let mut n_faces = 0u32;
    for h in 0..n as u32 {
        if !map.is_alive(h) || face_of[h as usize] != NIL {
            continue;
        }
        let mut cur = h;
        loop {
            face_of[cur as usize] = n_faces;
            cur = next[cur as usize];
            if cur == h {
                break;
            }
        }
        n_faces += 1;
    }
    PlanarMap {
        twin: map.twin.clone(),
        next,
        prev,
        origin,
        alive: map.alive.clone(),
        face_of,
        n_vertices: map.n_faces,
        n_faces: n_faces as usize,
        root: map.root,
        external_face: None,
        decoration: None,
    }
}

/// The radial quadrangulation: vertices are the primal vertices plus the
/// primal faces, one edge per vertex-face incidence (corner), one
/// quadrilateral face per primal edge.
pub fn radial_quadrangulation(map: &PlanarMap) -> PlanarMap {
    let mut b = MapBuilder::new();
    // Vertex ids: primal vertices first, then faces.
    for _ in 0..(map.n_vertices + map.n_faces) {
        b.new_vertex();
    }
    // One radial edge per alive dart: origin(d) -> face(d).
    let mut radial = HashMap::new();
    for d in map.halves() {
        let h = b.new_edge(map.origin(d), map.n_vertices as u32 + map.face(d));
        radial.insert(d, h);
    }
    // One quad per primal edge id, taken from its even alive half.
    let mut root_half = NIL;
    for d in map.halves() {
        if d > map.twin(d) {
            continue;
        }
        let t = map.twin(d);
        let cycle = [
            radial[&d],
            b.twin(radial[&map.next(d)]),
            radial[&t],
            b.twin(radial[&map.next(t)]),
        ];
        b.make_face(&cycle);
        if d == map.root || t == map.root {
            root_half = radial[&map.root];
        }
    }
    if root_half == NIL {
        root_half = 0;
    }
    b.seal(root_half, None, None).expect("radial quadrangulation seal")
}

/// What a window index points at in the sewing bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaTarget {
    Vertex(u32),
    Face(u32),
}

/// The index correspondences of a window map: `phi` sends map vertices to
/// window indices, `psi` sends indices to vertices. Both fix the root:
/// `phi(root_vertex) = 0` and `psi(0) = root_vertex`. Bijection modules that
/// track a marked edge or a vertex-or-face pointer per index also fill
/// `lambda` / `lambda_tilde`.
#[derive(Clone, Debug)]
pub struct IndexMaps {
    pub window: crate::walk::Window,
    /// Vertex (compact id) to window index; not injective.
    pub phi: HashMap<u32, i64>,
    /// Window index to vertex, `psi[0]` at `window.lo`.
    pub psi: Vec<u32>,
    pub root_vertex: u32,
    /// Window index to edge id (half / 2), when the bijection marks edges.
    pub lambda: Option<Vec<u32>>,
    /// Window index to vertex-or-face, when the bijection tracks it.
    pub lambda_tilde: Option<Vec<LambdaTarget>>,
}

impl IndexMaps {
    pub fn phi_of(&self, v: u32) -> Option<i64> {
        self.phi.get(&v).copied()
    }

    pub fn psi_of(&self, i: i64) -> u32 {
        self.psi[(i - self.window.lo) as usize]
    }
}

/// Graph isomorphism modulo multiplicity: `f` (a total vertex bijection given
/// as pairs) preserves adjacency in both directions, ignoring edge
/// multiplicity. Inputs are simple-adjacency sets.
pub fn graph_isomorphic_mod_multiplicity(
    adj1: &[Vec<u32>],
    adj2: &[Vec<u32>],
    bijection: &[(u32, u32)],
) -> Result<bool> {
    if bijection.len() != adj1.len() || adj1.len() != adj2.len() {
        return Err(Error::domain("bijection is not total on both vertex sets"));
    }
    let mut fwd = vec![NIL; adj1.len()];
    let mut seen = vec![false; adj2.len()];
    for &(a, b) in bijection {
        if fwd[a as usize] != NIL || seen[b as usize] {
            return Err(Error::domain("bijection is not injective"));
        }
        fwd[a as usize] = b;
        seen[b as usize] = true;
    }
    for (u, nbrs) in adj1.iter().enumerate() {
        let mut image: Vec<u32> = nbrs.iter().map(|&v| fwd[v as usize]).collect();
        image.sort_unstable();
        image.dedup();
        let mut target: Vec<u32> = adj2[fwd[u] as usize].clone();
        target.sort_unstable();
        target.dedup();
        if image != target {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single oriented edge: V=2, E=1, F=1.
    fn single_edge() -> PlanarMap {
        let mut b = MapBuilder::new();
        let u = b.new_vertex();
        let v = b.new_vertex();
        let h = b.new_edge(u, v);
        let t = b.twin(h);
        b.seal(h, Some(&[h, t]), None).unwrap()
    }

    /// Triangle: V=3, E=3, F=2.
    fn triangle() -> PlanarMap {
        let mut b = MapBuilder::new();
        let vs: Vec<u32> = (0..3).map(|_| b.new_vertex()).collect();
        let e01 = b.new_edge(vs[0], vs[1]);
        let e12 = b.new_edge(vs[1], vs[2]);
        let e20 = b.new_edge(vs[2], vs[0]);
        b.make_face(&[e01, e12, e20]);
        let ext = [b.twin(e20), b.twin(e12), b.twin(e01)];
        b.seal(e01, Some(&ext), None).unwrap()
    }

    #[test]
    fn single_edge_validates() {
        let m = single_edge();
        let r = validate(&m);
        assert!(r.ok(), "{:?}", r.violation);
        assert_eq!((r.vertices, r.edges, r.faces), (2, 1, 1));
    }

    #[test]
    fn triangle_counts_and_dual() {
        let m = triangle();
        let r = validate(&m);
        assert!(r.ok(), "{:?}", r.violation);
        assert_eq!((r.vertices, r.edges, r.faces), (3, 3, 2));
        let d = dual(&m);
        let rd = validate(&d);
        assert!(rd.ok(), "{:?}", rd.violation);
        assert_eq!((d.n_vertices, d.n_edges()), (2, 3));
        // Dual of the dual is the original on the nose.
        let dd = dual(&d);
        assert!(isomorphic_rooted(&dd, dd.root, &m, m.root));
    }

    #[test]
    fn twin_fixed_point_detected() {
        let mut b = MapBuilder::new();
        let u = b.new_vertex();
        let v = b.new_vertex();
        let h = b.new_edge(u, v);
        let t = b.twin(h);
        let mut m = b.seal(h, Some(&[h, t]), None).unwrap();
        m.twin[0] = 0; // corrupt
        let r = validate(&m);
        assert!(!r.ok());
        assert!(r.violation.unwrap().contains("twin involution"));
    }

    #[test]
    fn radial_of_triangle() {
        let m = triangle();
        let q = radial_quadrangulation(&m);
        let r = validate(&q);
        assert!(r.ok(), "{:?}", r.violation);
        assert_eq!(q.n_vertices, 5);
        assert_eq!(q.n_edges(), 6);
        assert_eq!(q.n_edges(), 2 * m.n_edges());
        // All faces are quadrilaterals.
        for f in 0..q.n_faces as u32 {
            assert_eq!(q.face_degree(f), 4);
        }
        // Bipartite on primal/face sides.
        for h in q.halves() {
            let u = q.origin(h) < m.n_vertices as u32;
            let w = q.head(h) < m.n_vertices as u32;
            assert_ne!(u, w);
        }
    }

    #[test]
    fn radial_of_doubled_edge() {
        // Two vertices joined by two parallel edges: 2 faces, radial has 4
        // vertices and 4 edges.
        let mut b = MapBuilder::new();
        let u = b.new_vertex();
        let v = b.new_vertex();
        let e1 = b.new_edge(u, v);
        let e2 = b.new_edge(u, v);
        b.make_face(&[e1, b.twin(e2)]);
        let ext = [e2, b.twin(e1)];
        let m = b.seal(e1, Some(&ext), None).unwrap();
        assert!(validate(&m).ok());
        let q = radial_quadrangulation(&m);
        assert!(validate(&q).ok());
        assert_eq!(q.n_vertices, 4);
        assert_eq!(q.n_edges(), 4);
    }

    #[test]
    fn iso_mod_multiplicity() {
        // Identity on a path of 3 vertices.
        let path = vec![vec![1], vec![0, 2], vec![1]];
        let id: Vec<(u32, u32)> = (0..3).map(|i| (i, i)).collect();
        assert!(graph_isomorphic_mod_multiplicity(&path, &path, &id).unwrap());
        // Doubled edge vs single edge: adjacency equal.
        let doubled = vec![vec![1, 1], vec![0, 0]];
        let single = vec![vec![1], vec![0]];
        let id2: Vec<(u32, u32)> = (0..2).map(|i| (i, i)).collect();
        assert!(graph_isomorphic_mod_multiplicity(&doubled, &single, &id2).unwrap());
        // Path vs triangle: not isomorphic under any of the 6 bijections.
        let tri = vec![vec![1, 2], vec![0, 2], vec![0, 1]];
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let bij: Vec<(u32, u32)> = (0..3).map(|i| (i as u32, p[i] as u32)).collect();
            assert!(!graph_isomorphic_mod_multiplicity(&path, &tri, &bij).unwrap());
        }
    }

    #[test]
    fn rotations_are_inverse() {
        let m = triangle();
        for h in m.halves() {
            assert_eq!(m.rot_ccw(m.rot_cw(h)), h);
            assert_eq!(m.origin(m.rot_cw(h)), m.origin(h));
        }
    }
}
