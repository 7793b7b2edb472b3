//! Kreweras-walk sewing for site-percolated triangulations, the hat-walk
//! reduction to the Mullin sewing, contraction, and the composed index maps.
//!
//! Steps a = (1,0) and b = (0,1) each attach a triangle to the head edge; a
//! step c = (-1,-1) folds the boundary at the head, gluing the head edge to
//! the boundary edge on its left or right. The side is chosen by comparing
//! the ages of the faces behind the two candidate edges (pre-window faces
//! count as infinitely old, leftmost-oldest on ties), and the pinched vertex
//! is colored red for a left gluing, blue for a right one.

use crate::mullin::{self, RawSewing};
use crate::pmap::{
    canonical_code, Decoration, Half, IndexMaps, LambdaTarget, MapBuilder, PlanarMap, SiteColor,
    NIL,
};
use crate::walk::{Step, WalkPath, Window};
use crate::{Error, Result};
use std::collections::{HashMap, HashSet, VecDeque};

const A: Step = (1, 0);
const B: Step = (0, 1);
const C: Step = (-1, -1);

/// Which side a c-step glued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlueSide {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct GlueRec {
    pub side: GlueSide,
    /// The two external halves identified (dead after the fold).
    pub killed: (Half, Half),
    /// Smaller surviving half of the glued edge.
    pub glued_half: Half,
    /// Raw id of the pinched (colored) vertex.
    pub pinched_raw: u32,
}

/// The sewn percolated window.
pub struct KrewerasState {
    pub map: PlanarMap,
    /// Step indices consumed; position 0 = window.lo.
    pub window: Window,
    /// Per index: the face (builder tag) or pinched vertex it contributed.
    pub lambda_tilde: Vec<LambdaTarget>,
    /// Head edge external half recorded after each step: entry k holds the
    /// marked edge of index k (some treatments index the same sequence with
    /// a +1 shift, marking entry k-1 as the edge of k; the shift constant
    /// here is 0). The recorded half may die in a later fold;
    /// [`KrewerasState::head_edge_half`] resolves.
    pub heads: Vec<Half>,
    /// Gluing log, one entry per c step in order.
    pub glue_log: Vec<GlueRec>,
    /// Vertex colors by compact id.
    pub colors: Vec<SiteColor>,
    /// Root vertex: tail of the head edge after step -1.
    pub root_vertex: u32,
    /// Net frontier length changes per step, for the bookkeeping invariant.
    pub frontier_log: Vec<(i64, i64)>,
}

impl KrewerasState {
    pub fn lambda_tilde_of(&self, i: i64) -> LambdaTarget {
        self.lambda_tilde[(i - self.window.lo) as usize]
    }

    pub fn head_at(&self, i: i64) -> Half {
        self.heads[(i - self.window.lo) as usize]
    }

    /// An alive half of the head edge recorded at step `i`. A fold kills the
    /// external side but leaves its twin pointer at the half that inherited
    /// the edge, so following twins resolves through any chain of
    /// identifications.
    pub fn head_edge_half(&self, i: i64) -> Half {
        let mut h = self.head_at(i);
        for _ in 0..64 {
            if self.map.is_alive(h) {
                return h;
            }
            h = self.map.twin(h);
        }
        panic!("unresolvable head edge at step {i}");
    }
}

struct KrewSewer {
    b: MapBuilder,
    left: Vec<Half>,
    right: Vec<Half>,
    head: Half,
    baseline: VecDeque<Half>,
    /// Creation step per bounded face tag.
    face_step: Vec<i64>,
    color_raw: HashMap<u32, SiteColor>,
}

impl KrewSewer {
    fn new() -> Self {
        let mut b = MapBuilder::new();
        let p = b.new_vertex();
        let d = b.new_vertex();
        let e0 = b.new_edge(p, d);
        let baseline = VecDeque::from([b.twin(e0)]);
        let _ = (p, d);
        KrewSewer {
            b,
            left: Vec::new(),
            right: Vec::new(),
            head: e0,
            baseline,
            face_step: Vec::new(),
            color_raw: HashMap::new(),
        }
    }

    fn take_left(&mut self) -> Half {
        if let Some(h) = self.left.pop() {
            return h;
        }
        // With the left stack empty, the pre-window boundary attaches at the
        // head's left endpoint (which may be a vertex merged by earlier folds).
        let anchor = self.b.origin_raw(self.head);
        let x = self.b.new_vertex();
        let e = self.b.new_edge(x, anchor);
        self.baseline.push_front(self.b.twin(e));
        e
    }

    fn take_right(&mut self) -> Half {
        if let Some(h) = self.right.pop() {
            return h;
        }
        let anchor = self.b.head_raw(self.head);
        let y = self.b.new_vertex();
        let e = self.b.new_edge(anchor, y);
        self.baseline.push_back(self.b.twin(e));
        e
    }

    /// Age of the face behind a frontier edge: its creation step, None for
    /// pre-window (baseline) faces.
    fn age_behind(&self, ext: Half) -> Option<i64> {
        let tag = self.b.face_tag_of(self.b.twin(ext));
        if tag == NIL {
            None
        } else {
            Some(self.face_step[tag as usize])
        }
    }

    fn external_cycle(&self) -> Vec<Half> {
        let mut cycle: Vec<Half> = self.left.clone();
        cycle.push(self.head);
        cycle.extend(self.right.iter().rev());
        cycle.extend(self.baseline.iter().rev());
        cycle
    }
}

/// Follow (possibly stale) twin pointers from a dead half to the alive half
/// that inherited its edge through retwinning.
fn resolve_alive(b: &MapBuilder, mut h: Half) -> Half {
    for _ in 0..64 {
        if b.is_alive(h) {
            return h;
        }
        h = b.twin(h);
    }
    panic!("unresolvable half {h}");
}

/// Pre-window faces are older than anything in-window; between two pre-window
/// faces the left one counts as older.
fn left_is_older(age_l: Option<i64>, age_r: Option<i64>) -> bool {
    match (age_l, age_r) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(l), Some(r)) => l < r,
    }
}

/// Run the percolation sewing over the walk's increments (steps a, b, c).
/// Step `i` uses the increment at index `i`; the window must contain -1 and 0
/// so the root edge is defined.
pub fn sew_kreweras(walk: &WalkPath) -> Result<KrewerasState> {
    let window = Window::new(walk.window.lo + 1, walk.window.hi);
    if !window.contains(0) || !window.contains(-1) {
        return Err(Error::domain("step window must contain -1 and 0"));
    }
    let mut s = KrewSewer::new();
    let mut lambda_tilde = Vec::with_capacity(window.len());
    let mut heads = Vec::with_capacity(window.len());
    let mut glue_log = Vec::new();
    let mut frontier_log = Vec::with_capacity(window.len());
    for i in walk.step_indices() {
        let step = walk.step(i);
        let old_head = s.head;
        match step {
            A | B => {
                let u = s.b.origin_raw(old_head);
                let w = s.b.head_raw(old_head);
                let apex = s.b.new_vertex();
                let er = s.b.new_edge(w, apex);
                let al = s.b.new_edge(apex, u);
                let tag = s.b.make_face(&[old_head, er, al]);
                s.face_step.push(i);
                debug_assert_eq!(tag as usize + 1, s.face_step.len());
                if step == A {
                    s.left.push(s.b.twin(al));
                    s.head = s.b.twin(er);
                    frontier_log.push((1, 0));
                } else {
                    s.right.push(s.b.twin(er));
                    s.head = s.b.twin(al);
                    frontier_log.push((0, 1));
                }
                lambda_tilde.push(LambdaTarget::Face(tag));
            }
            C => {
                let e_l = s.take_left();
                let e_r = s.take_right();
                let glue_left = left_is_older(s.age_behind(e_l), s.age_behind(e_r));
                let (consumed, new_head, side) =
                    if glue_left { (e_l, e_r, GlueSide::Left) } else { (e_r, e_l, GlueSide::Right) };
                // Fold the head onto the consumed edge: the shared endpoint is
                // pinched and colored, the outer endpoints merge.
                let (pinched, outer_a, outer_b) = match side {
                    GlueSide::Left => {
                        (s.b.origin_raw(old_head), s.b.origin_raw(consumed), s.b.head_raw(old_head))
                    }
                    GlueSide::Right => {
                        (s.b.head_raw(old_head), s.b.head_raw(consumed), s.b.origin_raw(old_head))
                    }
                };
                s.b.merge_vertices(outer_a, outer_b);
                let keep_cons = s.b.twin(consumed);
                let keep_head = s.b.twin(old_head);
                s.b.retwin(consumed, old_head);
                let color = if side == GlueSide::Left { SiteColor::Red } else { SiteColor::Blue };
                s.color_raw.insert(pinched, color);
                s.head = new_head;
                glue_log.push(GlueRec {
                    side,
                    killed: (consumed, old_head),
                    glued_half: keep_cons.min(keep_head),
                    pinched_raw: pinched,
                });
                lambda_tilde.push(LambdaTarget::Vertex(pinched));
                frontier_log.push((-1, -1));
            }
            other => {
                return Err(Error::domain(format!("step {other:?} at {i} is not a Kreweras step")));
            }
        }
        heads.push(s.head);
    }
    // Root edge: the head after step -1; its tail is the recorded origin.
    let root_rec = heads[(-1 - window.lo) as usize];
    let root_raw_tail = s.b.origin_raw(root_rec);
    let root_half = resolve_alive(&s.b, root_rec);
    let ext = s.external_cycle();
    let color_raw = std::mem::take(&mut s.color_raw);
    let (map, vertex_id) = s.b.seal_with_ids(root_half, Some(&ext), None)?;
    let mut colors = vec![SiteColor::Undetermined; map.n_vertices];
    for (raw, c) in color_raw {
        let v = vertex_id[raw as usize];
        if v != NIL {
            colors[v as usize] = c;
        }
    }
    let mut map = map;
    map.decoration = Some(Decoration::Percolation { color: colors.clone() });
    let lambda_tilde = lambda_tilde
        .into_iter()
        .map(|t| match t {
            LambdaTarget::Vertex(raw) => LambdaTarget::Vertex(vertex_id[raw as usize]),
            f => f,
        })
        .collect();
    let root_vertex = vertex_id[root_raw_tail as usize];
    Ok(KrewerasState {
        map,
        window,
        lambda_tilde,
        heads,
        glue_log,
        colors,
        root_vertex,
        frontier_log,
    })
}

/// Read the walk back off the sewn window. A pinched vertex means a c step.
/// For a face step, the previous head edge is the entry side of the triangle;
/// the cycle runs [entry, right, left], the head is the right side for a and
/// the left side for b, so the entry is `prev` of the head's interior side
/// for a and `next` of it for b.
pub fn extract_walk_kreweras(state: &KrewerasState) -> WalkPath {
    let lo = state.window.lo - 1;
    let window = Window::new(lo, state.window.hi);
    let mut steps = Vec::with_capacity(state.window.len());
    for i in state.window.iter() {
        match state.lambda_tilde_of(i) {
            LambdaTarget::Vertex(_) => steps.push(C),
            LambdaTarget::Face(_) => {
                // The initial edge is allocated first, so its external half
                // is 0; later heads are recorded per step.
                let prev_ext = if i == state.window.lo { 0 } else { state.head_at(i - 1) };
                let interior = state.head_at(i) ^ 1;
                if state.map.prev(interior) == prev_ext {
                    steps.push(A);
                } else {
                    debug_assert_eq!(state.map.next(interior), prev_ext);
                    steps.push(B);
                }
            }
        }
    }
    let mut values = vec![(0i64, 0i64); window.len()];
    for (k, &(dl, dr)) in steps.iter().enumerate() {
        values[k + 1] = (values[k].0 + dl, values[k].1 + dr);
    }
    let off = values[(0 - lo) as usize];
    for v in &mut values {
        *v = (v.0 - off.0, v.1 - off.1);
    }
    let mut walk = WalkPath::from_values(window, values);
    walk.sigma = ((2.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
    walk.rho = 0.5;
    walk
}

/// The hat transform: each c step becomes -a then -b; `alpha_hat` maps
/// original indices to hat indices and `alpha` is its monotone left inverse.
pub struct HatTransform {
    pub original_window: Window,
    pub hat_walk: WalkPath,
    alpha_hat: Vec<i64>,
    /// Block width per original index: 2 for c steps, else 1.
    width: Vec<i64>,
}

impl HatTransform {
    pub fn alpha_hat(&self, k: i64) -> i64 {
        self.alpha_hat[(k - self.original_window.lo) as usize]
    }

    /// Last hat index of the block of original step `k`.
    pub fn block_end(&self, k: i64) -> i64 {
        self.alpha_hat(k) + self.width[(k - self.original_window.lo) as usize] - 1
    }

    /// The original step whose block contains hat index `j`.
    pub fn alpha(&self, j: i64) -> i64 {
        let w = &self.original_window;
        let (mut lo, mut hi) = (w.lo, w.hi);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.block_end(mid) < j {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `(n_minus, n_plus)`: the hat step window is `[-n_minus, n_plus]`.
    pub fn hat_bounds(&self) -> (i64, i64) {
        (-self.alpha_hat(self.original_window.lo), self.block_end(self.original_window.hi))
    }
}

/// Build the hat walk of a Kreweras walk, anchored so the hat value at the
/// end of block 0 equals the original value at index 0.
pub fn hat_transform(walk: &WalkPath) -> Result<HatTransform> {
    let s_window = Window::new(walk.window.lo + 1, walk.window.hi);
    if !s_window.contains(0) {
        return Err(Error::domain("window must contain step index 0"));
    }
    let steps: Vec<Step> = walk.step_indices().map(|i| walk.step(i)).collect();
    for (k, s) in steps.iter().enumerate() {
        if ![A, B, C].contains(s) {
            return Err(Error::domain(format!("step {s:?} at offset {k} is not a Kreweras step")));
        }
    }
    let is_c = |k: i64| steps[(k - s_window.lo) as usize] == C;
    let mut alpha_hat = Vec::with_capacity(s_window.len());
    let mut width = Vec::with_capacity(s_window.len());
    for k in s_window.iter() {
        let shift: i64 = if k >= 0 {
            (0.max(s_window.lo)..k).filter(|&j| is_c(j)).count() as i64
        } else {
            -((k..0).filter(|&j| is_c(j)).count() as i64)
        };
        alpha_hat.push(k + shift);
        width.push(if is_c(k) { 2 } else { 1 });
    }
    let hat_lo = alpha_hat[0] - 1;
    let hat_hi = alpha_hat[s_window.len() - 1] + width[s_window.len() - 1] - 1;
    let hat_window = Window::new(hat_lo, hat_hi);
    let mut hat_steps: Vec<Step> = Vec::with_capacity((hat_hi - hat_lo) as usize);
    for (pos, _) in s_window.iter().enumerate() {
        debug_assert_eq!(alpha_hat[pos], hat_lo + 1 + hat_steps.len() as i64, "blocks must tile");
        match steps[pos] {
            C => {
                hat_steps.push((-1, 0));
                hat_steps.push((0, -1));
            }
            s => hat_steps.push(s),
        }
    }
    let mut values = vec![(0i64, 0i64); hat_window.len()];
    for (k, &(dl, dr)) in hat_steps.iter().enumerate() {
        values[k + 1] = (values[k].0 + dl, values[k].1 + dr);
    }
    let pos0 = (0 - s_window.lo) as usize;
    let b0_end = alpha_hat[pos0] + width[pos0] - 1;
    let off = values[(b0_end - hat_lo) as usize];
    let orig0 = walk.value(0);
    for v in &mut values {
        *v = (v.0 - off.0 + orig0.0, v.1 - off.1 + orig0.1);
    }
    let hat_walk = WalkPath::from_values(hat_window, values);
    Ok(HatTransform { original_window: s_window, hat_walk, alpha_hat, width })
}

fn age_of(b: &MapBuilder, captured_side: Half, face_age: &HashMap<u32, i64>) -> Option<i64> {
    let t = b.face_tag_of(b.twin(captured_side));
    if t == NIL {
        None
    } else {
        face_age.get(&t).copied()
    }
}

/// Sew the hat walk, contract every c-quadrilateral, and seal. Each
/// quadrilateral consists of the -a face and the -b face of one c step; the
/// contraction removes both faces, deletes the shared middle edge, and
/// identifies the four boundary edges pairwise, oriented so common vertices
/// identify. The pairing follows the age comparison of the faces behind the
/// two side edges, exactly as in the direct sewing.
fn contract_impl(hat: &HatTransform, walk: &WalkPath) -> Result<(PlanarMap, Vec<u32>)> {
    let raw = mullin::sew_mullin_raw(&hat.hat_walk)?;
    let RawSewing { mut sewer, records, heads, window } = raw;
    let pos = |j: i64| (j - window.lo) as usize;
    let mut face_age: HashMap<u32, i64> = HashMap::new();
    for j in window.iter() {
        let t = sewer.b.face_tag_of(records[pos(j)].cycle[0]);
        face_age.insert(t, j);
    }
    for k in walk.step_indices() {
        if walk.step(k) != C {
            continue;
        }
        let j = hat.alpha_hat(k);
        // F1 at hat index j is the -a face [W, e1, g1]; F2 at j+1 is the -b
        // face [g1', E, g2], sharing the middle edge g1.
        let f1 = &records[pos(j)];
        let f2 = &records[pos(j + 1)];
        let (w_c, e1_c, g1_int) = (f1.cycle[0], f1.cycle[1], f1.cycle[2]);
        let (g1_ext, e_c, g2_int) = (f2.cycle[0], f2.cycle[1], f2.cycle[2]);
        debug_assert_eq!(g1_int ^ 1, g1_ext);
        let glue_left = left_is_older(
            age_of(&sewer.b, w_c, &face_age),
            age_of(&sewer.b, e_c, &face_age),
        );
        if glue_left {
            // Identify e1 with W, and E with g2.
            let (oa, ob) = (sewer.b.origin_raw(w_c), sewer.b.head_raw(e1_c));
            sewer.b.merge_vertices(oa, ob);
            sewer.b.retwin(e1_c, w_c);
            sewer.b.retwin(e_c, g2_int);
        } else {
            // Identify e1 with E, and W with g2.
            let (oa, ob) = (sewer.b.origin_raw(e1_c), sewer.b.head_raw(e_c));
            sewer.b.merge_vertices(oa, ob);
            sewer.b.retwin(e1_c, e_c);
            sewer.b.retwin(w_c, g2_int);
        }
        sewer.b.kill(g1_int);
        sewer.b.kill(g1_ext);
    }
    let root_rec = heads[pos(hat.block_end(-1))];
    let root = resolve_alive(&sewer.b, root_rec);
    let ext = sewer.external_cycle();
    sewer.b.seal_with_ids(root, Some(&ext), None)
}

/// Contract all c-quadrilaterals of the hat map (empty c set: the map is the
/// plain hat triangulation reassembled).
pub fn contract(hat: &HatTransform, walk: &WalkPath) -> Result<PlanarMap> {
    Ok(contract_impl(hat, walk)?.0)
}

/// Both assertions of the reduction: (i) the hat walk's H graph is the dual
/// adjacency of the hat triangulation (isomorphism modulo multiplicity under
/// the index identification); (ii) contracting every c-quadrilateral yields a
/// map isomorphic to the directly sewn percolated map.
pub fn verify_prop6(walk: &WalkPath) -> Result<(bool, bool)> {
    let hat = hat_transform(walk)?;
    let part_i = mullin::verify_prop_tri(&hat.hat_walk)?;
    let contracted = contract(&hat, walk)?;
    let direct = sew_kreweras(walk)?;
    let part_ii = canonical_code(&contracted, contracted.root)
        == canonical_code(&direct.map, direct.map.root);
    Ok((part_i, part_ii))
}

/// The composed index maps `phi = alpha o phi_hat o beta_hat` and
/// `psi = beta o psi_hat o alpha_hat`, with the arbitrary choices fixed as
/// lowest-index options and adjusted at the root so the root conditions hold.
/// Vertex ids refer to the contracted realization of the window map.
pub fn uipt_phi_psi(walk: &WalkPath) -> Result<IndexMaps> {
    let hat = hat_transform(walk)?;
    let (_mn, raw_to_mn) = contract_impl(&hat, walk)?;
    let s_window = Window::new(walk.window.lo + 1, walk.window.hi);
    let raw_hat = mullin::sew_mullin_raw(&hat.hat_walk)?;

    // psi_hat: hat face (by hat index) -> lowest raw vertex on its boundary;
    // phi_hat: raw vertex -> lowest hat index of a face containing it.
    let mut psi_hat: HashMap<i64, u32> = HashMap::new();
    let mut phi_hat: HashMap<u32, i64> = HashMap::new();
    for j in raw_hat.window.iter() {
        let rec = &raw_hat.records[(j - raw_hat.window.lo) as usize];
        let verts: Vec<u32> = rec.cycle.iter().map(|&h| raw_hat.sewer.b.origin_raw(h)).collect();
        psi_hat.insert(j, *verts.iter().min().unwrap());
        for &v in &verts {
            phi_hat.entry(v).or_insert(j);
        }
    }
    // Root adjustment: send the root through block 0.
    let hat_root_tail =
        raw_hat.sewer.b.origin_raw(raw_hat.records[(0 - raw_hat.window.lo) as usize].entry);
    phi_hat.insert(hat_root_tail, hat.alpha_hat(0));
    psi_hat.insert(hat.alpha_hat(0), hat_root_tail);

    // beta_hat: M_n vertex -> lowest raw preimage, except the root.
    let root_mn = raw_to_mn[hat_root_tail as usize];
    let mut beta_hat: HashMap<u32, u32> = HashMap::new();
    for (raw, &mn) in raw_to_mn.iter().enumerate() {
        if mn != NIL {
            beta_hat.entry(mn).or_insert(raw as u32);
        }
    }
    beta_hat.insert(root_mn, hat_root_tail);

    let mut phi: HashMap<u32, i64> = HashMap::new();
    for (&mn, &raw) in &beta_hat {
        if let Some(&j) = phi_hat.get(&raw) {
            phi.insert(mn, hat.alpha(j));
        }
    }
    let mut psi = Vec::with_capacity(s_window.len());
    for k in s_window.iter() {
        let j = hat.alpha_hat(k);
        let raw = psi_hat.get(&j).copied().unwrap_or(hat_root_tail);
        psi.push(raw_to_mn[raw as usize]);
    }
    Ok(IndexMaps { window: s_window, phi, psi, root_vertex: root_mn, lambda: None, lambda_tilde: None })
}

/// The window map as a vertex graph: edges on the boundary of a bounded face
/// plus the glued edges, with the root vertex.
pub fn kreweras_window_graph(state: &KrewerasState) -> (Vec<Vec<u32>>, u32) {
    let map = &state.map;
    let ext = map.external_face;
    let glued: HashSet<Half> = state.glue_log.iter().map(|g| g.glued_half).collect();
    let adj = map.vertex_graph(|h| {
        let bounded = Some(map.face(h)) != ext || Some(map.face(map.twin(h))) != ext;
        bounded || glued.contains(&h.min(map.twin(h)))
    });
    (adj, state.root_vertex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmap::validate;
    use crate::walk::{make_distribution, sample_walk, Model};

    fn kreweras_walk(n: i64, seed: u64) -> WalkPath {
        let d = make_distribution(Model::Kreweras, None).unwrap();
        sample_walk(&d, Window::new(-n - 1, n), seed)
    }

    fn walk_from_steps(steps: &[Step]) -> WalkPath {
        // Steps at indices -1, 0, 1, ...; anchored at index 0.
        let lo = -2i64;
        let mut values = vec![(0i64, 0i64)];
        for &(dl, dr) in steps {
            let last = *values.last().unwrap();
            values.push((last.0 + dl, last.1 + dr));
        }
        let window = Window::new(lo, lo + steps.len() as i64);
        let off = values[(0 - lo) as usize];
        for v in &mut values {
            *v = (v.0 - off.0, v.1 - off.1);
        }
        WalkPath::from_values(window, values)
    }

    #[test]
    fn single_a_step() {
        let w = walk_from_steps(&[A, A]);
        let state = sew_kreweras(&w).unwrap();
        assert!(validate(&state.map).ok());
        assert_eq!(state.glue_log.len(), 0);
        assert_eq!(state.frontier_log, vec![(1, 0), (1, 0)]);
        assert!(state.colors.iter().all(|&c| c == SiteColor::Undetermined));
    }

    #[test]
    fn abc_glues_once() {
        let w = walk_from_steps(&[A, B, C]);
        let state = sew_kreweras(&w).unwrap();
        let r = validate(&state.map);
        assert!(r.ok(), "{:?}", r.violation);
        assert_eq!(state.glue_log.len(), 1);
        let colored = state.colors.iter().filter(|&&c| c != SiteColor::Undetermined).count();
        assert_eq!(colored, 1);
        // Two bounded triangles and the external face.
        assert_eq!(state.map.n_faces, 3);
    }

    #[test]
    fn colored_count_equals_c_steps() {
        for seed in 0..60 {
            let n = 2 + (seed % 40) as i64;
            let w = kreweras_walk(n, seed);
            let state = sew_kreweras(&w).unwrap();
            let n_c = w.step_indices().filter(|&i| w.step(i) == C).count();
            assert_eq!(state.glue_log.len(), n_c);
            let colored = state.colors.iter().filter(|&&c| c != SiteColor::Undetermined).count();
            assert_eq!(colored, n_c, "seed {seed}");
            let r = validate(&state.map);
            assert!(r.ok(), "seed {seed}: {:?}", r.violation);
        }
    }

    #[test]
    fn frontier_bookkeeping_matches_walk() {
        for seed in 0..60 {
            let n = 2 + (seed % 40) as i64;
            let w = kreweras_walk(n, seed);
            let state = sew_kreweras(&w).unwrap();
            let mut acc = (0i64, 0i64);
            for (k, i) in w.step_indices().enumerate() {
                acc = (acc.0 + state.frontier_log[k].0, acc.1 + state.frontier_log[k].1);
                let expect = (w.l(i) - w.l(w.window.lo), w.r(i) - w.r(w.window.lo));
                assert_eq!(acc, expect, "seed {seed} step {i}");
            }
        }
    }

    #[test]
    fn round_trip_random_windows() {
        for seed in 0..200 {
            let n = 1 + (seed % 64) as i64;
            let w = kreweras_walk(n, seed);
            let state = sew_kreweras(&w).unwrap();
            let back = extract_walk_kreweras(&state);
            assert_eq!(back.values, w.values, "seed {seed}");
        }
    }

    #[test]
    fn hat_transform_identities() {
        // No c steps: identity time maps.
        let w = walk_from_steps(&[A, B, A]);
        let hat = hat_transform(&w).unwrap();
        for k in hat.original_window.iter() {
            assert_eq!(hat.alpha_hat(k), k);
            assert_eq!(hat.alpha(hat.alpha_hat(k)), k);
        }
        // All c: hat step count doubles.
        let w = walk_from_steps(&[C, C, C]);
        let hat = hat_transform(&w).unwrap();
        assert_eq!(hat.hat_walk.window.len() - 1, 6);
        for seed in 0..40 {
            let w = kreweras_walk(2 + (seed % 20) as i64, seed);
            let hat = hat_transform(&w).unwrap();
            let mut prev = None;
            for k in hat.original_window.iter() {
                let ah = hat.alpha_hat(k);
                if let Some(p) = prev {
                    assert!(ah > p);
                }
                prev = Some(ah);
                assert_eq!(hat.alpha(ah), k);
            }
            let (n_minus, n_plus) = hat.hat_bounds();
            assert_eq!(hat.hat_walk.window, Window::new(-n_minus - 1, n_plus));
        }
    }

    #[test]
    fn prop6_no_c_is_mullin() {
        let w = walk_from_steps(&[A, B, A, B]);
        let (i, ii) = verify_prop6(&w).unwrap();
        assert!(i && ii);
    }

    #[test]
    fn prop6_all_c() {
        let w = walk_from_steps(&[C, C, C, C]);
        let (i, ii) = verify_prop6(&w).unwrap();
        assert!(i, "part (i) failed");
        assert!(ii, "part (ii) failed");
    }

    #[test]
    fn prop6_random_windows() {
        for seed in 0..150 {
            let n = 1 + (seed % 48) as i64;
            let w = kreweras_walk(n, seed);
            let (i, ii) = verify_prop6(&w).unwrap();
            assert!(i, "part (i) seed {seed}");
            assert!(ii, "part (ii) seed {seed}");
        }
    }

    #[test]
    fn phi_psi_roots_and_ranges() {
        for seed in 0..60 {
            let n = 2 + (seed % 30) as i64;
            let w = kreweras_walk(n, seed);
            let maps = uipt_phi_psi(&w).unwrap();
            assert_eq!(maps.psi_of(0), maps.root_vertex, "seed {seed}");
            assert_eq!(maps.phi_of(maps.root_vertex), Some(0));
            let hat = hat_transform(&w).unwrap();
            let contracted = contract(&hat, &w).unwrap();
            for k in maps.window.iter() {
                let v = maps.psi_of(k);
                assert!((v as usize) < contracted.n_vertices);
                if let Some(fk) = maps.phi_of(v) {
                    assert!(maps.window.contains(fk));
                }
            }
            // phi is total on the window map's vertices.
            assert_eq!(maps.phi.len(), contracted.n_vertices);
        }
    }

    #[test]
    fn window_graph_reaches_root() {
        for seed in 0..20 {
            let w = kreweras_walk(30, seed);
            let state = sew_kreweras(&w).unwrap();
            let (adj, root) = kreweras_window_graph(&state);
            assert!(!adj[root as usize].is_empty(), "seed {seed}: isolated root");
        }
    }

    #[test]
    fn rejects_non_kreweras_steps() {
        let w = walk_from_steps(&[A, (1, 1)]);
        assert!(sew_kreweras(&w).is_err());
    }
}
