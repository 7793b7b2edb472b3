//! Versioned serialization: little-endian binary formats for walks and grids
//! ("MTW1"), adjacency graphs ("MTG1"), and half-edge maps ("MTM1"); JSON for
//! small instances; sorted edge-list CSV for graphs.

use crate::pmap::PlanarMap;
use crate::structure::{AdjGraph, Provenance};
use crate::walk::{BrownianGrid, WalkPath, Window};
use crate::{Error, Result};
use std::io::{Read, Write};

const WALK_MAGIC: &[u8; 4] = b"MTW1";
const GRAPH_MAGIC: &[u8; 4] = b"MTG1";
const MAP_MAGIC: &[u8; 4] = b"MTM1";

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format("truncated input"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn put_window(out: &mut Vec<u8>, w: Window) {
    out.extend_from_slice(&w.lo.to_le_bytes());
    out.extend_from_slice(&w.hi.to_le_bytes());
}

fn get_window(c: &mut Cursor) -> Result<Window> {
    let lo = c.i64()?;
    let hi = c.i64()?;
    if lo > hi {
        return Err(Error::format(format!("bad window [{lo}, {hi}]")));
    }
    Ok(Window::new(lo, hi))
}

/// Serialize a walk to the MTW1 binary format (kind byte 0).
pub fn walk_to_bytes(walk: &WalkPath) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 16 * walk.values.len());
    out.extend_from_slice(WALK_MAGIC);
    out.push(1); // version
    out.push(0); // kind: integer walk
    put_window(&mut out, walk.window);
    out.extend_from_slice(&walk.sigma.0.to_le_bytes());
    out.extend_from_slice(&walk.sigma.1.to_le_bytes());
    out.extend_from_slice(&walk.rho.to_le_bytes());
    for &(l, r) in &walk.values {
        out.extend_from_slice(&l.to_le_bytes());
        out.extend_from_slice(&r.to_le_bytes());
    }
    out
}

pub fn walk_from_bytes(buf: &[u8]) -> Result<WalkPath> {
    let mut c = Cursor::new(buf);
    if c.take(4)? != WALK_MAGIC {
        return Err(Error::format("bad magic, expected MTW1"));
    }
    if c.u8()? != 1 || c.u8()? != 0 {
        return Err(Error::format("unsupported walk version/kind"));
    }
    let window = get_window(&mut c)?;
    let sigma = (c.f64()?, c.f64()?);
    let rho = c.f64()?;
    let mut values = Vec::with_capacity(window.len());
    for _ in 0..window.len() {
        values.push((c.i64()?, c.i64()?));
    }
    let mut w = WalkPath::from_values(window, values);
    w.sigma = sigma;
    w.rho = rho;
    Ok(w)
}

/// Serialize a Brownian grid to the MTW1 binary format (kind byte 1). Cell
/// minima are stored along with the grid values.
pub fn grid_to_bytes(grid: &BrownianGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(48 + 16 * grid.values.len());
    out.extend_from_slice(WALK_MAGIC);
    out.push(1);
    out.push(1); // kind: grid
    put_window(&mut out, grid.window);
    out.extend_from_slice(&grid.mesh.to_le_bytes());
    out.extend_from_slice(&grid.rho.to_le_bytes());
    for &(l, r) in &grid.values {
        out.extend_from_slice(&l.to_le_bytes());
        out.extend_from_slice(&r.to_le_bytes());
    }
    for &(l, r) in &grid.cell_min {
        out.extend_from_slice(&l.to_le_bytes());
        out.extend_from_slice(&r.to_le_bytes());
    }
    out
}

pub fn grid_from_bytes(buf: &[u8]) -> Result<BrownianGrid> {
    let mut c = Cursor::new(buf);
    if c.take(4)? != WALK_MAGIC {
        return Err(Error::format("bad magic, expected MTW1"));
    }
    if c.u8()? != 1 || c.u8()? != 1 {
        return Err(Error::format("unsupported grid version/kind"));
    }
    let window = get_window(&mut c)?;
    let mesh = c.u32()?;
    let rho = c.f64()?;
    let n_pts = (window.len() - 1) * mesh as usize + 1;
    let mut values = Vec::with_capacity(n_pts);
    for _ in 0..n_pts {
        values.push((c.f64()?, c.f64()?));
    }
    let mut cell_min = Vec::with_capacity(window.len() - 1);
    for _ in 0..window.len() - 1 {
        cell_min.push((c.f64()?, c.f64()?));
    }
    Ok(BrownianGrid { window, mesh, rho, values, cell_min })
}

fn tag_byte(t: Provenance) -> u8 {
    match t {
        Provenance::Consecutive => 0,
        Provenance::LMatch => 1,
        Provenance::RMatch => 2,
    }
}

fn byte_tag(b: u8) -> Result<Provenance> {
    match b {
        0 => Ok(Provenance::Consecutive),
        1 => Ok(Provenance::LMatch),
        2 => Ok(Provenance::RMatch),
        other => Err(Error::format(format!("bad provenance byte {other}"))),
    }
}

/// Serialize a graph to the MTG1 binary format.
pub fn graph_to_bytes(g: &AdjGraph) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(GRAPH_MAGIC);
    out.push(1);
    put_window(&mut out, g.window);
    out.extend_from_slice(&(g.edge_count() as u64).to_le_bytes());
    for (i, j, t, m) in g.edges() {
        out.extend_from_slice(&i.to_le_bytes());
        out.extend_from_slice(&j.to_le_bytes());
        out.push(tag_byte(t));
        out.extend_from_slice(&m.to_le_bytes());
    }
    out
}

pub fn graph_from_bytes(buf: &[u8]) -> Result<AdjGraph> {
    let mut c = Cursor::new(buf);
    if c.take(4)? != GRAPH_MAGIC {
        return Err(Error::format("bad magic, expected MTG1"));
    }
    if c.u8()? != 1 {
        return Err(Error::format("unsupported graph version"));
    }
    let window = get_window(&mut c)?;
    let n_edges = c.u64()?;
    let mut g = AdjGraph::new(window);
    for _ in 0..n_edges {
        let i = c.i64()?;
        let j = c.i64()?;
        let t = byte_tag(c.u8()?)?;
        let m = c.u32()?;
        for _ in 0..m {
            g.add_edge(i, j, t);
        }
    }
    Ok(g)
}

/// Sorted edge-list CSV: `i,j,provenance,multiplicity`.
pub fn graph_to_csv(g: &AdjGraph) -> String {
    let mut out = String::from("i,j,provenance,multiplicity\n");
    for (i, j, t, m) in g.edges() {
        let tag = match t {
            Provenance::Consecutive => "consecutive",
            Provenance::LMatch => "l-match",
            Provenance::RMatch => "r-match",
        };
        out.push_str(&format!("{i},{j},{tag},{m}\n"));
    }
    out
}

/// JSON for small instances, via serde.
pub fn walk_to_json(walk: &WalkPath) -> Result<String> {
    serde_json::to_string(walk).map_err(|e| Error::Serde(e.to_string()))
}

pub fn walk_from_json(s: &str) -> Result<WalkPath> {
    serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
}

pub fn graph_to_json(g: &AdjGraph) -> Result<String> {
    serde_json::to_string(g).map_err(|e| Error::Serde(e.to_string()))
}

/// Versioned half-edge map JSON: the permutation arrays plus the root.
pub fn map_to_json(map: &PlanarMap) -> Result<String> {
    let wrapped = serde_json::json!({
        "format": "mot-map",
        "version": 1,
        "map": map,
    });
    serde_json::to_string(&wrapped).map_err(|e| Error::Serde(e.to_string()))
}

pub fn map_from_json(s: &str) -> Result<PlanarMap> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
    if v["format"] != "mot-map" || v["version"] != 1 {
        return Err(Error::format("not a version-1 mot-map document"));
    }
    serde_json::from_value(v["map"].clone()).map_err(|e| Error::Serde(e.to_string()))
}

/// Compact binary twin of the map JSON, for large windows.
pub fn map_to_bytes(map: &PlanarMap) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAP_MAGIC);
    out.push(1);
    let json = serde_json::to_vec(map).expect("map serializes");
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out
}

pub fn map_from_bytes(buf: &[u8]) -> Result<PlanarMap> {
    let mut c = Cursor::new(buf);
    if c.take(4)? != MAP_MAGIC {
        return Err(Error::format("bad magic, expected MTM1"));
    }
    if c.u8()? != 1 {
        return Err(Error::format("unsupported map version"));
    }
    let len = c.u64()? as usize;
    let body = c.take(len)?;
    serde_json::from_slice(body).map_err(|e| Error::Serde(e.to_string()))
}

pub fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    let mut f = std::fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    Ok(buf)
}

/// FNV-1a 64-bit hash, used to fingerprint manifests and artifacts.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{build_h_graph, Variant};
    use crate::walk::{bridge_couple, make_distribution, sample_walk, Model};
    use proptest::prelude::*;

    #[test]
    fn walk_binary_round_trip() {
        let d = make_distribution(Model::BipolarUniform, None).unwrap();
        let w = sample_walk(&d, Window::symmetric(40), 11);
        let bytes = walk_to_bytes(&w);
        let back = walk_from_bytes(&bytes).unwrap();
        assert_eq!(back.values, w.values);
        assert_eq!(back.window, w.window);
        // JSON too.
        let back = walk_from_json(&walk_to_json(&w).unwrap()).unwrap();
        assert_eq!(back.values, w.values);
    }

    #[test]
    fn grid_and_graph_round_trip() {
        let d = make_distribution(Model::MullinSimple, None).unwrap();
        let w = sample_walk(&d, Window::symmetric(30), 3);
        let g = bridge_couple(&w, 4, 5).unwrap();
        let back = grid_from_bytes(&grid_to_bytes(&g)).unwrap();
        assert_eq!(back.values, g.values);
        assert_eq!(back.cell_min, g.cell_min);
        let h = build_h_graph(&w, Variant::Mullin, Window::symmetric(29)).unwrap();
        let back = graph_from_bytes(&graph_to_bytes(&h)).unwrap();
        assert!(crate::structure::graphs_equal(&h, &back));
        let csv = graph_to_csv(&h);
        assert!(csv.starts_with("i,j,provenance,multiplicity\n"));
        assert_eq!(csv.lines().count(), h.edge_count() + 1);
    }

    #[test]
    fn map_round_trip() {
        let d = make_distribution(Model::Kreweras, None).unwrap();
        let w = sample_walk(&d, Window::symmetric(20), 9);
        let state = crate::kreweras::sew_kreweras(&w).unwrap();
        let back = map_from_json(&map_to_json(&state.map).unwrap()).unwrap();
        assert_eq!(back.n_vertices, state.map.n_vertices);
        assert_eq!(back.n_faces, state.map.n_faces);
        assert!(crate::pmap::isomorphic_rooted(&back, back.root, &state.map, state.map.root));
        let back = map_from_bytes(&map_to_bytes(&state.map)).unwrap();
        assert_eq!(back.n_edges(), state.map.n_edges());
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(walk_from_bytes(b"XXXX....").is_err());
        assert!(graph_from_bytes(b"MTW1").is_err());
    }

    proptest! {
        #[test]
        fn walk_bytes_bijective(seed in 0u64..500, n in 1i64..60) {
            let d = make_distribution(Model::Kreweras, None).unwrap();
            let w = sample_walk(&d, Window::symmetric(n), seed);
            let back = walk_from_bytes(&walk_to_bytes(&w)).unwrap();
            prop_assert_eq!(back.values, w.values);
            prop_assert_eq!(back.window, w.window);
        }
    }
}
