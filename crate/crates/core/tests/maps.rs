//! Map-level integration checks on sewn windows: dual involution, radial
//! edge-count identities, and the rotated orientation on the dual of a
//! bipolar map.

use mot_core::bipolar::{sew_bipolar, sew_bipolar_finite, sample_finite_walk};
use mot_core::kreweras::sew_kreweras;
use mot_core::mullin::sew_mullin;
use mot_core::pmap::{dual, isomorphic_rooted, radial_quadrangulation, validate, LambdaTarget};
use mot_core::rng::StreamRng;
use mot_core::walk::{make_distribution, sample_walk, Model, Window};

#[test]
fn dual_involution_on_sewn_maps() {
    let mut checked = 0;
    for seed in 0..50u64 {
        let n = 2 + (seed as i64 % 40);
        let d = make_distribution(Model::MullinSimple, None).unwrap();
        let st = sew_mullin(&sample_walk(&d, Window::new(-n - 1, n), seed)).unwrap();
        let dd = dual(&dual(&st.map));
        assert!(isomorphic_rooted(&dd, dd.root, &st.map, st.map.root), "mullin seed {seed}");
        checked += 1;

        let d = make_distribution(Model::Kreweras, None).unwrap();
        let st = sew_kreweras(&sample_walk(&d, Window::new(-n - 1, n), seed)).unwrap();
        let dd = dual(&dual(&st.map));
        assert!(isomorphic_rooted(&dd, dd.root, &st.map, st.map.root), "kreweras seed {seed}");
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn dual_and_radial_edge_identities() {
    for seed in 0..30u64 {
        let n = 2 + (seed as i64 % 30);
        let d = make_distribution(Model::BipolarUniform, None).unwrap();
        let st = sew_bipolar(&sample_walk(&d, Window::new(-n - 1, n), seed), &d).unwrap();
        let m = &st.map;
        let du = dual(m);
        assert_eq!(du.n_edges(), m.n_edges());
        assert_eq!(du.n_vertices, m.n_faces);
        assert_eq!(du.n_faces, m.n_vertices);
        let q = radial_quadrangulation(m);
        assert!(validate(&q).ok());
        assert_eq!(q.n_edges(), 2 * m.n_edges());
        assert_eq!(q.n_vertices, m.n_vertices + m.n_faces);
        for f in 0..q.n_faces as u32 {
            assert_eq!(q.face_degree(f), 4);
        }
    }
}

#[test]
fn rotated_dual_orientation_is_acyclic() {
    // Rotating every edge's orientation by 90 degrees orients the dual:
    // each edge points from the face on its west side to the face on its
    // east side. On the bounded faces this orientation must be acyclic, with
    // flow entering from the west outer side and leaving east.
    let d = make_distribution(Model::BipolarUniform, None).unwrap();
    let mut rng = StreamRng::new(21);
    let mut done = 0;
    while done < 60 {
        let len = 3 + rng.below(22) as usize;
        let Some(w) = sample_finite_walk(&d, len, &mut rng) else { continue };
        let st = sew_bipolar_finite(&w).unwrap();
        let m = &st.map;
        let ext = m.external_face.unwrap();
        // Arc west-face -> east-face per edge: the up half has its face on
        // the west side, the twin on the east side.
        let mut arcs = Vec::new();
        for h in m.halves() {
            if !st.is_up(h) {
                continue;
            }
            let west = m.face(h);
            let east = m.face(m.twin(h));
            if west != ext && east != ext {
                arcs.push((west, east));
            }
        }
        // Topological order over bounded faces.
        let nf = m.n_faces;
        let mut indeg = vec![0usize; nf];
        let mut adj = vec![Vec::new(); nf];
        for &(a, b) in &arcs {
            adj[a as usize].push(b as usize);
            indeg[b as usize] += 1;
        }
        let mut queue: Vec<usize> =
            (0..nf).filter(|&f| f as u32 != ext && indeg[f] == 0).collect();
        let mut seen = 0;
        while let Some(f) = queue.pop() {
            seen += 1;
            for &g in &adj[f] {
                indeg[g] -= 1;
                if indeg[g] == 0 {
                    queue.push(g);
                }
            }
        }
        assert_eq!(seen, nf - 1, "rotated dual orientation has a cycle (walk {:?})", w.values);
        done += 1;
    }
}

#[test]
fn lambda_targets_partition_by_step_kind() {
    // In the percolated model every index is either a glued vertex (c step)
    // or an added face (a/b step), and the counts add up.
    let d = make_distribution(Model::Kreweras, None).unwrap();
    for seed in 0..20u64 {
        let w = sample_walk(&d, Window::new(-51, 50), seed);
        let st = sew_kreweras(&w).unwrap();
        let mut faces = 0;
        let mut verts = 0;
        for i in st.window.iter() {
            match st.lambda_tilde_of(i) {
                LambdaTarget::Face(_) => faces += 1,
                LambdaTarget::Vertex(_) => verts += 1,
            }
        }
        let c_count = w.step_indices().filter(|&i| w.step(i) == (-1, -1)).count();
        assert_eq!(verts, c_count);
        assert_eq!(faces + verts, st.window.len());
    }
}
