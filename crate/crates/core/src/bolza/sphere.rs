//! The octahedral triangulation of the sphere, its dual cube, and circuits in
//! the cube's 1-skeleton.
//!
//! Octahedron vertex `i` sits at `±e_axis` with `i = 2·axis + (sign < 0)`; it
//! is the centre of cube face `i` and one of the six branch points of the
//! hyperelliptic double cover. Cube vertex `j` has coordinates whose signs are
//! the bits of `j` (bit set means negative); it is the centre of octahedron
//! face `j`. Octahedron edge `k` and cube edge `k` are dual to each other.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexKind {
    Octahedral,
    Cubical,
}

/// A polyhedral subdivision of the sphere with outward counterclockwise faces.
#[derive(Debug, Clone, Serialize)]
pub struct SphereComplex {
    pub kind: ComplexKind,
    pub vertices: Vec<[f64; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Vec<usize>>,
    /// Octahedral: ramification marks on vertices. Cubical: marks on faces.
    pub ramification: Vec<bool>,
}

impl SphereComplex {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.vertices.len(), self.edges.len(), self.faces.len())
    }

    pub fn euler_characteristic(&self) -> i64 {
        let (v, e, f) = self.counts();
        v as i64 - e as i64 + f as i64
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|&[p, q]| (p, q) == (a, b) || (p, q) == (b, a))
    }

    pub fn faces_of_edge(&self, e: usize) -> Vec<usize> {
        let [a, b] = self.edges[e];
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.contains(&a) && f.contains(&b))
            .map(|(i, _)| i)
            .collect()
    }
}

/// The octahedron and the cube, with duality given by shared indices.
#[derive(Debug, Clone, Serialize)]
pub struct SpherePair {
    pub octahedral: SphereComplex,
    pub cubical: SphereComplex,
}

impl SpherePair {
    /// Cube face (= ramification point) dual to octahedron vertex `v`.
    pub fn dual_face_of_vertex(&self, v: usize) -> usize {
        v
    }
}

fn octa_vertex(i: usize) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[i / 2] = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    p
}

fn cube_vertex(j: usize) -> [f64; 3] {
    std::array::from_fn(|a| if j >> a & 1 == 1 { -1.0 } else { 1.0 })
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Order the vertex indices of a convex face counterclockwise seen from outside.
fn orient_face(mut face: Vec<usize>, pos: &[[f64; 3]]) -> Vec<usize> {
    let n = face.len() as f64;
    let c = face.iter().fold([0.0; 3], |acc, &v| {
        [acc[0] + pos[v][0] / n, acc[1] + pos[v][1] / n, acc[2] + pos[v][2] / n]
    });
    let u = sub(pos[face[0]], c);
    let w = cross(c, u);
    face.sort_by(|&a, &b| {
        let ang = |v: usize| {
            let d = sub(pos[v], c);
            dot(d, w).atan2(dot(d, u))
        };
        ang(a).total_cmp(&ang(b))
    });
    face
}

pub fn sphere_complexes() -> SpherePair {
    let ov: Vec<[f64; 3]> = (0..6).map(octa_vertex).collect();
    let cv: Vec<[f64; 3]> = (0..8).map(cube_vertex).collect();

    let mut oct_edges = Vec::new();
    for a in 0..6 {
        for b in (a + 1)..6 {
            if a / 2 != b / 2 {
                oct_edges.push([a, b]);
            }
        }
    }
    // Octahedron face j has one vertex per axis, with the signs of cube vertex j.
    let oct_faces: Vec<Vec<usize>> = (0..8)
        .map(|j| orient_face((0..3).map(|a| 2 * a + (j >> a & 1)).collect(), &ov))
        .collect();
    // Cube face i collects the cube vertices on the side of octahedron vertex i.
    let cube_faces: Vec<Vec<usize>> = (0..6)
        .map(|i| {
            let (axis, neg) = (i / 2, i % 2);
            orient_face((0..8).filter(|j| j >> axis & 1 == neg).collect(), &cv)
        })
        .collect();
    // Cube edge k is shared by the cube faces dual to octahedron edge k.
    let cube_edges: Vec<[usize; 2]> = oct_edges
        .iter()
        .map(|&[a, b]| {
            let common: Vec<usize> = cube_faces[a]
                .iter()
                .copied()
                .filter(|v| cube_faces[b].contains(v))
                .collect();
            [common[0].min(common[1]), common[0].max(common[1])]
        })
        .collect();

    SpherePair {
        octahedral: SphereComplex {
            kind: ComplexKind::Octahedral,
            vertices: ov,
            edges: oct_edges,
            faces: oct_faces,
            ramification: vec![true; 6],
        },
        cubical: SphereComplex {
            kind: ComplexKind::Cubical,
            vertices: cv,
            edges: cube_edges,
            faces: cube_faces,
            ramification: vec![true; 6],
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitType {
    Face,
    /// Boundary of two adjacent squares.
    Domino,
    /// Hexagon cut out by a great circle through no vertex.
    Petrie,
    Other,
}

impl std::fmt::Display for CircuitType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CircuitType::Face => "face",
            CircuitType::Domino => "domino",
            CircuitType::Petrie => "petrie",
            CircuitType::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitCertificate {
    /// Cube vertices in cyclic order.
    pub vertices: Vec<usize>,
    /// Cube edge indices in the same cyclic order.
    pub edges: Vec<usize>,
    pub length: usize,
    /// Cube faces (ramification points) in the counted complementary region.
    pub enclosed_faces: Vec<usize>,
    pub enclosed_ramification_count: usize,
    pub liftable: bool,
    pub circuit_type: CircuitType,
}

/// Split the cube faces into the two sides of a circuit by flood fill across
/// non-circuit edges.
fn complementary_regions(cube: &SphereComplex, edge_mask: u32) -> (Vec<usize>, Vec<usize>) {
    let nf = cube.faces.len();
    let mut side = vec![None; nf];
    side[0] = Some(false);
    let mut stack = vec![0usize];
    let face_edges: Vec<Vec<usize>> = (0..nf)
        .map(|f| {
            let face = &cube.faces[f];
            (0..face.len())
                .map(|k| cube.edge_index(face[k], face[(k + 1) % face.len()]).unwrap())
                .collect()
        })
        .collect();
    while let Some(f) = stack.pop() {
        let s = side[f].unwrap();
        for &e in &face_edges[f] {
            let g = cube.faces_of_edge(e).into_iter().find(|&g| g != f).unwrap();
            let want = if edge_mask >> e & 1 == 1 { !s } else { s };
            match side[g] {
                None => {
                    side[g] = Some(want);
                    stack.push(g);
                }
                Some(t) => debug_assert_eq!(t, want, "circuit does not separate consistently"),
            }
        }
    }
    let a = (0..nf).filter(|&f| side[f] == Some(false)).collect();
    let b = (0..nf).filter(|&f| side[f] == Some(true)).collect();
    (a, b)
}

fn classify(cube: &SphereComplex, vertices: Vec<usize>) -> CircuitCertificate {
    let n = vertices.len();
    let edges: Vec<usize> = (0..n)
        .map(|i| cube.edge_index(vertices[i], vertices[(i + 1) % n]).unwrap())
        .collect();
    let mask = edges.iter().fold(0u32, |m, &e| m | 1 << e);
    let (with_base, without_base) = complementary_regions(cube, mask);
    // Count the smaller side; on a tie, the side away from face 0.
    let enclosed_faces = if with_base.len() < without_base.len() {
        with_base
    } else {
        without_base
    };
    let count = enclosed_faces.iter().filter(|&&f| cube.ramification[f]).count();
    let circuit_type = match (n, enclosed_faces.len()) {
        (4, 1) => CircuitType::Face,
        (6, 2) => CircuitType::Domino,
        (6, 3) => CircuitType::Petrie,
        _ => CircuitType::Other,
    };
    CircuitCertificate {
        vertices,
        edges,
        length: n,
        enclosed_ramification_count: count,
        liftable: count % 2 == 0,
        enclosed_faces,
        circuit_type,
    }
}

/// All simple cycles of the cube graph with at most `max_len` edges, each
/// listed once (up to rotation and reversal), sorted by length.
pub fn enumerate_circuits(max_len: usize) -> Vec<CircuitCertificate> {
    assert!((3..=12).contains(&max_len), "max_len must lie in 3..=12");
    let pair = sphere_complexes();
    let cube = &pair.cubical;
    let nv = cube.vertices.len();
    let mut adj = vec![Vec::new(); nv];
    for &[a, b] in &cube.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    fn dfs(
        adj: &[Vec<usize>],
        start: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        for &w in &adj[v] {
            if w == start && path.len() >= 3 && path[1] < path[path.len() - 1] {
                out.push(path.clone());
            } else if w > start && !on_path[w] && path.len() < max_len {
                on_path[w] = true;
                path.push(w);
                dfs(adj, start, max_len, path, on_path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    let mut cycles = Vec::new();
    for s in 0..nv {
        let mut on_path = vec![false; nv];
        on_path[s] = true;
        dfs(&adj, s, max_len, &mut vec![s], &mut on_path, &mut cycles);
    }
    let mut out: Vec<CircuitCertificate> = cycles.into_iter().map(|c| classify(cube, c)).collect();
    out.sort_by(|a, b| a.length.cmp(&b.length).then(a.vertices.cmp(&b.vertices)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// Brute force over all 4096 edge subsets: a subset is a circuit iff it is
    /// connected and every touched vertex has degree 2.
    fn oracle_cycle_masks() -> Vec<u32> {
        let cube = sphere_complexes().cubical;
        let mut out = Vec::new();
        for mask in 1u32..(1 << 12) {
            let mut deg = [0usize; 8];
            for (e, &[a, b]) in cube.edges.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    deg[a] += 1;
                    deg[b] += 1;
                }
            }
            if deg.iter().any(|&d| d != 0 && d != 2) {
                continue;
            }
            let first = (0..8).find(|&v| deg[v] == 2).unwrap();
            let mut seen = [false; 8];
            let mut stack = vec![first];
            seen[first] = true;
            while let Some(v) = stack.pop() {
                for (e, &[a, b]) in cube.edges.iter().enumerate() {
                    if mask >> e & 1 == 1 && (a == v || b == v) {
                        let w = if a == v { b } else { a };
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
            if (0..8).all(|v| (deg[v] == 2) == seen[v]) {
                out.push(mask);
            }
        }
        out
    }

    #[test]
    fn complexes_have_expected_counts() {
        let p = sphere_complexes();
        assert_eq!(p.octahedral.counts(), (6, 12, 8));
        assert_eq!(p.cubical.counts(), (8, 12, 6));
        assert_eq!(p.octahedral.euler_characteristic(), 2);
        assert_eq!(p.cubical.euler_characteristic(), 2);
        assert_eq!(p.cubical.ramification.iter().filter(|&&r| r).count(), 6);
    }

    #[test]
    fn duality_is_consistent() {
        let p = sphere_complexes();
        for (k, &[a, b]) in p.octahedral.edges.iter().enumerate() {
            // Dual cube edge lies on both cube faces a and b.
            let [u, v] = p.cubical.edges[k];
            for f in [a, b] {
                assert!(p.cubical.faces[f].contains(&u) && p.cubical.faces[f].contains(&v));
            }
            // Its endpoints are the centres of the octahedron faces on edge k.
            let mut faces = p.octahedral.faces_of_edge(k);
            faces.sort();
            assert_eq!(faces, vec![u, v]);
        }
        // Each cube face centre is along its octahedron vertex.
        for (i, face) in p.cubical.faces.iter().enumerate() {
            let c = face.iter().fold([0.0; 3], |acc, &v| {
                let q = p.cubical.vertices[v];
                [acc[0] + q[0], acc[1] + q[1], acc[2] + q[2]]
            });
            assert!(dot(c, p.octahedral.vertices[i]) > 3.9);
        }
    }

    #[test]
    fn faces_are_outward() {
        let p = sphere_complexes();
        for cx in [&p.octahedral, &p.cubical] {
            for f in &cx.faces {
                let [a, b, c] = [f[0], f[1], f[2]].map(|i| cx.vertices[i]);
                let n = cross(sub(b, a), sub(c, a));
                assert!(dot(n, a) > 0.0);
            }
        }
    }

    #[test]
    fn enumeration_matches_subset_oracle() {
        let oracle = oracle_cycle_masks();
        let mut by_len: BTreeMap<u32, usize> = BTreeMap::new();
        for m in &oracle {
            *by_len.entry(m.count_ones()).or_default() += 1;
        }
        // Frozen from the oracle: 6 squares, 16 hexagons, 6 Hamiltonian octagons.
        assert_eq!(by_len, BTreeMap::from([(4, 6), (6, 16), (8, 6)]));

        let found = enumerate_circuits(12);
        let mut masks: Vec<u32> = found
            .iter()
            .map(|c| c.edges.iter().fold(0u32, |m, &e| m | 1 << e))
            .collect();
        masks.sort();
        let mut sorted_oracle = oracle.clone();
        sorted_oracle.sort();
        assert_eq!(masks, sorted_oracle);
    }

    #[test]
    fn short_circuits_are_faces() {
        let c = enumerate_circuits(4);
        assert_eq!(c.len(), 6);
        for cert in &c {
            assert_eq!(cert.circuit_type, CircuitType::Face);
            assert_eq!(cert.enclosed_ramification_count, 1);
            assert!(!cert.liftable);
        }
        assert!(enumerate_circuits(3).is_empty());
    }

    #[test]
    fn hexagons_split_into_dominoes_and_petries() {
        let c = enumerate_circuits(6);
        let count = |t| c.iter().filter(|x| x.circuit_type == t).count();
        assert_eq!(count(CircuitType::Face), 6);
        assert_eq!(count(CircuitType::Domino), 12);
        assert_eq!(count(CircuitType::Petrie), 4);
        for cert in &c {
            match cert.circuit_type {
                CircuitType::Domino => {
                    assert_eq!(cert.enclosed_ramification_count, 2);
                    assert!(cert.liftable);
                }
                CircuitType::Petrie => {
                    assert_eq!(cert.enclosed_ramification_count, 3);
                    assert!(!cert.liftable);
                }
                _ => {}
            }
            assert_eq!(cert.liftable, cert.enclosed_ramification_count % 2 == 0);
        }
    }

    #[test]
    fn nothing_liftable_below_six_edges() {
        assert!(enumerate_circuits(5).iter().all(|c| !c.liftable));
    }
}
