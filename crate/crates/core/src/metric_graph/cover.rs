use std::collections::{BinaryHeap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::{GraphPath, HeapEntry, MeshError, MeshGraph, VertexId, NONE};

/// Relative band above the minimum inside which other classes are reported.
pub const DEFAULT_BAND: f64 = 0.01;

/// Z/2 homology labels on a mesh graph.
///
/// Labels come from a tree-cotree decomposition of the triangulation: the
/// `2g` edges outside both trees get unit vectors, cotree edges are solved so
/// that every triangle sums to zero, and primal tree edges get zero. Graph
/// edges that are not triangle sides (the long shortcuts) are labelled by a
/// per-polygon potential, so the label of any closed walk equals that of a
/// homotopic triangle-edge loop.
#[derive(Debug, Clone)]
pub struct HomologyCover<'a> {
    mesh: &'a MeshGraph,
    rank: usize,
    tri_labels: Vec<u32>,
    edge_labels: Vec<u32>,
    potentials: Vec<Vec<u32>>,
}

pub fn build_homology_cover(mesh: &MeshGraph) -> Result<HomologyCover<'_>, MeshError> {
    let genus = mesh.surface().genus() as usize;
    if genus == 0 {
        return Err(MeshError::GenusZero(0));
    }
    let nv = mesh.num_vertices();
    let ne = mesh.num_triangulation_edges();
    let tris = mesh.triangles();

    let mut vertex_edges: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for e in 0..ne as u32 {
        let [a, b] = mesh.triangulation_edge(e);
        vertex_edges[a as usize].push(e);
        if b != a {
            vertex_edges[b as usize].push(e);
        }
    }
    let mut in_tree = vec![false; ne];
    let mut seen = vec![false; nv];
    let mut queue = VecDeque::from([0 as VertexId]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &e in &vertex_edges[v as usize] {
            let [a, b] = mesh.triangulation_edge(e);
            let w = if a == v { b } else { a };
            if !seen[w as usize] {
                seen[w as usize] = true;
                in_tree[e as usize] = true;
                queue.push_back(w);
            }
        }
    }

    let mut edge_tris: Vec<Vec<u32>> = vec![Vec::new(); ne];
    for (t, tri) in tris.iter().enumerate() {
        for &e in &tri.edges {
            edge_tris[e as usize].push(t as u32);
        }
    }
    let mut in_cotree = vec![false; ne];
    let mut parent_edge = vec![NONE; tris.len()];
    let mut order = Vec::with_capacity(tris.len());
    let mut tseen = vec![false; tris.len()];
    let mut tqueue = VecDeque::from([0u32]);
    tseen[0] = true;
    while let Some(t) = tqueue.pop_front() {
        order.push(t);
        for &e in &tris[t as usize].edges {
            if in_tree[e as usize] || in_cotree[e as usize] {
                continue;
            }
            for &u in &edge_tris[e as usize] {
                if !tseen[u as usize] {
                    tseen[u as usize] = true;
                    in_cotree[e as usize] = true;
                    parent_edge[u as usize] = e;
                    tqueue.push_back(u);
                }
            }
        }
    }

    let leftover: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
    let expected = 2 * genus;
    if leftover.len() != expected || expected > 31 {
        return Err(MeshError::RankMismatch {
            rank: leftover.len(),
            expected,
        });
    }
    let mut tri_labels = vec![0u32; ne];
    for (i, &e) in leftover.iter().enumerate() {
        tri_labels[e] = 1 << i;
    }
    for &t in order.iter().rev() {
        let pe = parent_edge[t as usize];
        if pe == NONE {
            continue;
        }
        let rest = tris[t as usize]
            .edges
            .iter()
            .filter(|&&e| e != pe)
            .fold(0, |acc, &e| acc ^ tri_labels[e as usize]);
        tri_labels[pe as usize] = rest;
    }
    for (t, tri) in tris.iter().enumerate() {
        if tri.edges.iter().fold(0, |acc, &e| acc ^ tri_labels[e as usize]) != 0 {
            return Err(MeshError::NotCocycle(t));
        }
    }

    // Per-polygon potentials: integrate labels over each polygon's triangle edges.
    let polys = &mesh.polys;
    let mut local_adj: Vec<Vec<Vec<(u32, u32)>>> = polys.iter().map(|pm| vec![Vec::new(); pm.points.len()]).collect();
    for tri in tris {
        for i in 0..3 {
            let (a, b) = (tri.local[i], tri.local[(i + 1) % 3]);
            let l = tri_labels[tri.edges[i] as usize];
            local_adj[tri.polygon][a as usize].push((b, l));
            local_adj[tri.polygon][b as usize].push((a, l));
        }
    }
    let mut potentials = Vec::with_capacity(polys.len());
    for adj in &local_adj {
        let mut phi = vec![NONE; adj.len()];
        phi[0] = 0;
        let mut q = VecDeque::from([0u32]);
        while let Some(a) = q.pop_front() {
            for &(b, l) in &adj[a as usize] {
                if phi[b as usize] == NONE {
                    phi[b as usize] = phi[a as usize] ^ l;
                    q.push_back(b);
                }
            }
        }
        debug_assert!(phi.iter().all(|&p| p != NONE));
        potentials.push(phi);
    }
    let edge_labels = mesh
        .edges()
        .iter()
        .map(|e| potentials[e.polygon][e.local[0] as usize] ^ potentials[e.polygon][e.local[1] as usize])
        .collect();

    let cover = HomologyCover {
        mesh,
        rank: expected,
        tri_labels,
        edge_labels,
        potentials,
    };
    let rank = cover.label_rank();
    if rank != expected {
        return Err(MeshError::RankMismatch { rank, expected });
    }
    Ok(cover)
}

fn gf2_rank(vectors: impl Iterator<Item = u32>) -> usize {
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for mut v in vectors {
        for bit in (0..32).rev() {
            if v >> bit & 1 == 0 {
                continue;
            }
            if basis[bit] == 0 {
                basis[bit] = v;
                rank += 1;
                break;
            }
            v ^= basis[bit];
        }
    }
    rank
}

impl<'a> HomologyCover<'a> {
    pub fn mesh(&self) -> &'a MeshGraph {
        self.mesh
    }

    /// Number of label bits, `2g`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sheets(&self) -> usize {
        1 << self.rank
    }

    /// Rank over Z/2 of the labels of all edges. Since primal tree edges carry
    /// zero, these are the classes of the fundamental cycles, which span H₁.
    pub fn label_rank(&self) -> usize {
        gf2_rank(self.tri_labels.iter().copied())
    }

    pub fn edge_label(&self, edge: u32) -> u32 {
        self.edge_labels[edge as usize]
    }

    pub fn triangulation_label(&self, edge: u32) -> u32 {
        self.tri_labels[edge as usize]
    }

    /// Class of a closed walk given by its edges.
    pub fn cycle_class(&self, edges: &[u32]) -> u32 {
        edges.iter().fold(0, |acc, &e| acc ^ self.edge_labels[e as usize])
    }

    /// Class contribution of a path from `a` to `b` that stays inside `polygon`.
    pub fn chart_class(&self, polygon: usize, a: VertexId, b: VertexId) -> Option<u32> {
        let ca = self.mesh.chart_in(a, polygon)?;
        let cb = self.mesh.chart_in(b, polygon)?;
        let phi = &self.potentials[polygon];
        Some(phi[ca.local as usize] ^ phi[cb.local as usize])
    }

    /// Cover Dijkstra from `(source, 0)`. Returns per-class minima of the
    /// closed walks at `source` and the best walk's edges.
    fn sweep(&self, source: VertexId, band: f64, global: &AtomicU64) -> SweepResult {
        let sheets = self.sheets();
        let nstates = self.mesh.num_vertices() * sheets;
        let mut dist = vec![f64::INFINITY; nstates];
        let mut pred = vec![NONE; nstates];
        let mut heap = BinaryHeap::new();
        let start = source as usize * sheets;
        dist[start] = 0.0;
        heap.push(HeapEntry {
            d: 0.0,
            s: start as u32,
        });
        let mut found = vec![f64::INFINITY; sheets];
        let mut remaining = sheets - 1;
        let mut best_state = None;
        while let Some(HeapEntry { d, s }) = heap.pop() {
            if d > dist[s as usize] {
                continue;
            }
            let limit = f64::from_bits(global.load(Ordering::Relaxed)) * (1.0 + band);
            if d > limit {
                break;
            }
            let (v, c) = (s as usize / sheets, s as usize % sheets);
            if v == source as usize && c != 0 {
                found[c] = d;
                remaining -= 1;
                if best_state.is_none() {
                    best_state = Some(s);
                    global.fetch_min(d.to_bits(), Ordering::Relaxed);
                }
                if remaining == 0 {
                    break;
                }
            }
            for (w, weight, e) in self.mesh.arcs(v as VertexId) {
                let t = w as usize * sheets + (c ^ self.edge_labels[e as usize] as usize);
                let nd = d + weight;
                if nd < dist[t] {
                    dist[t] = nd;
                    pred[t] = e;
                    heap.push(HeapEntry { d: nd, s: t as u32 });
                }
            }
        }
        let best = best_state.map(|s| {
            let mut edges = Vec::new();
            let mut vertices = vec![source];
            let mut cur = s as usize;
            while pred[cur] != NONE {
                let e = pred[cur];
                let edge = self.mesh.edges()[e as usize];
                let v = (cur / sheets) as VertexId;
                let u = if edge.a == v { edge.b } else { edge.a };
                let c = (cur % sheets) ^ self.edge_labels[e as usize] as usize;
                edges.push(e);
                vertices.push(u);
                cur = u as usize * sheets + c;
            }
            edges.reverse();
            vertices.reverse();
            GraphPath {
                vertices,
                edges,
                length: dist[s as usize],
            }
        });
        SweepResult { found, best }
    }
}

struct SweepResult {
    found: Vec<f64>,
    best: Option<GraphPath>,
}

/// Which base vertices to start cover searches from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Sources {
    ConePoints,
    /// Cone points and the mesh vertex nearest each polygon-edge midpoint.
    #[default]
    ConePointsAndSkeletonMidpoints,
    All,
    Explicit(Vec<VertexId>),
}

impl Sources {
    pub fn vertices(&self, mesh: &MeshGraph) -> Vec<VertexId> {
        let mut v = match self {
            Sources::ConePoints => mesh.cone_vertices().to_vec(),
            Sources::ConePointsAndSkeletonMidpoints => {
                let mut v = mesh.cone_vertices().to_vec();
                v.extend(mesh.edge_midpoints());
                v
            }
            Sources::All => (0..mesh.num_vertices() as VertexId).collect(),
            Sources::Explicit(v) => v.clone(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassLength {
    pub class: u32,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystoleEstimate {
    pub length: f64,
    pub cycle: GraphPath,
    pub class: u32,
    pub h: f64,
    /// Relative overestimate allowed by the mesh: the true homology systole lies
    /// in `[length / (1 + error_bound), length]` up to sampling of base points.
    pub error_bound: f64,
    /// Every nonzero class whose shortest sampled loop is within the band of the minimum.
    pub near_minimal: Vec<ClassLength>,
    pub band: f64,
    pub sources: usize,
    pub surface_fingerprint: u64,
}

impl SystoleEstimate {
    pub fn lower_estimate(&self) -> f64 {
        self.length / (1.0 + self.error_bound)
    }
}

/// Shortest closed walk with nonzero Z/2 class through one of the sources.
pub fn shortest_essential_cycle(cover: &HomologyCover<'_>, sources: &Sources) -> Result<SystoleEstimate, MeshError> {
    shortest_essential_cycle_with_band(cover, sources, DEFAULT_BAND)
}

pub fn shortest_essential_cycle_with_band(
    cover: &HomologyCover<'_>,
    sources: &Sources,
    band: f64,
) -> Result<SystoleEstimate, MeshError> {
    let mesh = cover.mesh;
    let list = sources.vertices(mesh);
    if let Some(&bad) = list.iter().find(|&&v| v as usize >= mesh.num_vertices()) {
        return Err(MeshError::UnknownVertex(bad));
    }
    let global = AtomicU64::new(f64::INFINITY.to_bits());
    let results: Vec<SweepResult> = list.par_iter().map(|&s| cover.sweep(s, band, &global)).collect();

    let mut best: Option<&GraphPath> = None;
    let mut per_class = vec![f64::INFINITY; cover.sheets()];
    for r in &results {
        for (c, &d) in r.found.iter().enumerate() {
            per_class[c] = per_class[c].min(d);
        }
        if let Some(p) = &r.best {
            if best.is_none_or(|b| p.length < b.length) {
                best = Some(p);
            }
        }
    }
    let cycle = best
        .cloned()
        .expect("a surface of positive genus has an essential cycle through every vertex");
    let length = cycle.length;
    let class = cover.cycle_class(&cycle.edges);
    let near_minimal = per_class
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &d)| d <= length * (1.0 + band))
        .map(|(c, &d)| ClassLength {
            class: c as u32,
            length: d,
        })
        .collect();
    Ok(SystoleEstimate {
        length,
        class,
        h: mesh.h(),
        error_bound: mesh.directional_distortion(),
        near_minimal,
        band,
        sources: list.len(),
        surface_fingerprint: mesh.surface().fingerprint(),
        cycle,
    })
}
