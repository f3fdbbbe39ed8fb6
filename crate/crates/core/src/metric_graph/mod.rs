//! Graph approximation of a cone surface: distances, shortest essential
//! cycles through a Z/2 homology cover, and the displacement of an involution.

mod cover;
mod displacement;
mod mesh;

pub use cover::{
    build_homology_cover, shortest_essential_cycle, shortest_essential_cycle_with_band, ClassLength, HomologyCover,
    Sources, SystoleEstimate, DEFAULT_BAND,
};
pub use displacement::{displacement, DisplacementResult, Involution};
pub use mesh::{
    lattice_distortion, refine, ChartPos, MeshEdge, MeshGraph, MeshOptions, MeshTriangle, DEFAULT_RADIUS_FACTOR,
};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

pub type VertexId = u32;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh spacing {h} is not below the shortest polygon edge {shortest}")]
    MeshTooCoarse { h: f64, shortest: f64 },
    #[error("invalid mesh spacing {0}")]
    InvalidSpacing(f64),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("mesh graph is disconnected")]
    Disconnected,
    #[error("homology cover needs genus at least 1 (got genus {0})")]
    GenusZero(usize),
    #[error("homology labels have rank {rank}, expected {expected}")]
    RankMismatch { rank: usize, expected: usize },
    #[error("labels fail the cocycle condition on triangle {0}")]
    NotCocycle(usize),
    #[error("map is not an involution on the skeleton (vertex {0})")]
    NotInvolution(VertexId),
    #[error("vertex {0} is not in the mesh")]
    UnknownVertex(VertexId),
}

/// Min-heap entry with ties broken by the smaller state index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HeapEntry {
    pub(crate) d: f64,
    pub(crate) s: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then(other.s.cmp(&self.s))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A path in the mesh graph. `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
/// `length` is the sum as accumulated by the search, which may differ from a
/// left-to-right sum in the last bits when the path was reversed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphPath {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<u32>,
    pub length: f64,
}

impl GraphPath {
    /// Length recomputed by summing edge weights from the start.
    pub fn recomputed_length(&self, mesh: &MeshGraph) -> f64 {
        self.edges
            .iter()
            .fold(0.0, |acc, &e| acc + mesh.edges()[e as usize].weight)
    }
}

/// Single-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: VertexId,
    pub dist: Vec<f64>,
    pred: Vec<u32>,
}

impl ShortestPaths {
    pub fn path_to(&self, mesh: &MeshGraph, target: VertexId) -> GraphPath {
        let mut vertices = vec![target];
        let mut edges = Vec::new();
        let mut v = target;
        while self.pred[v as usize] != NONE {
            let e = self.pred[v as usize];
            let edge = mesh.edges()[e as usize];
            v = if edge.a == v { edge.b } else { edge.a };
            edges.push(e);
            vertices.push(v);
        }
        vertices.reverse();
        edges.reverse();
        GraphPath {
            vertices,
            edges,
            length: self.dist[target as usize],
        }
    }

    /// First edge of the tree path from the source to `target`.
    pub fn first_edge(&self, mesh: &MeshGraph, target: VertexId) -> Option<u32> {
        let mut v = target;
        let mut last = None;
        while self.pred[v as usize] != NONE {
            let e = self.pred[v as usize];
            let edge = mesh.edges()[e as usize];
            v = if edge.a == v { edge.b } else { edge.a };
            last = Some(e);
        }
        last
    }
}

/// Dijkstra from `source`; stops early once `target` is settled.
pub fn shortest_paths(mesh: &MeshGraph, source: VertexId, target: Option<VertexId>) -> ShortestPaths {
    let n = mesh.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(HeapEntry { d: 0.0, s: source });
    while let Some(HeapEntry { d, s }) = heap.pop() {
        if d > dist[s as usize] {
            continue;
        }
        if Some(s) == target {
            break;
        }
        for (w, weight, e) in mesh.arcs(s) {
            let nd = d + weight;
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                pred[w as usize] = e;
                heap.push(HeapEntry { d: nd, s: w });
            }
        }
    }
    ShortestPaths { source, dist, pred }
}

/// Graph distance between two mesh vertices.
pub fn distance(mesh: &MeshGraph, a: VertexId, b: VertexId) -> Result<f64, MeshError> {
    shortest_path(mesh, a, b).map(|p| p.length)
}

pub fn shortest_path(mesh: &MeshGraph, a: VertexId, b: VertexId) -> Result<GraphPath, MeshError> {
    for v in [a, b] {
        if v as usize >= mesh.num_vertices() {
            return Err(MeshError::UnknownVertex(v));
        }
    }
    // Always search from the smaller id so that d(a, b) and d(b, a) are the same float.
    if a <= b {
        return Ok(shortest_paths(mesh, a, Some(b)).path_to(mesh, b));
    }
    let mut p = shortest_paths(mesh, b, Some(a)).path_to(mesh, a);
    p.vertices.reverse();
    p.edges.reverse();
    Ok(p)
}

#[cfg(test)]
mod tests;
