use rayon::prelude::*;
use serde::Serialize;

use super::{shortest_paths, GraphPath, MeshError, MeshGraph, VertexId};
use crate::geom::Point2;

/// A vertex map, possibly partial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    map: Vec<Option<VertexId>>,
}

impl Involution {
    pub fn identity(mesh: &MeshGraph) -> Self {
        Self {
            map: (0..mesh.num_vertices() as VertexId).map(Some).collect(),
        }
    }

    pub fn from_map(map: Vec<Option<VertexId>>) -> Self {
        Self { map }
    }

    /// Transport a chart map `(polygon, point) ↦ (polygon, point)` to mesh
    /// vertices, snapping images within `tol`. Vertices whose image is not a
    /// mesh vertex are left unmapped.
    pub fn from_chart_map(mesh: &MeshGraph, f: impl Fn(usize, Point2) -> (usize, Point2), tol: f64) -> Self {
        let map = (0..mesh.num_vertices() as VertexId)
            .map(|v| {
                mesh.charts(v).iter().find_map(|c| {
                    let (q, p) = f(c.polygon, c.pos);
                    mesh.locate(q, p, tol)
                })
            })
            .collect();
        Self { map }
    }

    pub fn image(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(v as usize).copied().flatten()
    }

    /// `J(J(v)) = v` with `J(v)` inside `subset`, for every `v` in `subset`.
    pub fn check_on(&self, subset: &[VertexId]) -> Result<(), MeshError> {
        let mut member = std::collections::HashSet::with_capacity(subset.len());
        member.extend(subset.iter().copied());
        for &v in subset {
            let w = self.image(v).ok_or(MeshError::NotInvolution(v))?;
            if !member.contains(&w) || self.image(w) != Some(v) {
                return Err(MeshError::NotInvolution(v));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DisplacementResult {
    pub delta: f64,
    pub p: VertexId,
    pub jp: VertexId,
    pub path: GraphPath,
    pub surface_fingerprint: u64,
}

/// `min over v in skeleton of d(v, J(v))`.
pub fn displacement(
    mesh: &MeshGraph,
    involution: &Involution,
    skeleton: &[VertexId],
) -> Result<DisplacementResult, MeshError> {
    if skeleton.is_empty() {
        return Err(MeshError::NotInvolution(0));
    }
    involution.check_on(skeleton)?;
    let mut pairs: Vec<(VertexId, VertexId)> = skeleton
        .iter()
        .map(|&v| {
            let w = involution.image(v).unwrap();
            (v.min(w), v.max(w))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let best = pairs
        .par_iter()
        .map(|&(v, w)| {
            let path = shortest_paths(mesh, v, Some(w)).path_to(mesh, w);
            (path.length, v, w, path)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap();
    Ok(DisplacementResult {
        delta: best.0,
        p: best.1,
        jp: best.2,
        path: best.3,
        surface_fingerprint: mesh.surface().fingerprint(),
    })
}
