//! Piecewise-flat surfaces glued from Euclidean polygons.
//!
//! A [`ConeSurface`] is a finite set of counterclockwise polygons together
//! with a perfect matching on their edges. Every vertex class of the glued
//! surface is a cone point whose total angle is the sum of the polygon
//! corners identified there. Polygons may additionally carry *marked*
//! interior points, which are smooth cone points (total angle `2π`) that
//! downstream code wants to address by name, such as the centres of the
//! octagons of the Bolza metric.
//!
//! Surfaces are validated and frozen by [`build_surface`]; everything derived
//! from the gluing (cone angles, Euler characteristic, genus) is computed at
//! build time.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;
use std::hash::{Hash, Hasher};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Point2};

/// Default relative tolerance for lengths and angles.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("surface needs at least one polygon and one gluing")]
    EmptyInput,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("polygon {id} is degenerate: {reason}")]
    DegeneratePolygon { id: usize, reason: String },
    #[error("polygon id {0} appears twice")]
    DuplicatePolygonId(usize),
    #[error("gluing refers to unknown polygon {0}")]
    UnknownPolygon(usize),
    #[error("polygon {polygon} has no edge {edge}")]
    EdgeOutOfRange { polygon: usize, edge: usize },
    #[error("edge {edge} of polygon {polygon} is glued {count} times (expected exactly once)")]
    UnmatchedEdge { polygon: usize, edge: usize, count: usize },
    #[error("glued edges {a:?} and {b:?} have lengths {len_a} and {len_b}")]
    LengthMismatch {
        a: EdgeRef,
        b: EdgeRef,
        len_a: f64,
        len_b: f64,
    },
    #[error("orientation flags are inconsistent: the glued surface is not orientable")]
    NonOrientable,
    #[error("glued surface is not connected")]
    Disconnected,
    #[error("corner chase at polygon {polygon} vertex {vertex} did not close up")]
    OpenVertexChain { polygon: usize, vertex: usize },
    #[error("invalid surface file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A simple polygon given by counterclockwise vertices in its own chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanPolygon {
    pub id: usize,
    pub vertices: Vec<Point2>,
    /// Interior points promoted to (smooth) cone points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marked: Vec<Point2>,
}

impl EuclideanPolygon {
    pub fn new(id: usize, vertices: Vec<Point2>) -> Self {
        Self {
            id,
            vertices,
            marked: Vec::new(),
        }
    }

    pub fn with_marked(mut self, marked: Vec<Point2>) -> Self {
        self.marked = marked;
        self
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, k: usize) -> Point2 {
        self.vertices[k % self.len()]
    }

    /// Endpoints of edge `k`, which runs from vertex `k` to vertex `k + 1`.
    pub fn edge(&self, k: usize) -> (Point2, Point2) {
        (self.vertex(k), self.vertex(k + 1))
    }

    pub fn edge_length(&self, k: usize) -> f64 {
        let (a, b) = self.edge(k);
        a.dist(b)
    }

    /// Interior angle at vertex `k`.
    pub fn interior_angle(&self, k: usize) -> f64 {
        let n = self.len();
        let v = self.vertex(k);
        geom::ccw_angle(self.vertex(k + 1) - v, self.vertex(k + n - 1) - v)
    }

    pub fn signed_area(&self) -> f64 {
        geom::signed_area(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        (0..self.len()).all(|k| self.interior_angle(k) <= std::f64::consts::PI + 1e-12)
    }

    pub fn contains(&self, p: Point2) -> bool {
        geom::point_in_polygon(p, &self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.edge(k);
                geom::point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            id: self.id,
            vertices: self.vertices.iter().map(|&p| p * lambda).collect(),
            marked: self.marked.iter().map(|&p| p * lambda).collect(),
        }
    }

    fn validate(&self, eps: f64) -> Result<(), SurfaceError> {
        let bad = |reason: &str| SurfaceError::DegeneratePolygon {
            id: self.id,
            reason: reason.to_string(),
        };
        let n = self.len();
        if n < 3 {
            return Err(bad("fewer than 3 vertices"));
        }
        if self.vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(bad("non-finite coordinate"));
        }
        let diam = self.diameter();
        if (0..n).any(|k| self.edge_length(k) <= eps * diam) {
            return Err(bad("coincident consecutive vertices"));
        }
        if self.signed_area() <= eps * diam * diam {
            return Err(bad("non-positive signed area (vertices must be counterclockwise)"));
        }
        for k in 0..n {
            let a = self.interior_angle(k);
            if a <= eps || a >= TAU - eps {
                return Err(bad("edges fold back on themselves"));
            }
        }
        let touch = eps * diam;
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (p1, p2) = self.edge(i);
                let (q1, q2) = self.edge(j);
                if geom::segments_intersect(p1, p2, q1, q2, touch * diam) {
                    return Err(bad("self-intersecting boundary"));
                }
            }
        }
        for m in &self.marked {
            if !self.contains(*m) || self.boundary_distance(*m) <= touch {
                return Err(bad("marked point is not interior"));
            }
        }
        Ok(())
    }

    /// Reflected copy `(x, y) -> (-x, y)` with vertex order reversed so it stays
    /// counterclockwise. Old edge `k` becomes new edge `n - 1 - k`, traversed backwards.
    fn mirrored(&self) -> Self {
        let n = self.len();
        let m = |p: Point2| Point2::new(-p.x, p.y);
        Self {
            id: self.id,
            vertices: (0..n).map(|i| m(self.vertices[(n - i) % n])).collect(),
            marked: self.marked.iter().map(|&p| m(p)).collect(),
        }
    }
}

/// One side of a gluing: edge `edge` of the polygon with id `polygon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct EdgeRef {
    pub polygon: usize,
    pub edge: usize,
}

impl EdgeRef {
    pub const fn new(polygon: usize, edge: usize) -> Self {
        Self { polygon, edge }
    }
}

impl From<[usize; 2]> for EdgeRef {
    fn from(v: [usize; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<EdgeRef> for [usize; 2] {
    fn from(e: EdgeRef) -> Self {
        [e.polygon, e.edge]
    }
}

fn default_reversed() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// Identification of two polygon edges.
///
/// With `reversed` (the default) the start of `a` is glued to the end of `b`,
/// which is the orientation-compatible choice for two counterclockwise
/// polygons. With `reversed = false` start is glued to start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeGluing {
    pub a: EdgeRef,
    pub b: EdgeRef,
    #[serde(default = "default_reversed", skip_serializing_if = "is_true")]
    pub reversed: bool,
}

impl EdgeGluing {
    pub fn new(a: EdgeRef, b: EdgeRef) -> Self {
        Self { a, b, reversed: true }
    }

    pub fn parallel(a: EdgeRef, b: EdgeRef) -> Self {
        Self { a, b, reversed: false }
    }
}

/// A polygon corner: vertex `vertex` of the polygon at index `polygon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner {
    pub polygon: usize,
    pub vertex: usize,
    pub angle: f64,
    /// Developed angle at which this corner's sector starts, measured
    /// counterclockwise from the first corner of the class.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeLocation {
    /// A vertex class; corners are listed in counterclockwise order around the point.
    Vertex { corners: Vec<Corner> },
    /// A marked interior point of a polygon.
    Marked { polygon: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConePoint {
    pub location: ConeLocation,
    pub total_angle: f64,
    /// `α` in `θ = 2π(1 + α)`.
    pub excess: f64,
}

impl ConePoint {
    fn new(location: ConeLocation, total_angle: f64) -> Self {
        Self {
            location,
            total_angle,
            excess: total_angle / TAU - 1.0,
        }
    }

    pub fn is_smooth(&self, eps: f64) -> bool {
        (self.total_angle - TAU).abs() <= eps * TAU
    }

    pub fn corners(&self) -> &[Corner] {
        match &self.location {
            ConeLocation::Vertex { corners } => corners,
            ConeLocation::Marked { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SurfaceTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub genus: u32,
    pub orientable: bool,
}

/// A validated, immutable piecewise-flat surface.
#[derive(Debug, Clone)]
pub struct ConeSurface {
    polygons: Vec<EuclideanPolygon>,
    gluings: Vec<EdgeGluing>,
    partner: Vec<Vec<(usize, usize)>>,
    cone_points: Vec<ConePoint>,
    corner_class: Vec<Vec<usize>>,
    topology: SurfaceTopology,
    tolerance: f64,
    fingerprint: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SurfaceFile {
    polygons: Vec<EuclideanPolygon>,
    gluings: Vec<EdgeGluing>,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Validate polygons and gluings and derive cone points and topology.
///
/// Orientation: if some gluings are flagged `reversed = false` but the surface
/// is still orientable, the affected polygons are mirrored so that every
/// stored gluing is orientation-reversing.
pub fn build_surface(
    polygons: Vec<EuclideanPolygon>,
    gluings: Vec<EdgeGluing>,
    eps: f64,
) -> Result<ConeSurface, SurfaceError> {
    ConeSurface::build(polygons, gluings, eps)
}

impl ConeSurface {
    pub fn build(
        mut polygons: Vec<EuclideanPolygon>,
        mut gluings: Vec<EdgeGluing>,
        eps: f64,
    ) -> Result<Self, SurfaceError> {
        if polygons.is_empty() || gluings.is_empty() {
            return Err(SurfaceError::EmptyInput);
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(SurfaceError::InvalidTolerance(eps));
        }
        let mut index_of = HashMap::new();
        for (i, p) in polygons.iter().enumerate() {
            if index_of.insert(p.id, i).is_some() {
                return Err(SurfaceError::DuplicatePolygonId(p.id));
            }
            p.validate(eps)?;
        }
        let resolve = |e: EdgeRef| -> Result<(usize, usize), SurfaceError> {
            let &p = index_of
                .get(&e.polygon)
                .ok_or(SurfaceError::UnknownPolygon(e.polygon))?;
            if e.edge >= polygons[p].len() {
                return Err(SurfaceError::EdgeOutOfRange {
                    polygon: e.polygon,
                    edge: e.edge,
                });
            }
            Ok((p, e.edge))
        };

        let mut resolved = Vec::with_capacity(gluings.len());
        let mut count: Vec<Vec<usize>> = polygons.iter().map(|p| vec![0; p.len()]).collect();
        for g in &gluings {
            let a = resolve(g.a)?;
            let b = resolve(g.b)?;
            count[a.0][a.1] += 1;
            count[b.0][b.1] += 1;
            resolved.push((a, b));
        }
        for (p, row) in count.iter().enumerate() {
            for (e, &c) in row.iter().enumerate() {
                if c != 1 {
                    return Err(SurfaceError::UnmatchedEdge {
                        polygon: polygons[p].id,
                        edge: e,
                        count: c,
                    });
                }
            }
        }
        for (g, &(a, b)) in gluings.iter().zip(&resolved) {
            let la = polygons[a.0].edge_length(a.1);
            let lb = polygons[b.0].edge_length(b.1);
            if (la - lb).abs() > eps * la.max(lb) {
                return Err(SurfaceError::LengthMismatch {
                    a: g.a,
                    b: g.b,
                    len_a: la,
                    len_b: lb,
                });
            }
        }

        // Orientation signs by BFS over the polygon adjacency.
        let np = polygons.len();
        let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); np];
        for (g, &(a, b)) in gluings.iter().zip(&resolved) {
            adj[a.0].push((b.0, g.reversed));
            adj[b.0].push((a.0, g.reversed));
        }
        let mut sign: Vec<Option<bool>> = vec![None; np];
        sign[0] = Some(true);
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            let sp = sign[p].unwrap();
            for &(q, reversed) in &adj[p] {
                let want = if reversed { sp } else { !sp };
                match sign[q] {
                    None => {
                        sign[q] = Some(want);
                        queue.push_back(q);
                    }
                    Some(s) if s != want => return Err(SurfaceError::NonOrientable),
                    Some(_) => {}
                }
            }
        }
        if sign.iter().any(Option::is_none) {
            return Err(SurfaceError::Disconnected);
        }
        let flipped: Vec<bool> = sign.iter().map(|s| !s.unwrap()).collect();
        if flipped.iter().any(|&f| f) {
            for (p, poly) in polygons.iter_mut().enumerate() {
                if flipped[p] {
                    *poly = poly.mirrored();
                }
            }
            for (g, (a, b)) in gluings.iter_mut().zip(resolved.iter_mut()) {
                for (side, r) in [(&mut g.a, a), (&mut g.b, b)] {
                    if flipped[r.0] {
                        let n = polygons[r.0].len();
                        r.1 = n - 1 - r.1;
                        side.edge = r.1;
                        g.reversed = !g.reversed;
                    }
                }
                debug_assert!(g.reversed);
            }
        }

        let mut partner: Vec<Vec<(usize, usize)>> = polygons.iter().map(|p| vec![(usize::MAX, 0); p.len()]).collect();
        for &(a, b) in &resolved {
            partner[a.0][a.1] = b;
            partner[b.0][b.1] = a;
        }

        // Chase corners counterclockwise: leaving corner (p, k) across its
        // incoming edge k-1 lands on the corner at the start of the partner edge.
        let total_corners: usize = polygons.iter().map(|p| p.len()).sum();
        let mut corner_class: Vec<Vec<usize>> = polygons.iter().map(|p| vec![usize::MAX; p.len()]).collect();
        let mut cone_points = Vec::new();
        for p0 in 0..np {
            for k0 in 0..polygons[p0].len() {
                if corner_class[p0][k0] != usize::MAX {
                    continue;
                }
                let class = cone_points.len();
                let mut corners = Vec::new();
                let mut offset = 0.0;
                let (mut p, mut k) = (p0, k0);
                loop {
                    if corners.len() > total_corners {
                        return Err(SurfaceError::OpenVertexChain {
                            polygon: polygons[p0].id,
                            vertex: k0,
                        });
                    }
                    corner_class[p][k] = class;
                    let angle = polygons[p].interior_angle(k);
                    corners.push(Corner {
                        polygon: p,
                        vertex: k,
                        angle,
                        offset,
                    });
                    offset += angle;
                    let n = polygons[p].len();
                    (p, k) = partner[p][(k + n - 1) % n];
                    if (p, k) == (p0, k0) {
                        break;
                    }
                    if corner_class[p][k] != usize::MAX {
                        return Err(SurfaceError::OpenVertexChain {
                            polygon: polygons[p0].id,
                            vertex: k0,
                        });
                    }
                }
                cone_points.push(ConePoint::new(ConeLocation::Vertex { corners }, offset));
            }
        }
        let vertex_classes = cone_points.len();
        for (p, poly) in polygons.iter().enumerate() {
            for index in 0..poly.marked.len() {
                cone_points.push(ConePoint::new(ConeLocation::Marked { polygon: p, index }, TAU));
            }
        }

        let euler = vertex_classes as i64 - gluings.len() as i64 + np as i64;
        debug_assert!(euler % 2 == 0 && euler <= 2);
        let topology = SurfaceTopology {
            vertices: vertex_classes,
            edges: gluings.len(),
            faces: np,
            euler_characteristic: euler,
            genus: ((2 - euler) / 2) as u32,
            orientable: true,
        };

        let mut hasher = DefaultHasher::new();
        for poly in &polygons {
            poly.id.hash(&mut hasher);
            for v in poly.vertices.iter().chain(&poly.marked) {
                v.x.to_bits().hash(&mut hasher);
                v.y.to_bits().hash(&mut hasher);
            }
        }
        partner.hash(&mut hasher);
        let fingerprint = hasher.finish();

        Ok(Self {
            polygons,
            gluings,
            partner,
            cone_points,
            corner_class,
            topology,
            tolerance: eps,
            fingerprint,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, SurfaceError> {
        let file: SurfaceFile = serde_json::from_str(text)?;
        Self::build(file.polygons, file.gluings, file.tolerance)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SurfaceError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SurfaceFile {
            polygons: self.polygons.clone(),
            gluings: self.gluings.clone(),
            tolerance: self.tolerance,
        })
        .expect("surface serializes")
    }

    pub fn polygons(&self) -> &[EuclideanPolygon] {
        &self.polygons
    }

    pub fn gluings(&self) -> &[EdgeGluing] {
        &self.gluings
    }

    /// Index-based partner of edge `edge` of the polygon at index `polygon`.
    pub fn partner(&self, polygon: usize, edge: usize) -> (usize, usize) {
        self.partner[polygon][edge]
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.cone_points
    }

    /// Cone point index of the vertex class containing the given corner.
    pub fn corner_class(&self, polygon: usize, vertex: usize) -> usize {
        self.corner_class[polygon][vertex]
    }

    /// Cone point index of marked point `index` of polygon `polygon`.
    pub fn marked_cone_point(&self, polygon: usize, index: usize) -> Option<usize> {
        self.cone_points
            .iter()
            .position(|c| c.location == ConeLocation::Marked { polygon, index })
    }

    pub fn topology(&self) -> SurfaceTopology {
        self.topology
    }

    pub fn genus(&self) -> u32 {
        self.topology.genus
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Content hash identifying this surface; used to check that derived data
    /// belongs together.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn polygon_index(&self, id: usize) -> Option<usize> {
        self.polygons.iter().position(|p| p.id == id)
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| p.signed_area()).sum()
    }

    pub fn shortest_edge(&self) -> f64 {
        self.polygons
            .iter()
            .flat_map(|p| (0..p.len()).map(move |k| p.edge_length(k)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sum of all polygon interior angles.
    pub fn total_corner_angle(&self) -> f64 {
        self.polygons
            .iter()
            .flat_map(|p| (0..p.len()).map(move |k| p.interior_angle(k)))
            .sum()
    }

    /// The same gluing with every chart scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self, SurfaceError> {
        Self::build(
            self.polygons.iter().map(|p| p.scaled(lambda)).collect(),
            self.gluings.clone(),
            self.tolerance,
        )
    }
}

pub fn cone_angles(surface: &ConeSurface) -> &[ConePoint] {
    surface.cone_points()
}

/// `|Σ α(σ) − (2g − 2)|` over all cone points.
pub fn check_gauss_bonnet(surface: &ConeSurface) -> f64 {
    let excess: f64 = surface.cone_points.iter().map(|c| c.excess).sum();
    (excess - (2.0 * surface.genus() as f64 - 2.0)).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cat0Verdict {
    pub cat0: bool,
    /// First cone point with total angle below `2π`.
    pub witness: Option<usize>,
    pub witness_angle: Option<f64>,
}

pub fn is_cat0(surface: &ConeSurface) -> Cat0Verdict {
    let eps = surface.tolerance;
    let witness = surface.cone_points.iter().position(|c| c.total_angle < TAU - eps * TAU);
    Cat0Verdict {
        cat0: witness.is_none(),
        witness,
        witness_angle: witness.map(|i| surface.cone_points[i].total_angle),
    }
}

pub fn area(surface: &ConeSurface) -> f64 {
    surface.area()
}

/// Axis-aligned rectangle `[0,w]×[0,h]` as a polygon.
pub fn rectangle(id: usize, w: f64, h: f64) -> EuclideanPolygon {
    EuclideanPolygon::new(
        id,
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(w, 0.0),
            Point2::new(w, h),
            Point2::new(0.0, h),
        ],
    )
}

/// Flat torus from a `w × h` rectangle with opposite sides identified.
pub fn flat_torus(w: f64, h: f64) -> ConeSurface {
    build_surface(
        vec![rectangle(0, w, h)],
        vec![
            EdgeGluing::new(EdgeRef::new(0, 0), EdgeRef::new(0, 2)),
            EdgeGluing::new(EdgeRef::new(0, 1), EdgeRef::new(0, 3)),
        ],
        DEFAULT_TOLERANCE,
    )
    .expect("flat torus is valid")
}

/// Regular `n`-gon with circumradius `r` centred at the origin, vertex 0 at angle `phase`.
pub fn regular_polygon(id: usize, n: usize, r: f64, phase: f64) -> EuclideanPolygon {
    EuclideanPolygon::new(
        id,
        (0..n)
            .map(|k| Point2::polar(r, phase + TAU * k as f64 / n as f64))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_cube() -> ConeSurface {
        // Faces of the cube [0,1]^3 unfolded as six unit squares; edges named by
        // the pair of cube vertices they join, glued by matching names.
        let faces: [[[i32; 3]; 4]; 6] = [
            [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]],
            [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
            [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]],
            [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]],
            [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]],
            [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]],
        ];
        let polys = (0..6).map(|i| rectangle(i, 1.0, 1.0)).collect();
        let mut seen: HashMap<([i32; 3], [i32; 3]), EdgeRef> = HashMap::new();
        let mut gluings = Vec::new();
        for (f, face) in faces.iter().enumerate() {
            for k in 0..4 {
                let (a, b) = (face[k], face[(k + 1) % 4]);
                if let Some(other) = seen.remove(&(b, a)) {
                    gluings.push(EdgeGluing::new(other, EdgeRef::new(f, k)));
                } else {
                    seen.insert((a, b), EdgeRef::new(f, k));
                }
            }
        }
        assert!(seen.is_empty());
        build_surface(polys, gluings, DEFAULT_TOLERANCE).unwrap()
    }

    /// Regular octagon with the word a b a⁻¹ b⁻¹ c d c⁻¹ d⁻¹.
    fn genus_two_octagon() -> ConeSurface {
        let oct = regular_polygon(0, 8, 1.0, 0.0);
        let g = |i, j| EdgeGluing::new(EdgeRef::new(0, i), EdgeRef::new(0, j));
        build_surface(vec![oct], vec![g(0, 2), g(1, 3), g(4, 6), g(5, 7)], DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn flat_torus_is_smooth_genus_one() {
        let t = flat_torus(1.0, 1.0);
        let top = t.topology();
        assert_eq!(top.euler_characteristic, 0);
        assert_eq!(top.genus, 1);
        assert_eq!(t.cone_points().len(), 1);
        assert!((t.cone_points()[0].total_angle - TAU).abs() < 1e-12);
        assert!(t.cone_points()[0].is_smooth(t.tolerance()));
        assert!(check_gauss_bonnet(&t) < 1e-12);
        assert!(is_cat0(&t).cat0);
        assert_eq!(area(&t), 1.0);
    }

    #[test]
    fn octagon_word_gives_single_six_pi_point() {
        let s = genus_two_octagon();
        assert_eq!(s.genus(), 2);
        assert_eq!(s.topology().euler_characteristic, -2);
        assert_eq!(s.cone_points().len(), 1);
        assert!((s.cone_points()[0].total_angle - 6.0 * PI).abs() < 1e-12);
        assert!((s.cone_points()[0].excess - 2.0).abs() < 1e-12);
        assert!(check_gauss_bonnet(&s) < 1e-12);
    }

    #[test]
    fn cube_surface_is_not_cat0() {
        let c = unit_cube();
        assert_eq!(c.genus(), 0);
        assert_eq!(c.cone_points().len(), 8);
        let v = is_cat0(&c);
        assert!(!v.cat0);
        assert!((v.witness_angle.unwrap() - 1.5 * PI).abs() < 1e-12);
        assert!(check_gauss_bonnet(&c) < 1e-12);
    }

    #[test]
    fn mismatched_pillowcase_is_rejected() {
        let small = rectangle(0, 1.0, 1.0);
        let big = rectangle(1, 2.0, 2.0);
        let gluings = (0..4)
            .map(|k| EdgeGluing::new(EdgeRef::new(0, k), EdgeRef::new(1, 3 - k)))
            .collect();
        let err = build_surface(vec![small, big], gluings, DEFAULT_TOLERANCE).unwrap_err();
        assert!(matches!(err, SurfaceError::LengthMismatch { .. }), "{err}");
    }

    #[test]
    fn pillowcase_is_a_sphere_with_four_pi_points() {
        let gluings = (0..4)
            .map(|k| EdgeGluing::new(EdgeRef::new(0, k), EdgeRef::new(1, 3 - k)))
            .collect();
        let s = build_surface(
            vec![rectangle(0, 1.0, 1.0), rectangle(1, 1.0, 1.0)],
            gluings,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(s.genus(), 0);
        assert_eq!(s.cone_points().len(), 4);
        for c in s.cone_points() {
            assert!((c.total_angle - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_gluing_is_unmatched() {
        let err = build_surface(
            vec![rectangle(0, 1.0, 1.0)],
            vec![EdgeGluing::new(EdgeRef::new(0, 0), EdgeRef::new(0, 2))],
            DEFAULT_TOLERANCE,
        )
        .unwrap_err();
        assert!(matches!(err, SurfaceError::UnmatchedEdge { count: 0, .. }));
    }

    #[test]
    fn doubly_glued_edge_is_unmatched() {
        let g = |a, b| EdgeGluing::new(EdgeRef::new(0, a), EdgeRef::new(0, b));
        let err = build_surface(
            vec![rectangle(0, 1.0, 1.0)],
            vec![g(0, 2), g(1, 3), g(0, 3)],
            DEFAULT_TOLERANCE,
        )
        .unwrap_err();
        assert!(matches!(err, SurfaceError::UnmatchedEdge { count: 2, .. }));
    }

    #[test]
    fn klein_bottle_is_non_orientable() {
        let err = build_surface(
            vec![rectangle(0, 1.0, 1.0)],
            vec![
                EdgeGluing::new(EdgeRef::new(0, 0), EdgeRef::new(0, 2)),
                EdgeGluing::parallel(EdgeRef::new(0, 1), EdgeRef::new(0, 3)),
            ],
            DEFAULT_TOLERANCE,
        )
        .unwrap_err();
        assert!(matches!(err, SurfaceError::NonOrientable));
    }

    #[test]
    fn consistent_parallel_flags_are_normalized() {
        // Same pillowcase, but with the second square's gluings flagged
        // parallel against a mirrored labelling.
        let gluings = (0..4)
            .map(|k| EdgeGluing::parallel(EdgeRef::new(0, k), EdgeRef::new(1, k)))
            .collect();
        let s = build_surface(
            vec![rectangle(0, 1.0, 1.0), rectangle(1, 1.0, 1.0)],
            gluings,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(s.genus(), 0);
        assert!(s.gluings().iter().all(|g| g.reversed));
        assert!(check_gauss_bonnet(&s) < 1e-12);
    }

    #[test]
    fn degenerate_polygons() {
        let clockwise = EuclideanPolygon::new(
            0,
            vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)],
        );
        let bowtie = EuclideanPolygon::new(
            0,
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(2.0, 2.0),
                Point2::new(2.0, 0.0),
                Point2::new(0.0, 2.0),
                Point2::new(-1.0, 1.0),
            ],
        );
        for p in [clockwise, bowtie] {
            assert!(matches!(
                p.validate(DEFAULT_TOLERANCE),
                Err(SurfaceError::DegeneratePolygon { .. })
            ));
        }
    }

    #[test]
    fn json_round_trip_preserves_surface() {
        let t = flat_torus(2.0, 1.0);
        let back = ConeSurface::from_json(&t.to_json()).unwrap();
        assert_eq!(back.fingerprint(), t.fingerprint());
        let text = r#"{"polygons":[{"id":7,"vertices":[[0,0],[1,0],[1,1],[0,1]]}],
                       "gluings":[{"a":[7,0],"b":[7,2]},{"a":[7,1],"b":[7,3]}],
                       "tolerance":1e-9}"#;
        let s = ConeSurface::from_json(text).unwrap();
        assert_eq!(s.genus(), 1);
    }

    #[test]
    fn scaling_multiplies_area_by_square() {
        let s = genus_two_octagon();
        let big = s.scaled(2.0).unwrap();
        assert!((big.area() - 4.0 * s.area()).abs() < 1e-12);
        assert_eq!(big.topology(), s.topology());
    }

    #[test]
    fn marked_points_are_smooth_cone_points() {
        let sq = rectangle(0, 1.0, 1.0).with_marked(vec![Point2::new(0.5, 0.5)]);
        let s = build_surface(
            vec![sq],
            vec![
                EdgeGluing::new(EdgeRef::new(0, 0), EdgeRef::new(0, 2)),
                EdgeGluing::new(EdgeRef::new(0, 1), EdgeRef::new(0, 3)),
            ],
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(s.cone_points().len(), 2);
        assert_eq!(s.topology().vertices, 1);
        assert_eq!(s.marked_cone_point(0, 0), Some(1));
        assert!(check_gauss_bonnet(&s) < 1e-12);
    }
}
