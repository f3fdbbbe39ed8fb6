use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use spade::{ConstrainedDelaunayTriangulation, Triangulation};

use super::{MeshError, VertexId};
use crate::flatsurf::{ConeLocation, ConeSurface, EuclideanPolygon};
use crate::geom::{self, Point2};

/// Default ratio between the longest graph edge and the lattice spacing `h`.
pub const DEFAULT_RADIUS_FACTOR: f64 = 3.0;

/// Lattice points closer than this multiple of `h` to the boundary (or to a
/// marked point) are dropped before triangulating.
const BOUNDARY_CLEARANCE: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub h: f64,
    pub radius_factor: f64,
}

impl MeshOptions {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            radius_factor: DEFAULT_RADIUS_FACTOR,
        }
    }
}

/// Where a mesh vertex sits in one polygon chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPos {
    pub polygon: usize,
    pub local: u32,
    pub pos: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshEdge {
    pub a: VertexId,
    pub b: VertexId,
    pub polygon: usize,
    pub local: [u32; 2],
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshTriangle {
    pub polygon: usize,
    pub vertices: [VertexId; 3],
    pub local: [u32; 3],
    /// Triangulation edge between corners `i` and `i + 1`.
    pub edges: [u32; 3],
    pub area: f64,
}

#[derive(Debug, Clone)]
struct Grid {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl Grid {
    fn new(points: &[Point2], cell: f64) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut grid = Self {
            origin: lo,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for (i, &p) in points.iter().enumerate() {
            let (cx, cy) = grid.cell_of(p);
            grid.cells[cy * nx + cx].push(i as u32);
        }
        grid
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let cy = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (cx.min(self.nx - 1), cy.min(self.ny - 1))
    }

    /// Indices of points within the 3×3 block of cells around `p`.
    fn around(&self, p: Point2) -> impl Iterator<Item = u32> + '_ {
        let (cx, cy) = self.cell_of(p);
        let xs = cx.saturating_sub(1)..=(cx + 1).min(self.nx - 1);
        xs.flat_map(move |x| {
            let ys = cy.saturating_sub(1)..=(cy + 1).min(self.ny - 1);
            ys.flat_map(move |y| self.cells[y * self.nx + x].iter().copied())
        })
    }
}

/// Per-polygon part of the mesh.
#[derive(Debug, Clone)]
pub(crate) struct PolygonMesh {
    pub(crate) points: Vec<Point2>,
    pub(crate) global: Vec<VertexId>,
    /// Local indices along each polygon edge, from its start vertex to its end vertex.
    pub(crate) edge_points: Vec<Vec<u32>>,
    pub(crate) marked: Vec<u32>,
    grid: Grid,
}

/// Graph approximation of a cone surface.
///
/// Vertices are polygon vertices, evenly spaced points on every polygon edge,
/// marked points, and a triangular lattice of spacing `h` inside each polygon.
/// Each polygon is triangulated with its boundary points as constraints, and
/// any two vertices of the same polygon within `radius_factor · h` of each
/// other are joined by a straight edge weighted by its Euclidean length.
/// Since every edge is a genuine segment on the surface, graph distances
/// never undershoot geodesic distances.
#[derive(Debug, Clone)]
pub struct MeshGraph {
    surface: Arc<ConeSurface>,
    options: MeshOptions,
    pub(crate) polys: Vec<PolygonMesh>,
    charts: Vec<Vec<ChartPos>>,
    cone_vertex: Vec<VertexId>,
    edges: Vec<MeshEdge>,
    arc_offsets: Vec<u32>,
    arc_target: Vec<VertexId>,
    arc_weight: Vec<f64>,
    arc_edge: Vec<u32>,
    triangles: Vec<MeshTriangle>,
    tri_edge_ends: Vec<[VertexId; 2]>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Mesh `surface` with lattice spacing `h` and the default edge radius.
pub fn refine(surface: &ConeSurface, h: f64) -> Result<MeshGraph, MeshError> {
    MeshGraph::build(Arc::new(surface.clone()), MeshOptions::new(h))
}

fn polygon_centroid(poly: &EuclideanPolygon) -> Point2 {
    let n = poly.len();
    let mut c = Point2::default();
    let mut a2 = 0.0;
    for k in 0..n {
        let (p, q) = poly.edge(k);
        let w = p.cross(q);
        a2 += w;
        c = c + (p + q) * w;
    }
    c * (1.0 / (3.0 * a2))
}

fn lattice_points(poly: &EuclideanPolygon, h: f64) -> Vec<Point2> {
    let anchor = poly.marked.first().copied().unwrap_or_else(|| polygon_centroid(poly));
    let (p0, p1) = poly.edge(0);
    let phase = (p1 - p0).angle();
    let a = Point2::polar(h, phase);
    let b = Point2::polar(h, phase + std::f64::consts::FRAC_PI_3);
    // Lattice coordinates of p - anchor = i a + j b.
    let det = a.cross(b);
    let coords = |p: Point2| {
        let d = p - anchor;
        (d.cross(b) / det, a.cross(d) / det)
    };
    let (mut imin, mut imax, mut jmin, mut jmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &v in &poly.vertices {
        let (i, j) = coords(v);
        imin = imin.min(i);
        imax = imax.max(i);
        jmin = jmin.min(j);
        jmax = jmax.max(j);
    }
    let clearance = BOUNDARY_CLEARANCE * h;
    let mut out = Vec::new();
    for j in (jmin.floor() as i64 - 1)..=(jmax.ceil() as i64 + 1) {
        for i in (imin.floor() as i64 - j.abs() - 1)..=(imax.ceil() as i64 + j.abs() + 1) {
            let p = anchor + a * i as f64 + b * j as f64;
            if !poly.contains(p) || poly.boundary_distance(p) < clearance {
                continue;
            }
            if poly.marked.iter().any(|m| m.dist(p) < clearance) {
                continue;
            }
            out.push(p);
        }
    }
    out
}

fn segment_inside(poly: &EuclideanPolygon, p: Point2, q: Point2) -> bool {
    let scale = poly.diameter();
    let eps = 1e-12 * scale * scale;
    for k in 0..poly.len() {
        let (a, b) = poly.edge(k);
        let d1 = (b - a).cross(p - a);
        let d2 = (b - a).cross(q - a);
        let d3 = (q - p).cross(a - p);
        let d4 = (q - p).cross(b - p);
        if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
        {
            return false;
        }
    }
    let mid = p.lerp(q, 0.5);
    poly.contains(mid) || poly.boundary_distance(mid) <= 1e-9 * scale
}

impl MeshGraph {
    pub fn build(surface: Arc<ConeSurface>, options: MeshOptions) -> Result<Self, MeshError> {
        let h = options.h;
        if !(h > 0.0 && h.is_finite()) || !(options.radius_factor >= 1.0) {
            return Err(MeshError::InvalidSpacing(h));
        }
        let shortest = surface.shortest_edge();
        if h >= shortest {
            return Err(MeshError::MeshTooCoarse { h, shortest });
        }
        let polygons = surface.polygons();

        // Segment counts agree on both sides of every gluing.
        let mut segments: Vec<Vec<usize>> = polygons.iter().map(|p| vec![0; p.len()]).collect();
        for (p, poly) in polygons.iter().enumerate() {
            for k in 0..poly.len() {
                let (q, j) = surface.partner(p, k);
                let len = poly.edge_length(k).max(polygons[q].edge_length(j));
                let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
                segments[p][k] = n;
            }
        }

        let mut polys = Vec::with_capacity(polygons.len());
        let mut local_triangles: Vec<Vec<[u32; 3]>> = Vec::with_capacity(polygons.len());
        for (p, poly) in polygons.iter().enumerate() {
            let n = poly.len();
            let mut points: Vec<Point2> = poly.vertices.clone();
            let mut edge_points = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = poly.edge(k);
                let m = segments[p][k];
                let mut ids = vec![k as u32];
                for i in 1..m {
                    ids.push(points.len() as u32);
                    points.push(a.lerp(b, i as f64 / m as f64));
                }
                ids.push(((k + 1) % n) as u32);
                edge_points.push(ids);
            }
            let marked: Vec<u32> = poly
                .marked
                .iter()
                .map(|&m| {
                    points.push(m);
                    (points.len() - 1) as u32
                })
                .collect();
            points.extend(lattice_points(poly, h));

            let mut cdt = ConstrainedDelaunayTriangulation::<spade::Point2<f64>>::new();
            let mut handles = Vec::with_capacity(points.len());
            for &q in &points {
                let hd = cdt
                    .insert(spade::Point2::new(q.x, q.y))
                    .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
                handles.push(hd);
            }
            let mut local_of = HashMap::with_capacity(points.len());
            for (i, hd) in handles.iter().enumerate() {
                if local_of.insert(hd.index(), i as u32).is_some() {
                    return Err(MeshError::Triangulation(format!(
                        "duplicate mesh point in polygon {}",
                        poly.id
                    )));
                }
            }
            for ids in &edge_points {
                for w in ids.windows(2) {
                    cdt.add_constraint(handles[w[0] as usize], handles[w[1] as usize]);
                }
            }
            // Bit k set when the point lies on polygon edge k.
            let mut on_edge = vec![0u64; points.len()];
            for (k, ids) in edge_points.iter().enumerate() {
                for &l in ids {
                    on_edge[l as usize] |= 1 << (k % 64);
                }
            }
            let convex = poly.is_convex();
            let mut tris = Vec::new();
            for face in cdt.inner_faces() {
                let vs = face.vertices().map(|v| local_of[&v.fix().index()]);
                // Slivers between collinear boundary points.
                if vs.iter().fold(u64::MAX, |m, &l| m & on_edge[l as usize]) != 0 {
                    continue;
                }
                let [a, b, c] = vs.map(|i| points[i as usize]);
                if !convex && !poly.contains((a + b + c) * (1.0 / 3.0)) {
                    continue;
                }
                let area = geom::triangle_area(a, b, c);
                if area > 0.0 {
                    tris.push(vs);
                } else {
                    tris.push([vs[0], vs[2], vs[1]]);
                }
            }
            let total: f64 = tris
                .iter()
                .map(|t| {
                    let [a, b, c] = t.map(|i| points[i as usize]);
                    geom::triangle_area(a, b, c)
                })
                .sum();
            if (total - poly.signed_area()).abs() > 1e-9 * poly.signed_area() {
                return Err(MeshError::Triangulation(format!(
                    "triangles of polygon {} cover area {total}, expected {}",
                    poly.id,
                    poly.signed_area()
                )));
            }
            let grid = Grid::new(&points, options.radius_factor * h);
            polys.push(PolygonMesh {
                global: Vec::new(),
                points,
                edge_points,
                marked,
                grid,
            });
            local_triangles.push(tris);
        }

        // Weld boundary points across gluings.
        let offsets: Vec<usize> = polys
            .iter()
            .scan(0usize, |acc, pm| {
                let o = *acc;
                *acc += pm.points.len();
                Some(o)
            })
            .collect();
        let total_local: usize = polys.iter().map(|pm| pm.points.len()).sum();
        let mut uf = UnionFind((0..total_local).collect());
        for (p, poly) in polygons.iter().enumerate() {
            for k in 0..poly.len() {
                let (q, j) = surface.partner(p, k);
                let mine = &polys[p].edge_points[k];
                let theirs = &polys[q].edge_points[j];
                let m = mine.len() - 1;
                for i in 0..=m {
                    uf.union(offsets[p] + mine[i] as usize, offsets[q] + theirs[m - i] as usize);
                }
            }
        }
        let mut root_id: HashMap<usize, VertexId> = HashMap::new();
        let mut charts: Vec<Vec<ChartPos>> = Vec::new();
        for (p, pm) in polys.iter_mut().enumerate() {
            pm.global = Vec::with_capacity(pm.points.len());
            for (l, &pos) in pm.points.iter().enumerate() {
                let r = uf.find(offsets[p] + l);
                let g = *root_id.entry(r).or_insert_with(|| {
                    charts.push(Vec::new());
                    (charts.len() - 1) as VertexId
                });
                charts[g as usize].push(ChartPos {
                    polygon: p,
                    local: l as u32,
                    pos,
                });
                pm.global.push(g);
            }
        }

        let cone_vertex = surface
            .cone_points()
            .iter()
            .map(|c| match &c.location {
                ConeLocation::Vertex { corners } => polys[corners[0].polygon].global[corners[0].vertex],
                ConeLocation::Marked { polygon, index } => {
                    let pm = &polys[*polygon];
                    pm.global[pm.marked[*index] as usize]
                }
            })
            .collect();

        // Triangulation edges: boundary segments are shared with the partner polygon.
        let mut tri_edge_id: HashMap<(usize, u32, u32), u32> = HashMap::new();
        let mut tri_edge_ends: Vec<[VertexId; 2]> = Vec::new();
        let key = |p: usize, a: u32, b: u32| (p, a.min(b), a.max(b));
        for (p, poly) in polygons.iter().enumerate() {
            for k in 0..poly.len() {
                let (q, j) = surface.partner(p, k);
                if (q, j) < (p, k) {
                    continue;
                }
                let mine = &polys[p].edge_points[k];
                let theirs = &polys[q].edge_points[j];
                let m = mine.len() - 1;
                for i in 0..m {
                    let id = tri_edge_ends.len() as u32;
                    let (a, b) = (mine[i], mine[i + 1]);
                    tri_edge_ends.push([polys[p].global[a as usize], polys[p].global[b as usize]]);
                    tri_edge_id.insert(key(p, a, b), id);
                    tri_edge_id.insert(key(q, theirs[m - i], theirs[m - i - 1]), id);
                }
            }
        }
        let mut triangles = Vec::new();
        let mut incidence: Vec<u8> = vec![0; tri_edge_ends.len()];
        for (p, tris) in local_triangles.iter().enumerate() {
            let pm = &polys[p];
            for &t in tris {
                let mut edges = [0u32; 3];
                for i in 0..3 {
                    let (a, b) = (t[i], t[(i + 1) % 3]);
                    let id = *tri_edge_id.entry(key(p, a, b)).or_insert_with(|| {
                        tri_edge_ends.push([pm.global[a as usize], pm.global[b as usize]]);
                        incidence.push(0);
                        (tri_edge_ends.len() - 1) as u32
                    });
                    incidence[id as usize] += 1;
                    edges[i] = id;
                }
                let [a, b, c] = t.map(|i| pm.points[i as usize]);
                triangles.push(MeshTriangle {
                    polygon: p,
                    vertices: t.map(|i| pm.global[i as usize]),
                    local: t,
                    edges,
                    area: geom::triangle_area(a, b, c),
                });
            }
        }
        if let Some(bad) = incidence.iter().position(|&c| c != 2) {
            return Err(MeshError::Triangulation(format!(
                "triangulation edge {bad} has {} incident triangles",
                incidence[bad]
            )));
        }

        // Graph edges: all same-polygon pairs within the radius, plus triangle sides.
        let radius = options.radius_factor * h * (1.0 + 1e-12);
        let mut edges = Vec::new();
        for (p, pm) in polys.iter().enumerate() {
            let poly = &polygons[p];
            let convex = poly.is_convex();
            let mut seen: HashSet<(u32, u32)> = HashSet::new();
            let mut push = |a: u32, b: u32, edges: &mut Vec<MeshEdge>| {
                let k = (a.min(b), a.max(b));
                if a == b || !seen.insert(k) {
                    return;
                }
                let (pa, pb) = (pm.points[k.0 as usize], pm.points[k.1 as usize]);
                edges.push(MeshEdge {
                    a: pm.global[k.0 as usize],
                    b: pm.global[k.1 as usize],
                    polygon: p,
                    local: [k.0, k.1],
                    weight: pa.dist(pb),
                });
            };
            for t in &local_triangles[p] {
                for i in 0..3 {
                    push(t[i], t[(i + 1) % 3], &mut edges);
                }
            }
            for (a, &pa) in pm.points.iter().enumerate() {
                for b in pm.grid.around(pa) {
                    if b as usize <= a {
                        continue;
                    }
                    let pb = pm.points[b as usize];
                    if pa.dist(pb) <= radius && (convex || segment_inside(poly, pa, pb)) {
                        push(a as u32, b, &mut edges);
                    }
                }
            }
        }

        let nv = charts.len();
        let mut degree = vec![0u32; nv + 1];
        for e in &edges {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
        let mut arc_offsets = Vec::with_capacity(nv + 1);
        let mut acc = 0u32;
        for d in &degree[..nv] {
            arc_offsets.push(acc);
            acc += d;
        }
        arc_offsets.push(acc);
        let mut fill = arc_offsets.clone();
        let mut arc_target = vec![0; acc as usize];
        let mut arc_weight = vec![0.0; acc as usize];
        let mut arc_edge = vec![0; acc as usize];
        for (id, e) in edges.iter().enumerate() {
            for (from, to) in [(e.a, e.b), (e.b, e.a)] {
                let slot = fill[from as usize] as usize;
                fill[from as usize] += 1;
                arc_target[slot] = to;
                arc_weight[slot] = e.weight;
                arc_edge[slot] = id as u32;
            }
        }

        let mesh = Self {
            surface,
            options,
            polys,
            charts,
            cone_vertex,
            edges,
            arc_offsets,
            arc_target,
            arc_weight,
            arc_edge,
            triangles,
            tri_edge_ends,
        };
        if !mesh.is_connected() {
            return Err(MeshError::Disconnected);
        }
        Ok(mesh)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_vertices()];
        let mut stack = vec![0 as VertexId];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for (w, _, _) in self.arcs(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.num_vertices()
    }

    pub fn surface(&self) -> &ConeSurface {
        &self.surface
    }

    pub fn surface_arc(&self) -> &Arc<ConeSurface> {
        &self.surface
    }

    pub fn h(&self) -> f64 {
        self.options.h
    }

    pub fn options(&self) -> MeshOptions {
        self.options
    }

    pub fn num_vertices(&self) -> usize {
        self.charts.len()
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[MeshTriangle] {
        &self.triangles
    }

    pub fn num_triangulation_edges(&self) -> usize {
        self.tri_edge_ends.len()
    }

    pub fn triangulation_edge(&self, id: u32) -> [VertexId; 2] {
        self.tri_edge_ends[id as usize]
    }

    /// Outgoing arcs of `v` as `(target, weight, edge id)`.
    pub fn arcs(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64, u32)> + '_ {
        let lo = self.arc_offsets[v as usize] as usize;
        let hi = self.arc_offsets[v as usize + 1] as usize;
        (lo..hi).map(move |i| (self.arc_target[i], self.arc_weight[i], self.arc_edge[i]))
    }

    /// Cone point `i` as a mesh vertex.
    pub fn cone_vertex(&self, cone_point: usize) -> VertexId {
        self.cone_vertex[cone_point]
    }

    pub fn cone_vertices(&self) -> &[VertexId] {
        &self.cone_vertex
    }

    pub fn charts(&self, v: VertexId) -> &[ChartPos] {
        &self.charts[v as usize]
    }

    pub fn chart_in(&self, v: VertexId, polygon: usize) -> Option<ChartPos> {
        self.charts[v as usize].iter().find(|c| c.polygon == polygon).copied()
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        let c = &self.charts[v as usize];
        c.len() > 1
            || self.polys[c[0].polygon]
                .edge_points
                .iter()
                .any(|e| e.contains(&c[0].local))
    }

    /// Vertices lying on polygon edges (the 1-skeleton of the polygon decomposition).
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .polys
            .iter()
            .flat_map(|pm| {
                pm.edge_points
                    .iter()
                    .flat_map(|e| e.iter().map(|&l| pm.global[l as usize]))
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Mesh vertex of polygon `polygon` within `tol` of chart point `p`.
    pub fn locate(&self, polygon: usize, p: Point2, tol: f64) -> Option<VertexId> {
        let pm = &self.polys[polygon];
        pm.grid
            .around(p)
            .map(|l| (pm.points[l as usize].dist(p), l))
            .filter(|(d, _)| *d <= tol)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, l)| pm.global[l as usize])
    }

    /// The mesh vertex of `polygon` closest to `p`.
    pub fn nearest(&self, polygon: usize, p: Point2) -> VertexId {
        let pm = &self.polys[polygon];
        let best = pm
            .points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.dist(p).total_cmp(&b.1.dist(p)))
            .unwrap()
            .0;
        pm.global[best]
    }

    /// Mesh vertices along edge `k` of `polygon`, in order.
    pub fn edge_vertices(&self, polygon: usize, k: usize) -> Vec<VertexId> {
        let pm = &self.polys[polygon];
        pm.edge_points[k].iter().map(|&l| pm.global[l as usize]).collect()
    }

    /// Mesh vertex nearest to the midpoint of every polygon edge (each glued edge once).
    pub fn edge_midpoints(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        for (p, pm) in self.polys.iter().enumerate() {
            for (k, ids) in pm.edge_points.iter().enumerate() {
                if self.surface.partner(p, k) < (p, k) {
                    continue;
                }
                out.push(pm.global[ids[ids.len() / 2] as usize]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Largest graph-edge length divided by `h`.
    pub fn max_edge_ratio(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max) / self.options.h
    }

    /// Worst relative overestimate of a straight segment by lattice paths: with
    /// neighbour directions at most `β` apart it is `1/cos(β/2) − 1`.
    pub fn directional_distortion(&self) -> f64 {
        lattice_distortion(self.options.radius_factor)
    }
}

/// Distortion bound of the triangular lattice with all neighbours within
/// `radius` lattice spacings.
pub fn lattice_distortion(radius: f64) -> f64 {
    let r = radius.floor() as i64 + 1;
    let mut angles = Vec::new();
    for i in -2 * r..=2 * r {
        for j in -2 * r..=2 * r {
            let v = Point2::new(i as f64 + 0.5 * j as f64, j as f64 * 3f64.sqrt() / 2.0);
            let n = v.norm();
            if n > 0.0 && n <= radius + 1e-9 {
                angles.push(v.angle());
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut gap: f64 = std::f64::consts::TAU - (angles[angles.len() - 1] - angles[0]);
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    1.0 / (gap / 2.0).cos() - 1.0
}
