//! Voronoi cells of a set of sites on a meshed surface, and the area and
//! systolic-ratio bounds evaluated against them.

mod bounds;

pub use bounds::{
    bound_report, cell_area_lower_bound, euler_edge_bound, hyperelliptic_disk_bound, jensen_area_bound,
    pu_displacement_bound, BoundEntry, BoundError, BoundReport, DiskBound,
};

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::flatsurf::ConeLocation;
use crate::geom::{ccw_angle, Point2};
use crate::metric_graph::{shortest_paths, MeshError, MeshGraph, ShortestPaths, VertexId};

#[derive(Debug, Clone, Serialize)]
pub struct VoronoiCell {
    pub site: VertexId,
    pub area: f64,
    /// Number of boundary arcs.
    pub side_count: usize,
    /// Angles at the site between consecutive Voronoi vertices, counterclockwise.
    pub center_angles: Vec<f64>,
    /// Total angle at the site.
    pub site_angle: f64,
    pub triangles: usize,
    /// Largest distance from the site to a vertex of the cell.
    pub radius: f64,
}

/// A connected piece of the common boundary of two cells.
#[derive(Debug, Clone, Serialize)]
pub struct DualArc {
    pub cells: [usize; 2],
    /// Voronoi vertices (junction clusters) at its ends; empty for closed arcs.
    pub endpoints: Vec<usize>,
    pub length: f64,
}

/// Counts for the quotient by the hyperelliptic involution, available when
/// there are `2g + 2` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SphereStats {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VoronoiDecomposition {
    pub sites: Vec<VertexId>,
    pub cells: Vec<VoronoiCell>,
    pub arcs: Vec<DualArc>,
    /// Number of Voronoi vertices (clusters of mesh vertices touching three or more cells).
    pub voronoi_vertices: usize,
    pub sphere: Option<SphereStats>,
    pub total_area: f64,
    pub surface_area: f64,
    /// `site_distances[i][j]`: graph distance between sites `i` and `j`.
    pub site_distances: Vec<Vec<f64>>,
    pub max_cell_radius: f64,
    #[serde(skip)]
    pub triangle_cell: Vec<usize>,
    pub surface_fingerprint: u64,
}

impl VoronoiDecomposition {
    /// Adjacent cell pairs, each once, however many arcs they share.
    pub fn dual_edges(&self) -> Vec<[usize; 2]> {
        let mut pairs: Vec<[usize; 2]> = self.arcs.iter().map(|a| a.cells).collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub fn min_site_distance(&self) -> f64 {
        let n = self.sites.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.site_distances[i][j])
            .fold(f64::INFINITY, f64::min)
    }
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

/// Developed angle of the direction from `site` (local index `l_site` of
/// `polygon`) towards chart point `q`.
fn developed_angle(
    mesh: &MeshGraph,
    site: VertexId,
    cone: Option<usize>,
    polygon: usize,
    l_site: u32,
    q: Point2,
) -> Option<f64> {
    let pm = &mesh.polys[polygon];
    let p = pm.points[l_site as usize];
    if q.dist(p) == 0.0 {
        return None;
    }
    let poly = &mesh.surface().polygons()[polygon];
    if let Some(ConeLocation::Vertex { corners }) = cone.map(|c| &mesh.surface().cone_points()[c].location) {
        let corner = corners
            .iter()
            .find(|c| c.polygon == polygon && c.vertex == l_site as usize)?;
        let (a, b) = poly.edge(corner.vertex);
        let t = ccw_angle(b - a, q - p);
        return (t <= corner.angle + 1e-9).then_some(corner.offset + t);
    }
    let charts = mesh.charts(site);
    if charts.len() == 1 {
        return Some((q - p).angle().rem_euclid(TAU));
    }
    // Interior point of a polygon edge: two half-discs.
    let slot = charts.iter().position(|c| c.polygon == polygon && c.local == l_site)?;
    let k = pm.edge_points.iter().position(|e| e.contains(&l_site))?;
    let (a, b) = poly.edge(k);
    let t = ccw_angle(b - a, q - p);
    (t <= PI + 1e-9).then_some(slot as f64 * PI + t)
}

fn site_total_angle(mesh: &MeshGraph, cone: Option<usize>) -> f64 {
    cone.map_or(TAU, |c| mesh.surface().cone_points()[c].total_angle)
}

/// Direction of `target` as seen from the site: a straight segment inside a
/// shared chart when that segment is no longer than the mesh distance,
/// otherwise the first edge of the shortest-path tree.
fn direction(mesh: &MeshGraph, tree: &ShortestPaths, cone: Option<usize>, target: VertexId) -> Option<f64> {
    let site = tree.source;
    let d = tree.dist[target as usize];
    let mut best: Option<(f64, f64)> = None;
    for sc in mesh.charts(site) {
        let poly = &mesh.surface().polygons()[sc.polygon];
        for tc in mesh.charts(target).iter().filter(|c| c.polygon == sc.polygon) {
            let len = sc.pos.dist(tc.pos);
            if len > d * (1.0 + 1e-9) || !poly.is_convex() {
                continue;
            }
            if let Some(a) = developed_angle(mesh, site, cone, sc.polygon, sc.local, tc.pos) {
                if best.is_none_or(|(l, _)| len < l) {
                    best = Some((len, a));
                }
            }
        }
    }
    if let Some((_, a)) = best {
        return Some(a);
    }
    let e = mesh.edges()[tree.first_edge(mesh, target)? as usize];
    let (ls, lq) = if mesh
        .charts(site)
        .iter()
        .any(|c| c.polygon == e.polygon && c.local == e.local[0])
    {
        (e.local[0], e.local[1])
    } else {
        (e.local[1], e.local[0])
    };
    developed_angle(
        mesh,
        site,
        cone,
        e.polygon,
        ls,
        mesh.polys[e.polygon].points[lq as usize],
    )
}

/// Voronoi decomposition of the mesh with respect to `sites`.
///
/// Each triangle goes to the site minimising the sum of the distances to its
/// three corners (ties to the lower site index).
pub fn voronoi_decompose(mesh: &MeshGraph, sites: &[VertexId]) -> Result<VoronoiDecomposition, MeshError> {
    if let Some(&bad) = sites.iter().find(|&&s| s as usize >= mesh.num_vertices()) {
        return Err(MeshError::UnknownVertex(bad));
    }
    let n = sites.len();
    let trees: Vec<ShortestPaths> = sites.par_iter().map(|&s| shortest_paths(mesh, s, None)).collect();

    let tris = mesh.triangles();
    let triangle_cell: Vec<usize> = tris
        .iter()
        .map(|t| {
            (0..n)
                .map(|i| t.vertices.iter().map(|&v| trees[i].dist[v as usize]).sum::<f64>())
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
        .collect();

    let mut area = vec![0.0; n];
    let mut count = vec![0usize; n];
    let mut radius = vec![0.0f64; n];
    let mut vertex_cells: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); mesh.num_vertices()];
    for (t, &c) in tris.iter().zip(&triangle_cell) {
        area[c] += t.area;
        count[c] += 1;
        for &v in &t.vertices {
            vertex_cells[v as usize].insert(c);
            radius[c] = radius[c].max(trees[c].dist[v as usize]);
        }
    }

    // Boundary triangulation edges between different cells.
    let mut edge_tris: Vec<[u32; 2]> = vec![[u32::MAX; 2]; mesh.num_triangulation_edges()];
    let mut edge_len = vec![0.0; mesh.num_triangulation_edges()];
    for (ti, t) in tris.iter().enumerate() {
        let pts = &mesh.polys[t.polygon].points;
        for (k, &e) in t.edges.iter().enumerate() {
            let (a, b) = (t.local[k], t.local[(k + 1) % 3]);
            edge_len[e as usize] = pts[a as usize].dist(pts[b as usize]);
            let slot = &mut edge_tris[e as usize];
            if slot[0] == u32::MAX {
                slot[0] = ti as u32;
            } else {
                slot[1] = ti as u32;
            }
        }
    }
    let junction: Vec<bool> = vertex_cells.iter().map(|s| s.len() >= 3).collect();
    let mut boundary: Vec<(u32, [usize; 2])> = Vec::new();
    for (e, [t1, t2]) in edge_tris.iter().enumerate() {
        let (c1, c2) = (triangle_cell[*t1 as usize], triangle_cell[*t2 as usize]);
        if c1 != c2 {
            boundary.push((e as u32, [c1.min(c2), c1.max(c2)]));
        }
    }

    // Voronoi vertices: junction vertices joined by boundary edges form one cluster.
    let nv = mesh.num_vertices();
    let mut cluster_uf = UnionFind((0..nv).collect());
    for &(e, _) in &boundary {
        let [a, b] = mesh.triangulation_edge(e);
        if junction[a as usize] && junction[b as usize] {
            cluster_uf.union(a as usize, b as usize);
        }
    }
    let mut cluster_id: HashMap<usize, usize> = HashMap::new();
    let mut cluster_members: Vec<Vec<VertexId>> = Vec::new();
    for v in 0..nv {
        if junction[v] {
            let r = cluster_uf.find(v);
            let id = *cluster_id.entry(r).or_insert_with(|| {
                cluster_members.push(Vec::new());
                cluster_members.len() - 1
            });
            cluster_members[id].push(v as VertexId);
        }
    }

    // Arcs: boundary edges of one cell pair, connected through non-junction vertices.
    let mut arc_uf = UnionFind((0..boundary.len()).collect());
    let mut last_at: HashMap<(VertexId, [usize; 2]), usize> = HashMap::new();
    for (i, &(e, pair)) in boundary.iter().enumerate() {
        for v in mesh.triangulation_edge(e) {
            if junction[v as usize] {
                continue;
            }
            if let Some(&j) = last_at.get(&(v, pair)) {
                arc_uf.union(i, j);
            }
            last_at.insert((v, pair), i);
        }
    }
    let mut arc_index: HashMap<usize, usize> = HashMap::new();
    let mut arcs: Vec<DualArc> = Vec::new();
    let mut arc_interior: Vec<bool> = Vec::new();
    for (i, &(e, pair)) in boundary.iter().enumerate() {
        let r = arc_uf.find(i);
        let id = *arc_index.entry(r).or_insert_with(|| {
            arcs.push(DualArc {
                cells: pair,
                endpoints: Vec::new(),
                length: 0.0,
            });
            arc_interior.push(false);
            arcs.len() - 1
        });
        let ends = mesh.triangulation_edge(e);
        arcs[id].length += edge_len[e as usize];
        for v in ends {
            if junction[v as usize] {
                let c = cluster_id[&cluster_uf.find(v as usize)];
                if !arcs[id].endpoints.contains(&c) {
                    arcs[id].endpoints.push(c);
                }
            } else {
                arc_interior[id] = true;
            }
        }
    }
    let arcs: Vec<DualArc> = arcs
        .into_iter()
        .zip(arc_interior)
        .filter(|(_, interior)| *interior)
        .map(|(mut a, _)| {
            a.endpoints.sort_unstable();
            a
        })
        .collect();

    let cone_of: HashMap<VertexId, usize> = mesh.cone_vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let cells: Vec<VoronoiCell> = (0..n)
        .map(|i| {
            let cone = cone_of.get(&sites[i]).copied();
            let site_angle = site_total_angle(mesh, cone);
            let mut corners: BTreeSet<usize> = BTreeSet::new();
            let mut side_count = 0;
            for a in arcs.iter().filter(|a| a.cells.contains(&i)) {
                side_count += 1;
                corners.extend(a.endpoints.iter().copied());
            }
            let mut dirs: Vec<f64> = corners
                .iter()
                .filter_map(|&c| {
                    let rep = *cluster_members[c]
                        .iter()
                        .min_by(|a, b| trees[i].dist[**a as usize].total_cmp(&trees[i].dist[**b as usize]))
                        .unwrap();
                    direction(mesh, &trees[i], cone, rep)
                })
                .collect();
            dirs.sort_by(f64::total_cmp);
            let center_angles = if dirs.len() < 2 {
                Vec::new()
            } else {
                let mut gaps: Vec<f64> = dirs.windows(2).map(|w| w[1] - w[0]).collect();
                gaps.push(site_angle - dirs[dirs.len() - 1] + dirs[0]);
                gaps
            };
            VoronoiCell {
                site: sites[i],
                area: area[i],
                side_count,
                center_angles,
                site_angle,
                triangles: count[i],
                radius: radius[i],
            }
        })
        .collect();

    let genus = mesh.surface().genus() as usize;
    let sphere =
        (genus >= 1 && n == 2 * genus + 2 && cluster_members.len().is_multiple_of(2) && arcs.len().is_multiple_of(2))
            .then(|| {
                let (v, e, f) = (cluster_members.len() / 2, arcs.len() / 2, n);
                SphereStats {
                    vertices: v,
                    edges: e,
                    faces: f,
                    euler_characteristic: v as i64 - e as i64 + f as i64,
                }
            });
    let site_distances = (0..n)
        .map(|i| (0..n).map(|j| trees[i].dist[sites[j] as usize]).collect())
        .collect();
    let max_cell_radius = cells.iter().map(|c| c.radius).fold(0.0, f64::max);
    Ok(VoronoiDecomposition {
        sites: sites.to_vec(),
        total_area: area.iter().sum(),
        surface_area: mesh.surface().area(),
        cells,
        arcs,
        voronoi_vertices: cluster_members.len(),
        sphere,
        site_distances,
        max_cell_radius,
        triangle_cell,
        surface_fingerprint: mesh.surface().fingerprint(),
    })
}
