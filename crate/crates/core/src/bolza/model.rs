//! The flat metric on the Bolza surface glued from six regular octagons, and
//! the same metric assembled from 48 isosceles triangles.
//!
//! Both builds start from the hyperelliptic double cover of the octahedral
//! sphere. A `Z/2` label on each octahedron edge says whether crossing it
//! swaps sheets; the labelled edges form a perfect matching, so the monodromy
//! around every octahedron vertex is odd and each vertex has a single preimage
//! (a Weierstrass point). The 8 faces lift to 16 "equilateral" triangles.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_8, PI, TAU};

use serde::Serialize;
use thiserror::Error;

use super::sphere::{sphere_complexes, SpherePair};
use crate::exact::{func, num, Expr, Func};
use crate::flatsurf::{
    build_surface, check_gauss_bonnet, is_cat0, ConeSurface, EdgeGluing, EdgeRef, EuclideanPolygon, SurfaceError,
    DEFAULT_TOLERANCE,
};
use crate::geom::Point2;

#[derive(Debug, Error)]
pub enum BolzaError {
    #[error("x must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("constructed surface violates an invariant: {0}")]
    ConstructionInvariantViolated(String),
    #[error("surface is not CAT(0): cone point {index} has total angle {angle}")]
    NotCat0 { index: usize, angle: f64 },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Octahedron edges whose crossing swaps sheets: {+X,+Y}, {-Y,+Z}, {-Z,-X}.
const SHEET_SWAP: [[usize; 2]; 3] = [[0, 2], [3, 4], [5, 1]];

/// Combinatorics of the branched double cover of the octahedral sphere.
struct LiftedOctahedron {
    sphere: SpherePair,
    swaps: Vec<bool>,
}

/// A lifted triangle: octahedron face and sheet.
type Lift = (usize, usize);

impl LiftedOctahedron {
    fn new() -> Self {
        let sphere = sphere_complexes();
        let swaps = sphere
            .octahedral
            .edges
            .iter()
            .map(|&[a, b]| SHEET_SWAP.iter().any(|&[p, q]| (p, q) == (a, b) || (p, q) == (b, a)))
            .collect();
        Self { sphere, swaps }
    }

    fn face(&self, f: usize) -> &[usize] {
        &self.sphere.octahedral.faces[f]
    }

    fn edge(&self, a: usize, b: usize) -> usize {
        self.sphere.octahedral.edge_index(a, b).unwrap()
    }

    /// The lifted triangle across octahedron edge `{a, b}` from `(f, s)`.
    fn across(&self, (f, s): Lift, a: usize, b: usize) -> Lift {
        let e = self.edge(a, b);
        let g = self
            .sphere
            .octahedral
            .faces_of_edge(e)
            .into_iter()
            .find(|&g| g != f)
            .unwrap();
        (g, s ^ usize::from(self.swaps[e]))
    }

    /// Identifier of the lifted edge between `t` and its neighbour across `{a, b}`:
    /// the octahedron edge plus the sheet on its lower-indexed face.
    fn lifted_edge(&self, t: Lift, a: usize, b: usize) -> (usize, usize) {
        let u = self.across(t, a, b);
        let low = if t.0 < u.0 { t } else { u };
        (self.edge(a, b), low.1)
    }

    /// The eight lifted triangles around octahedron vertex `v`, counterclockwise.
    fn star(&self, v: usize) -> Vec<Lift> {
        let f0 = (0..8).find(|&f| self.face(f).contains(&v)).unwrap();
        let mut out = vec![(f0, 0)];
        loop {
            let t = *out.last().unwrap();
            let face = self.face(t.0);
            let i = face.iter().position(|&w| w == v).unwrap();
            let prev = face[(i + 2) % 3];
            let next = self.across(t, v, prev);
            if next == out[0] {
                break;
            }
            out.push(next);
            assert!(out.len() <= 16, "star around a vertex did not close");
        }
        out
    }
}

/// One lift of an octahedron edge: a side shared by two octagons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LiftedEdge {
    pub octahedron_edge: usize,
    pub sheet: usize,
    /// `(octagon, side)` on each end; octagon index = octahedron vertex.
    pub sides: [(usize, usize); 2],
}

/// The metric `g_O` on the Bolza surface.
#[derive(Debug, Clone)]
pub struct BolzaOctagonModel {
    /// Distance between opposite octagon sides (and between adjacent Weierstrass points).
    pub x: f64,
    /// Octagon side length.
    pub y: f64,
    pub surface: ConeSurface,
    /// Cone point indices of the octagon centres, indexed by octagon.
    pub weierstrass_points: Vec<usize>,
    /// Cone point indices of the sixteen 9π/4 points.
    pub special_points: Vec<usize>,
    pub exact_area: Expr,
    pub exact_systole: Expr,
    pub lifted_edges: Vec<LiftedEdge>,
}

fn check_scale(x: f64) -> Result<(), BolzaError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(BolzaError::InvalidScale(x))
    }
}

fn tan_pi_8() -> Expr {
    func(Func::Tan, Expr::Pi / num(8.0))
}

/// Checks items (1)–(3) of the construction on a built surface: genus 2,
/// sixteen points of angle 9π/4, every other point smooth, CAT(0) and the
/// angle budget.
fn verify_bolza_metric(surface: &ConeSurface) -> Result<(Vec<usize>, Vec<usize>), BolzaError> {
    let bad = |m: String| BolzaError::ConstructionInvariantViolated(m);
    let eps = surface.tolerance();
    if surface.genus() != 2 {
        return Err(bad(format!("genus {} != 2", surface.genus())));
    }
    let mut smooth = Vec::new();
    let mut special = Vec::new();
    for (i, c) in surface.cone_points().iter().enumerate() {
        if c.is_smooth(eps) {
            smooth.push(i);
        } else if (c.total_angle - 9.0 * PI / 4.0).abs() <= eps * TAU {
            special.push(i);
        } else {
            return Err(bad(format!("cone point {i} has angle {}", c.total_angle)));
        }
    }
    if smooth.len() != 6 || special.len() != 16 {
        return Err(bad(format!(
            "{} smooth and {} singular points",
            smooth.len(),
            special.len()
        )));
    }
    if !is_cat0(surface).cat0 {
        return Err(bad("not CAT(0)".into()));
    }
    if check_gauss_bonnet(surface) > eps {
        return Err(bad("Gauss-Bonnet residual too large".into()));
    }
    let budget = 6.0 * TAU + 16.0 * 9.0 * PI / 4.0;
    let total: f64 = surface.cone_points().iter().map(|c| c.total_angle).sum();
    if (total - budget).abs() > eps * budget {
        return Err(bad("angle budget mismatch".into()));
    }
    Ok((smooth, special))
}

/// Six regular octagons of apothem `x/2`, one per Weierstrass point.
pub fn build_octagon_model(x: f64) -> Result<BolzaOctagonModel, BolzaError> {
    check_scale(x)?;
    let lo = LiftedOctahedron::new();
    let radius = 0.5 * x / FRAC_PI_8.cos();

    let mut polygons = Vec::with_capacity(6);
    let mut sides: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for v in 0..6 {
        let star = lo.star(v);
        if star.len() != 8 {
            return Err(BolzaError::ConstructionInvariantViolated(format!(
                "{} lifted triangles around vertex {v}",
                star.len()
            )));
        }
        for (k, &t) in star.iter().enumerate() {
            let face = lo.face(t.0);
            let i = face.iter().position(|&w| w == v).unwrap();
            sides
                .entry(lo.lifted_edge(t, v, face[(i + 2) % 3]))
                .or_default()
                .push((v, k));
        }
        // Vertex k is the centre of lifted triangle k; side k has its midpoint at angle kπ/4.
        let verts = (0..8)
            .map(|k| Point2::polar(radius, (2 * k - 1) as f64 * FRAC_PI_8))
            .collect();
        polygons.push(EuclideanPolygon::new(v, verts).with_marked(vec![Point2::new(0.0, 0.0)]));
    }

    let mut keys: Vec<_> = sides.keys().copied().collect();
    keys.sort_unstable();
    let mut gluings = Vec::with_capacity(24);
    let mut lifted_edges = Vec::with_capacity(24);
    for key in keys {
        let ends = &sides[&key];
        if ends.len() != 2 {
            return Err(BolzaError::ConstructionInvariantViolated(format!(
                "lifted edge {key:?} bounds {} octagon sides",
                ends.len()
            )));
        }
        gluings.push(EdgeGluing::new(
            EdgeRef::new(ends[0].0, ends[0].1),
            EdgeRef::new(ends[1].0, ends[1].1),
        ));
        lifted_edges.push(LiftedEdge {
            octahedron_edge: key.0,
            sheet: key.1,
            sides: [ends[0], ends[1]],
        });
    }

    let surface = build_surface(polygons, gluings, DEFAULT_TOLERANCE)?;
    let (smooth, special) = verify_bolza_metric(&surface)?;
    let weierstrass_points: Vec<usize> = (0..6).map(|v| surface.marked_cone_point(v, 0).unwrap()).collect();
    let mut sorted = weierstrass_points.clone();
    sorted.sort_unstable();
    if sorted != smooth {
        return Err(BolzaError::ConstructionInvariantViolated(
            "smooth points are not the octagon centres".into(),
        ));
    }
    // Opposite sides of every octagon must be the two lifts of one octahedron edge.
    for le in &lifted_edges {
        for &(v, k) in &le.sides {
            let opposite = lifted_edges
                .iter()
                .find(|o| o.sides.contains(&(v, (k + 4) % 8)))
                .unwrap();
            if opposite.octahedron_edge != le.octahedron_edge {
                return Err(BolzaError::ConstructionInvariantViolated(
                    "opposite octagon sides project to different edges".into(),
                ));
            }
        }
    }

    let model = BolzaOctagonModel {
        x,
        y: x * FRAC_PI_8.tan(),
        exact_area: num(12.0) * num(x).pow(num(2.0)) * tan_pi_8(),
        exact_systole: num(2.0) * num(x),
        surface,
        weierstrass_points,
        special_points: special,
        lifted_edges,
    };
    let area = model.surface.area();
    if (area - model.exact_area.eval()).abs() > DEFAULT_TOLERANCE * area {
        return Err(BolzaError::ConstructionInvariantViolated(
            "area differs from 12x²tan(π/8)".into(),
        ));
    }
    Ok(model)
}

impl BolzaOctagonModel {
    /// Systolic ratio from the closed-form fields.
    pub fn exact_systolic_ratio(&self) -> Expr {
        self.exact_systole.clone().pow(num(2.0)) / self.exact_area.clone()
    }

    /// Both lifts of octahedron edge `e`, i.e. the octagon sides crossed by the
    /// closed geodesic through the Weierstrass points at the ends of `e`.
    pub fn lifts_of(&self, e: usize) -> [LiftedEdge; 2] {
        let mut it = self.lifted_edges.iter().filter(|l| l.octahedron_edge == e).copied();
        [it.next().unwrap(), it.next().unwrap()]
    }

    /// Midpoint of side `k` of octagon `v` in that octagon's chart.
    pub fn side_midpoint(&self, v: usize, k: usize) -> Point2 {
        let (a, b) = self.surface.polygons()[v].edge(k);
        a.lerp(b, 0.5)
    }

    /// The hyperelliptic involution on a chart point: rotation by π about the centre.
    pub fn involution(&self, polygon: usize, p: Point2) -> (usize, Point2) {
        (polygon, -p)
    }
}

/// The same metric from 48 isosceles triangles with apex angle 3π/4.
pub fn build_triangle_model(x: f64) -> Result<ConeSurface, BolzaError> {
    check_scale(x)?;
    let surface = triangle_gluing(x, |_| 1.0)?;
    verify_bolza_metric(&surface)?;
    Ok(surface)
}

/// Triangle model in which the three isosceles triangles of lifted face
/// `(face, sheet)` have their apex heights multiplied by `factor`. The result is
/// a valid surface but no longer the optimal metric.
pub fn perturbed_triangle_model(x: f64, face: usize, sheet: usize, factor: f64) -> Result<ConeSurface, BolzaError> {
    check_scale(x)?;
    if !(factor > 0.0 && factor.is_finite()) || face >= 8 || sheet >= 2 {
        return Err(BolzaError::InvalidScale(factor));
    }
    Ok(triangle_gluing(x, |t| if t == (face, sheet) { factor } else { 1.0 })?)
}

fn triangle_gluing(x: f64, height: impl Fn(Lift) -> f64) -> Result<ConeSurface, SurfaceError> {
    let lo = LiftedOctahedron::new();
    let id = |(f, s): Lift, i: usize| (2 * f + s) * 3 + i;
    let mut polygons = Vec::with_capacity(48);
    let mut gluings = Vec::with_capacity(72);
    for f in 0..8 {
        for s in 0..2 {
            let apex = 0.5 * x * FRAC_PI_8.tan() * height((f, s));
            for i in 0..3 {
                // Edge 0 is the base w_i -> w_{i+1}; edge 1 runs to the apex, edge 2 back.
                polygons.push(EuclideanPolygon::new(
                    id((f, s), i),
                    vec![Point2::new(0.0, 0.0), Point2::new(x, 0.0), Point2::new(0.5 * x, apex)],
                ));
                gluings.push(EdgeGluing::new(
                    EdgeRef::new(id((f, s), i), 1),
                    EdgeRef::new(id((f, s), (i + 1) % 3), 2),
                ));
            }
        }
    }
    for f in 0..8 {
        for s in 0..2 {
            let face = lo.face(f).to_vec();
            for i in 0..3 {
                let (a, b) = (face[i], face[(i + 1) % 3]);
                let other = lo.across((f, s), a, b);
                if (f, s) > other {
                    continue;
                }
                let of = lo.face(other.0);
                let j = (0..3)
                    .find(|&j| of[j] == b && of[(j + 1) % 3] == a)
                    .expect("neighbouring face traverses the edge backwards");
                gluings.push(EdgeGluing::new(
                    EdgeRef::new(id((f, s), i), 0),
                    EdgeRef::new(id(other, j), 0),
                ));
            }
        }
    }
    build_surface(polygons, gluings, DEFAULT_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_angles(s: &ConeSurface) -> Vec<f64> {
        let mut a: Vec<f64> = s.cone_points().iter().map(|c| c.total_angle).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    #[test]
    fn octagon_model_at_unit_scale() {
        let m = build_octagon_model(1.0).unwrap();
        assert_eq!(m.surface.genus(), 2);
        assert_eq!(m.surface.topology().euler_characteristic, -2);
        assert_eq!(m.weierstrass_points.len(), 6);
        assert_eq!(m.special_points.len(), 16);
        assert!((m.surface.area() - 12.0 * FRAC_PI_8.tan()).abs() < 1e-12);
        assert!((m.surface.area() - 4.970563).abs() < 1e-6);
        let sr = m.exact_systolic_ratio().eval();
        assert!((sr - (2f64.sqrt() + 1.0) / 3.0).abs() < 1e-12);
        assert!((sr - 0.804738).abs() < 1e-6);
        for &w in &m.weierstrass_points {
            assert!((m.surface.cone_points()[w].total_angle - TAU).abs() < 1e-12);
        }
        assert_eq!(m.lifted_edges.len(), 24);
    }

    #[test]
    fn octagon_model_scales() {
        let m = build_octagon_model(3.0).unwrap();
        assert_eq!(m.exact_systole.eval(), 6.0);
        assert!((m.exact_area.eval() - 108.0 * FRAC_PI_8.tan()).abs() < 1e-12);
        let base = build_octagon_model(1.0).unwrap();
        assert!((m.exact_systolic_ratio().eval() - base.exact_systolic_ratio().eval()).abs() < 1e-14);
    }

    #[test]
    fn triangle_model_matches_octagons() {
        for x in [0.5, 1.0, 3.0] {
            let oct = build_octagon_model(x).unwrap();
            let tri = build_triangle_model(x).unwrap();
            assert_eq!(tri.polygons().len(), 48);
            assert_eq!(tri.genus(), 2);
            let rel = (tri.area() - oct.surface.area()).abs() / oct.surface.area();
            assert!(rel < 1e-9, "area mismatch at x={x}: {rel}");
            let (a, b) = (sorted_angles(&tri), sorted_angles(&oct.surface));
            assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn triangle_area_oracle() {
        // 48 isosceles triangles, base x, base angles π/8: each (x²/4)tan(π/8).
        let x = 2.0;
        let tri = build_triangle_model(x).unwrap();
        let expected = 48.0 * x * x / 4.0 * FRAC_PI_8.tan();
        assert!((tri.area() - expected).abs() < 1e-12);
        assert!((tri.area() / build_triangle_model(1.0).unwrap().area() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn angle_budget() {
        let budget = 6.0 * TAU + 16.0 * 9.0 * PI / 4.0;
        let oct = build_octagon_model(1.0).unwrap();
        // Octagon corners only carry the 16 singular points; centres add 6·2π.
        assert!((oct.surface.total_corner_angle() + 6.0 * TAU - budget).abs() < 1e-9);
        let tri = build_triangle_model(1.0).unwrap();
        assert!((tri.total_corner_angle() - budget).abs() < 1e-9);
    }

    #[test]
    fn involution_preserves_gluing() {
        // Rotation by π maps side k to side k+4; glued pairs must go to glued pairs.
        let m = build_octagon_model(1.0).unwrap();
        for g in m.surface.gluings() {
            let (pa, ea) = (g.a.polygon, g.a.edge);
            let (pb, eb) = m.surface.partner(pa, (ea + 4) % 8);
            assert_eq!((pb, eb), (g.b.polygon, (g.b.edge + 4) % 8));
        }
    }

    #[test]
    fn perturbation_keeps_surface_valid() {
        let s = perturbed_triangle_model(1.0, 0, 0, 1.05).unwrap();
        assert_eq!(s.genus(), 2);
        assert!(is_cat0(&s).cat0);
        assert!(s.area() > build_triangle_model(1.0).unwrap().area());
        assert!(check_gauss_bonnet(&s) < 1e-9);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(matches!(build_octagon_model(0.0), Err(BolzaError::InvalidScale(_))));
        assert!(build_triangle_model(f64::NAN).is_err());
    }
}
