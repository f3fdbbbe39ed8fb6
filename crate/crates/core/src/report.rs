//! End-to-end drivers: the constants table, the octagon figure and the full
//! verification pipeline. Everything a front end prints comes from here.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bolza::{
    build_octagon_model, build_triangle_model, constant, exact_constants, systolic_certificate, truncate_decimals,
    BolzaError, BolzaOctagonModel,
};
use crate::flatsurf::{check_gauss_bonnet, is_cat0, ConeSurface, SurfaceError};
use crate::geom::{line_intersection, Point2};
use crate::metric_graph::{
    build_homology_cover, displacement, distance, refine, shortest_essential_cycle, HomologyCover, Involution,
    MeshError, MeshGraph, Sources, SystoleEstimate, VertexId,
};
use crate::voronoi::{bound_report, voronoi_decompose, BoundError, BoundReport, VoronoiDecomposition};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Bolza(#[from] BolzaError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("{0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ReportError {
    /// Problems with the input, as opposed to failed checks.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, ReportError::Bolza(BolzaError::ConstructionInvariantViolated(_)))
    }
}

// ---------------------------------------------------------------- table

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub key: String,
    pub label: String,
    pub exact: String,
    pub value: f64,
    /// Value truncated to four decimals.
    pub printed: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    /// The three measured ratios: Berger, Jenni, and `g_O`.
    pub ratios: Vec<TableRow>,
    pub bounds: Vec<TableRow>,
    pub other: Vec<TableRow>,
}

impl ConstantsTable {
    pub fn to_text(&self) -> String {
        let mut out = String::from("Systolic ratios in genus 2\n");
        for r in &self.ratios {
            let _ = writeln!(out, "{}: {}", r.label, r.printed);
        }
        out.push_str("\nBounds\n");
        for r in self.bounds.iter().chain(&self.other) {
            let _ = writeln!(out, "{}: {}", r.label, r.printed);
        }
        out
    }

    pub fn row(&self, key: &str) -> Option<&TableRow> {
        self.ratios
            .iter()
            .chain(&self.bounds)
            .chain(&self.other)
            .find(|r| r.key == key)
    }
}

pub fn constants_table() -> ConstantsTable {
    let row = |key: &str| {
        let c = constant(key).expect("known constant");
        TableRow {
            key: c.key.to_string(),
            label: c.label.to_string(),
            exact: c.exact.to_string(),
            value: c.value,
            printed: truncate_decimals(c.value, 4),
        }
    };
    let ratios = ["berger", "jenni", "g_o"];
    let bounds = [
        "cat0_bound",
        "hyperelliptic_disk_genus2",
        "bolza_conformal_bound",
        "bavard_klein_bottle",
    ];
    let other = exact_constants()
        .into_iter()
        .filter(|c| !ratios.contains(&c.key) && !bounds.contains(&c.key))
        .map(|c| row(c.key))
        .collect();
    ConstantsTable {
        ratios: ratios.iter().map(|k| row(k)).collect(),
        bounds: bounds.iter().map(|k| row(k)).collect(),
        other,
    }
}

// ---------------------------------------------------------------- svg

fn fmt(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn pt(p: Point2) -> String {
    format!("{},{}", fmt(p.x), fmt(-p.y))
}

/// The inner octagon crossed by four systolic loops through every point:
/// the intersection of the half-planes cut by the eight chords.
pub fn inner_octagon(model: &BolzaOctagonModel) -> Vec<Point2> {
    let chords = octagon_chords(model);
    let mut with_normal: Vec<(f64, (Point2, Point2))> = chords
        .into_iter()
        .map(|(a, b)| ((a.lerp(b, 0.5)).angle().rem_euclid(TAU), (a, b)))
        .collect();
    with_normal.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = with_normal.len();
    (0..n)
        .map(|i| {
            let (a, b) = with_normal[i].1;
            let (c, d) = with_normal[(i + 1) % n].1;
            line_intersection(a, b, c, d).expect("adjacent chords are not parallel")
        })
        .collect()
}

/// Chords joining octagon vertices three apart: the edges of the strips of
/// parallel systolic loops.
pub fn octagon_chords(model: &BolzaOctagonModel) -> Vec<(Point2, Point2)> {
    let v = &model.surface.polygons()[0].vertices;
    (0..8).map(|j| (v[j], v[(j + 3) % 8])).collect()
}

/// One octagon of `g_O` with its sixteen right triangles, the eight strip
/// chords, the four systolic diameters and the shaded inner octagon.
pub fn octagon_svg(model: &BolzaOctagonModel) -> String {
    let poly = &model.surface.polygons()[0];
    let centre = poly.marked[0];
    let v = &poly.vertices;
    let half = 0.6 * model.x;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="480" height="480" viewBox="{} {} {} {}">"#,
        fmt(-half),
        fmt(-half),
        fmt(2.0 * half),
        fmt(2.0 * half)
    );
    let stroke = fmt(model.x / 400.0);
    let _ = writeln!(
        s,
        r#"<style>path.triangle{{fill:none;stroke:#888;stroke-width:{stroke}}} line.chord{{stroke:#1f5fa8;stroke-width:{stroke}}} line.systole{{stroke:#b22;stroke-width:{stroke};stroke-dasharray:{d},{d}}} polygon.inner{{fill:#f2c14e;fill-opacity:0.5;stroke:none}} polygon.octagon{{fill:none;stroke:#000;stroke-width:{w}}}</style>"#,
        d = fmt(model.x / 100.0),
        w = fmt(model.x / 200.0),
    );
    let inner: Vec<String> = inner_octagon(model).into_iter().map(pt).collect();
    let _ = writeln!(s, r#"<polygon class="inner" points="{}"/>"#, inner.join(" "));
    for k in 0..8 {
        let (a, b) = (v[k], v[(k + 1) % 8]);
        let m = a.lerp(b, 0.5);
        for (p, q) in [(a, m), (m, b)] {
            let _ = writeln!(
                s,
                r#"<path class="triangle" d="M{} L{} L{} Z"/>"#,
                pt(centre),
                pt(p),
                pt(q)
            );
        }
    }
    for (a, b) in octagon_chords(model) {
        let _ = writeln!(
            s,
            r#"<line class="chord" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            fmt(a.x),
            fmt(-a.y),
            fmt(b.x),
            fmt(-b.y)
        );
    }
    for k in 0..4 {
        let (a, b) = (model.side_midpoint(0, k), model.side_midpoint(0, k + 4));
        let _ = writeln!(
            s,
            r#"<line class="systole" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            fmt(a.x),
            fmt(-a.y),
            fmt(b.x),
            fmt(-b.y)
        );
    }
    let outline: Vec<String> = v.iter().map(|&p| pt(p)).collect();
    let _ = writeln!(s, r#"<polygon class="octagon" points="{}"/>"#, outline.join(" "));
    s.push_str("</svg>\n");
    s
}

pub fn write_octagon_svg(model: &BolzaOctagonModel, path: impl AsRef<Path>) -> Result<(), ReportError> {
    std::fs::write(path, octagon_svg(model))?;
    Ok(())
}

// ---------------------------------------------------------------- pipeline

/// Sites for a Voronoi decomposition given by name: `weierstrass` picks the
/// smooth marked points, `cone` every cone point.
pub fn named_sites(mesh: &MeshGraph, which: &str) -> Result<Vec<VertexId>, ReportError> {
    let surface = mesh.surface();
    let eps = surface.tolerance();
    let picked: Vec<usize> = match which {
        "weierstrass" => surface
            .cone_points()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_smooth(eps) && matches!(c.location, crate::flatsurf::ConeLocation::Marked { .. }))
            .map(|(i, _)| i)
            .collect(),
        "cone" => (0..surface.cone_points().len()).collect(),
        other => return Err(ReportError::InvalidInput(format!("unknown site set '{other}'"))),
    };
    if which == "weierstrass" && picked.len() != 2 * surface.genus() as usize + 2 {
        return Err(ReportError::InvalidInput(format!(
            "expected {} smooth marked points for Weierstrass sites, found {}",
            2 * surface.genus() + 2,
            picked.len()
        )));
    }
    if picked.len() < 2 {
        return Err(ReportError::InvalidInput("need at least two sites".into()));
    }
    Ok(picked.into_iter().map(|c| mesh.cone_vertex(c)).collect())
}

pub fn parse_sources(name: &str) -> Result<Sources, ReportError> {
    match name {
        "cone" => Ok(Sources::ConePoints),
        "all" => Ok(Sources::All),
        "default" | "cone+midpoints" => Ok(Sources::ConePointsAndSkeletonMidpoints),
        other => Err(ReportError::InvalidInput(format!("unknown source strategy '{other}'"))),
    }
}

/// Homology class of each certified domino loop, computed on `cover`.
pub fn certified_classes(model: &BolzaOctagonModel, cover: &HomologyCover<'_>) -> Result<Vec<u32>, ReportError> {
    let mesh = cover.mesh();
    let cert = systolic_certificate(model)?;
    let mut classes = Vec::new();
    for c in &cert.candidates {
        let mut class = 0;
        for lift in &c.lifts {
            let [(v, k), (w, _)] = lift.sides;
            let side = mesh.edge_vertices(v, k);
            let mid = side[side.len() / 2];
            let centre = |o: usize| mesh.cone_vertex(model.weierstrass_points[o]);
            let missing = || ReportError::InvalidInput("domino loop leaves its charts".into());
            class ^= cover.chart_class(v, centre(v), mid).ok_or_else(missing)?;
            class ^= cover.chart_class(w, mid, centre(w)).ok_or_else(missing)?;
        }
        classes.push(class);
    }
    classes.sort_unstable();
    classes.dedup();
    Ok(classes)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Margin by which the check passed (negative when it failed), where meaningful.
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub x: Option<f64>,
    pub h: f64,
    pub checks: Vec<Check>,
    pub systole: Option<SystoleEstimate>,
    pub bounds: Option<BoundReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            match c.slack {
                Some(s) => {
                    let _ = writeln!(out, "{mark} {:<22} {} (slack {s:.3e})", c.name, c.detail);
                }
                None => {
                    let _ = writeln!(out, "{mark} {:<22} {}", c.name, c.detail);
                }
            }
        }
        match self.first_failure() {
            None => out.push_str("all checks passed\n"),
            Some(c) => {
                let _ = writeln!(out, "first failing check: {}", c.name);
            }
        }
        out
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: String, slack: Option<f64>) {
        self.0.push(Check {
            name: name.to_string(),
            passed,
            detail,
            slack,
        });
    }

    /// `|value - target| ≤ tol`, slack `tol - |value - target|`.
    fn near(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let slack = tol - (value - target).abs();
        self.push(name, slack >= 0.0, format!("{value:.9} vs {target:.9}"), Some(slack));
    }
}

fn metric_spot_checks(mesh: &MeshGraph, seed: u64, checks: &mut Checks) -> Result<(), ReportError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.num_vertices() as VertexId;
    let mut worst = f64::INFINITY;
    for _ in 0..4 {
        let [a, b, c] = [0; 3].map(|_| rng.gen_range(0..n));
        let (ab, ba) = (distance(mesh, a, b)?, distance(mesh, b, a)?);
        let (bc, ac) = (distance(mesh, b, c)?, distance(mesh, a, c)?);
        if ab != ba {
            worst = f64::NEG_INFINITY;
        }
        worst = worst.min(ab + bc - ac);
    }
    checks.push(
        "graph metric",
        worst >= -1e-12,
        format!("symmetry and triangle inequality on random triples (seed {seed})"),
        Some(worst),
    );
    Ok(())
}

/// Surface-independent checks plus the mesh pipeline (systole, Voronoi, bounds).
fn pipeline(
    surface: &ConeSurface,
    h: f64,
    sites: &str,
    seed: u64,
    model: Option<&BolzaOctagonModel>,
    checks: &mut Checks,
) -> Result<(Option<SystoleEstimate>, Option<BoundReport>), ReportError> {
    let topo = surface.topology();
    checks.push(
        "topology",
        topo.orientable && surface.genus() >= 1,
        format!(
            "V={} E={} F={} genus {}",
            topo.vertices,
            topo.edges,
            topo.faces,
            surface.genus()
        ),
        None,
    );
    let residual = check_gauss_bonnet(surface);
    checks.push(
        "gauss_bonnet",
        residual <= 1e-9,
        format!("residual {residual:.3e}"),
        Some(1e-9 - residual),
    );
    let cat0 = is_cat0(surface);
    checks.push(
        "cat0",
        cat0.cat0,
        match cat0.witness {
            None => "every cone angle ≥ 2π".to_string(),
            Some(i) => format!("cone point {i} has angle {:.9}", cat0.witness_angle.unwrap_or(f64::NAN)),
        },
        None,
    );
    if surface.genus() == 0 {
        return Ok((None, None));
    }
    let mesh = refine(surface, h)?;
    checks.push(
        "mesh",
        true,
        format!(
            "{} vertices, {} edges, {} triangles",
            mesh.num_vertices(),
            mesh.edges().len(),
            mesh.triangles().len()
        ),
        None,
    );
    metric_spot_checks(&mesh, seed, checks)?;
    let cover = build_homology_cover(&mesh)?;
    checks.push(
        "homology_cover",
        cover.label_rank() == 2 * surface.genus() as usize,
        format!("label rank {}", cover.label_rank()),
        None,
    );
    let sys = shortest_essential_cycle(&cover, &Sources::ConePoints)?;
    let recomputed = sys.cycle.recomputed_length(&mesh);
    checks.push(
        "systole_cycle",
        recomputed == sys.length && sys.class != 0 && cover.cycle_class(&sys.cycle.edges) == sys.class,
        format!(
            "length {:.9}, class {:#06b}, {} edges",
            sys.length,
            sys.class,
            sys.cycle.edges.len()
        ),
        None,
    );

    let mut delta = None;
    let vd: VoronoiDecomposition = if let Some(m) = model {
        let x = m.x;
        let tol = if h <= x / 80.0 { 0.02 } else { 0.04 };
        checks.near("systole_estimate", sys.length, 2.0 * x, tol * 2.0 * x);
        let certified = certified_classes(m, &cover)?;
        checks.push(
            "systole_class",
            certified.len() == 12 && certified.contains(&sys.class),
            format!(
                "class {:#06b} among {} certified domino classes",
                sys.class,
                certified.len()
            ),
            None,
        );
        let vd = voronoi_decompose(&mesh, &named_sites(&mesh, "weierstrass")?)?;
        let cell_area = 2.0 * (PI / 8.0).tan() * x * x;
        let worst = vd
            .cells
            .iter()
            .map(|c| (c.area - cell_area).abs() / cell_area)
            .fold(0.0, f64::max);
        let sides_ok = vd.cells.len() == 6 && vd.cells.iter().all(|c| c.side_count == 8);
        let e = vd.sphere.map(|s| s.edges);
        checks.push(
            "voronoi_cells",
            sides_ok && e == Some(12) && worst <= 0.02,
            format!(
                "{} cells, sides {:?}, dual edges {:?}, worst area error {:.2e}",
                vd.cells.len(),
                vd.cells.iter().map(|c| c.side_count).collect::<Vec<_>>(),
                e,
                worst
            ),
            Some(0.02 - worst),
        );
        let j = Involution::from_chart_map(&mesh, |p, q| m.involution(p, q), 1e-6 * x);
        let d = displacement(&mesh, &j, &mesh.boundary_vertices())?;
        checks.near("displacement", d.delta, x, tol * x);
        delta = Some(d);
        vd
    } else {
        voronoi_decompose(&mesh, &named_sites(&mesh, sites)?)?
    };
    let rel = (vd.total_area - vd.surface_area).abs() / vd.surface_area;
    checks.push(
        "voronoi_partition",
        rel <= 1e-6,
        format!("relative area defect {rel:.2e}"),
        Some(1e-6 - rel),
    );
    let report = bound_report(surface, &sys, &vd, delta.as_ref())?;
    for e in report.entries.iter().filter(|e| e.applicable) {
        checks.push(
            &format!("bound:{}", e.key),
            e.satisfied,
            format!(
                "{} ({:.6} vs {:.6}, tolerance {:.1e})",
                e.statement, e.achieved, e.value, e.tolerance
            ),
            Some(e.slack),
        );
    }
    Ok((Some(sys), Some(report)))
}

/// Build `g_O` at scale `x` and run every check at mesh spacing `h`.
pub fn verify_all(x: f64, h: f64, seed: u64) -> Result<VerifyReport, ReportError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MeshError::InvalidSpacing(h).into());
    }
    let model = build_octagon_model(x)?;
    let mut checks = Checks(Vec::new());
    let s = &model.surface;
    checks.push("genus", s.genus() == 2, format!("genus {}", s.genus()), None);
    let smooth = s
        .cone_points()
        .iter()
        .filter(|c| (c.total_angle - TAU).abs() <= 1e-9)
        .count();
    let special = s
        .cone_points()
        .iter()
        .filter(|c| (c.total_angle - 9.0 * PI / 4.0).abs() <= 1e-9)
        .count();
    checks.push(
        "cone_angles",
        smooth == 6 && special == 16 && s.cone_points().len() == 22,
        format!("{smooth} smooth, {special} of angle 9π/4"),
        None,
    );
    let tri = build_triangle_model(x)?;
    let area_rel = (tri.area() - s.area()).abs() / s.area();
    let mut a: Vec<f64> = s.cone_points().iter().map(|c| c.total_angle).collect();
    let mut b: Vec<f64> = tri.cone_points().iter().map(|c| c.total_angle).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let same = a.len() == b.len() && a.iter().zip(&b).all(|(p, q)| (p - q).abs() <= 1e-9);
    checks.push(
        "model_equivalence",
        area_rel <= 1e-9 && same,
        format!("area defect {area_rel:.2e}, cone angle multisets equal: {same}"),
        Some(1e-9 - area_rel),
    );
    let sr = model.exact_systolic_ratio().eval();
    let target = (2f64.sqrt() + 1.0) / 3.0;
    checks.near("exact_ratio", sr, target, 1e-12);
    checks.near(
        "jensen_equality",
        crate::voronoi::jensen_area_bound(2.0 * x) / model.exact_area.eval(),
        1.0,
        1e-12,
    );
    let cert = systolic_certificate(&model)?;
    checks.push(
        "circuit_certificate",
        cert.candidates.len() == 12 && cert.short_liftable.is_empty() && cert.non_liftable.len() == 10,
        format!(
            "{} domino candidates, {} short liftable, {} non-liftable",
            cert.candidates.len(),
            cert.short_liftable.len(),
            cert.non_liftable.len()
        ),
        None,
    );
    let table = constants_table();
    let printed: Vec<&str> = table.ratios.iter().map(|r| r.printed.as_str()).collect();
    checks.push(
        "constants_table",
        printed == ["0.6666", "0.7437", "0.8047"],
        printed.join(" / "),
        None,
    );
    let (systole, bounds) = pipeline(s, h, "weierstrass", seed, Some(&model), &mut checks)?;
    Ok(VerifyReport {
        x: Some(x),
        h,
        checks: checks.0,
        systole,
        bounds,
    })
}

/// Run the surface-independent checks and the mesh pipeline on a loaded surface.
pub fn verify_surface(surface: &ConeSurface, h: f64, sites: &str, seed: u64) -> Result<VerifyReport, ReportError> {
    let mut checks = Checks(Vec::new());
    let (systole, bounds) = pipeline(surface, h, sites, seed, None, &mut checks)?;
    Ok(VerifyReport {
        x: None,
        h,
        checks: checks.0,
        systole,
        bounds,
    })
}

/// Voronoi decomposition and bound report of a surface at spacing `h`.
pub fn bounds_for(
    surface: &ConeSurface,
    h: f64,
    sites: &str,
    model: Option<&BolzaOctagonModel>,
) -> Result<(SystoleEstimate, VoronoiDecomposition, BoundReport), ReportError> {
    let mesh = refine(surface, h)?;
    let cover = build_homology_cover(&mesh)?;
    let sys = shortest_essential_cycle(&cover, &Sources::ConePoints)?;
    let vd = voronoi_decompose(&mesh, &named_sites(&mesh, sites)?)?;
    let delta = match model {
        Some(m) => {
            let j = Involution::from_chart_map(&mesh, |p, q| m.involution(p, q), 1e-6 * m.x);
            Some(displacement(&mesh, &j, &mesh.boundary_vertices())?)
        }
        None => None,
    };
    let report = bound_report(surface, &sys, &vd, delta.as_ref())?;
    Ok((sys, vd, report))
}
