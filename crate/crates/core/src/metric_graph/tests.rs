use super::*;
use crate::bolza::{build_octagon_model, systolic_certificate};
use crate::flatsurf::{build_surface, flat_torus, EdgeGluing, EdgeRef, DEFAULT_TOLERANCE};
use crate::geom::Point2;

fn sphere_pillow() -> crate::flatsurf::ConeSurface {
    let sq = |id| crate::flatsurf::rectangle(id, 1.0, 1.0);
    build_surface(
        vec![sq(0), sq(1)],
        (0..4)
            .map(|k| EdgeGluing::new(EdgeRef::new(0, k), EdgeRef::new(1, (4 - k) % 4)))
            .collect(),
        DEFAULT_TOLERANCE,
    )
    .unwrap()
}

#[test]
fn torus_distances() {
    let torus = flat_torus(1.0, 1.0);
    let mesh = refine(&torus, 0.1).unwrap();
    let bottom = mesh.locate(0, Point2::new(0.5, 0.0), 1e-9).unwrap();
    let left = mesh.locate(0, Point2::new(0.0, 0.5), 1e-9).unwrap();
    let centre = mesh.locate(0, Point2::new(0.5, 0.5), 1e-9).unwrap();
    let d = distance(&mesh, bottom, centre).unwrap();
    assert!((0.5..=0.52).contains(&d), "{d}");
    let d = distance(&mesh, mesh.cone_vertex(0), bottom).unwrap();
    assert!((d - 0.5).abs() < 1e-12, "{d}");
    let diag = 0.5 * 2f64.sqrt();
    let d = distance(&mesh, left, bottom).unwrap();
    assert!(
        d >= diag - 1e-12 && d <= diag * (1.0 + mesh.directional_distortion()),
        "{d}"
    );
}

#[test]
fn distance_basics() {
    let torus = flat_torus(1.0, 1.0);
    let mesh = refine(&torus, 0.15).unwrap();
    assert_eq!(distance(&mesh, 3, 3).unwrap(), 0.0);
    let n = mesh.num_vertices() as u32;
    for (a, b, c) in [(0, n / 2, n - 1), (5, 17, n / 3), (1, 2, n / 4)] {
        let ab = distance(&mesh, a, b).unwrap();
        let ba = distance(&mesh, b, a).unwrap();
        let bc = distance(&mesh, b, c).unwrap();
        let ac = distance(&mesh, a, c).unwrap();
        assert_eq!(ab, ba);
        assert!(ac <= ab + bc + 1e-15);
    }
    assert!(matches!(distance(&mesh, 0, n), Err(MeshError::UnknownVertex(_))));
}

#[test]
fn too_coarse_is_rejected() {
    let torus = flat_torus(1.0, 1.0);
    assert!(matches!(refine(&torus, 1.5), Err(MeshError::MeshTooCoarse { .. })));
    assert!(matches!(refine(&torus, -1.0), Err(MeshError::InvalidSpacing(_))));
}

#[test]
fn edge_weights_are_bounded() {
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 1.0 / 20.0).unwrap();
    assert!(mesh.edges().iter().all(|e| e.weight > 0.0));
    assert!(mesh.max_edge_ratio() <= DEFAULT_RADIUS_FACTOR + 1e-9);
    let area: f64 = mesh.triangles().iter().map(|t| t.area).sum();
    assert!((area - m.surface.area()).abs() < 1e-9 * area);
    let mut cones = mesh.cone_vertices().to_vec();
    cones.sort();
    cones.dedup();
    assert_eq!(cones.len(), 22);
}

#[test]
fn cover_ranks() {
    let torus = flat_torus(1.0, 1.0);
    let mesh = refine(&torus, 0.2).unwrap();
    assert_eq!(build_homology_cover(&mesh).unwrap().label_rank(), 2);
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 0.1).unwrap();
    assert_eq!(build_homology_cover(&mesh).unwrap().label_rank(), 4);
    let sphere = sphere_pillow();
    let mesh = refine(&sphere, 0.25).unwrap();
    assert!(matches!(build_homology_cover(&mesh), Err(MeshError::GenusZero(_))));
}

#[test]
fn labels_vanish_on_loops_inside_a_polygon() {
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 0.1).unwrap();
    let cover = build_homology_cover(&mesh).unwrap();
    for t in mesh.triangles() {
        assert_eq!(t.edges.iter().fold(0, |a, &e| a ^ cover.triangulation_label(e)), 0);
    }
    // Any edge cycle a→b→c→a where the three edges share a polygon is contractible.
    for e in mesh.edges().iter().take(2000) {
        let third: Vec<_> = mesh
            .arcs(e.b)
            .filter(|&(_, _, f)| mesh.edges()[f as usize].polygon == e.polygon)
            .collect();
        for (c, _, f) in third.into_iter().take(3) {
            if let Some((_, _, g)) = mesh
                .arcs(c)
                .find(|&(w, _, g)| w == e.a && mesh.edges()[g as usize].polygon == e.polygon)
            {
                let id = mesh.edges().iter().position(|x| x == e).unwrap() as u32;
                assert_eq!(cover.cycle_class(&[id, f, g]), 0);
            }
        }
    }
}

#[test]
fn torus_systole() {
    let torus = flat_torus(1.0, 1.0);
    let mesh = refine(&torus, 0.1).unwrap();
    let cover = build_homology_cover(&mesh).unwrap();
    let est = shortest_essential_cycle(&cover, &Sources::All).unwrap();
    assert!(est.length >= 1.0 - 1e-12 && est.length <= 1.0 + 1e-9, "{}", est.length);
    assert_ne!(est.class, 0);
    assert_eq!(est.cycle.recomputed_length(&mesh), est.length);
    // Horizontal and vertical classes.
    assert_eq!(est.near_minimal.len(), 2);
}

#[test]
fn bolza_systole_and_classes() {
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 1.0 / 40.0).unwrap();
    let cover = build_homology_cover(&mesh).unwrap();
    let est = shortest_essential_cycle(&cover, &Sources::ConePoints).unwrap();
    assert!(est.length >= 2.0 - 1e-9 && est.length <= 2.0 * 1.04, "{}", est.length);
    assert_eq!(est.cycle.recomputed_length(&mesh), est.length);
    assert_eq!(cover.cycle_class(&est.cycle.edges), est.class);
    assert_eq!(est.near_minimal.len(), 12, "{:?}", est.near_minimal);

    let cert = systolic_certificate(&m).unwrap();
    let mut certified: Vec<u32> = cert
        .candidates
        .iter()
        .map(|c| domino_class(&m, &mesh, &cover, c))
        .collect();
    certified.sort();
    certified.dedup();
    assert_eq!(certified.len(), 12);
    let mut found: Vec<u32> = est.near_minimal.iter().map(|c| c.class).collect();
    found.sort();
    assert_eq!(found, certified);
    assert!(certified.contains(&est.class));
}

fn domino_class(
    m: &crate::bolza::BolzaOctagonModel,
    mesh: &MeshGraph,
    cover: &HomologyCover<'_>,
    c: &crate::bolza::SystoleCandidate,
) -> u32 {
    let centre = |v: usize| mesh.cone_vertex(m.weierstrass_points[v]);
    let mut class = 0;
    for lift in &c.lifts {
        let [(v, k), (w, _)] = lift.sides;
        let side = mesh.edge_vertices(v, k);
        let mid = side[side.len() / 2];
        class ^= cover.chart_class(v, centre(v), mid).unwrap();
        class ^= cover.chart_class(w, mid, centre(w)).unwrap();
    }
    class
}

#[test]
fn displacement_of_bolza_involution() {
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 1.0 / 40.0).unwrap();
    let skeleton = mesh.boundary_vertices();
    let j = Involution::from_chart_map(&mesh, |p, q| m.involution(p, q), 1e-6);
    let res = displacement(&mesh, &j, &skeleton).unwrap();
    assert!(res.delta >= 1.0 - 1e-9 && res.delta <= 1.02, "{}", res.delta);
    assert_eq!(res.path.recomputed_length(&mesh), res.delta);
    assert_eq!(res.path.vertices.first(), Some(&res.p));
    assert_eq!(res.path.vertices.last(), Some(&res.jp));

    let id = Involution::identity(&mesh);
    assert_eq!(displacement(&mesh, &id, &skeleton).unwrap().delta, 0.0);

    let mut bad: Vec<Option<VertexId>> = (0..mesh.num_vertices() as u32).map(Some).collect();
    bad[skeleton[0] as usize] = Some(skeleton[1]);
    assert!(matches!(
        displacement(&mesh, &Involution::from_map(bad), &skeleton),
        Err(MeshError::NotInvolution(_))
    ));
}

#[test]
fn scale_equivariance() {
    let m = build_octagon_model(1.0).unwrap();
    let base = refine(&m.surface, 0.1).unwrap();
    let a = base.cone_vertex(0);
    let b = base.cone_vertex(7);
    let d = distance(&base, a, b).unwrap();
    for lambda in [0.5, 2.0, 7.0] {
        let scaled = m.surface.scaled(lambda).unwrap();
        let mesh = refine(&scaled, 0.1 * lambda).unwrap();
        assert_eq!(mesh.num_vertices(), base.num_vertices());
        let dl = distance(&mesh, mesh.cone_vertex(0), mesh.cone_vertex(7)).unwrap();
        assert!((dl - lambda * d).abs() <= 1e-9 * lambda * d);
    }
}

#[test]
fn non_convex_polygon_mesh() {
    let l = crate::flatsurf::EuclideanPolygon::new(
        0,
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ],
    );
    let s = build_surface(
        vec![l],
        vec![
            EdgeGluing::new(EdgeRef::new(0, 0), EdgeRef::new(0, 5)),
            EdgeGluing::new(EdgeRef::new(0, 1), EdgeRef::new(0, 2)),
            EdgeGluing::new(EdgeRef::new(0, 3), EdgeRef::new(0, 4)),
        ],
        DEFAULT_TOLERANCE,
    )
    .unwrap();
    let mesh = refine(&s, 0.2).unwrap();
    let area: f64 = mesh.triangles().iter().map(|t| t.area).sum();
    assert!((area - 3.0).abs() < 1e-9);
    // No edge may cut across the notch at (1, 1)–(2, 2).
    let notch = Point2::new(1.5, 1.5);
    for e in mesh.edges() {
        let pos = |v: VertexId, l: u32| mesh.charts(v).iter().find(|c| c.local == l).unwrap().pos;
        let (a, b) = (pos(e.a, e.local[0]), pos(e.b, e.local[1]));
        assert!(crate::geom::point_segment_distance(notch, a, b) > 0.4);
    }
}
