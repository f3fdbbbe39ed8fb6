use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conesurf::bolza::build_octagon_model;
use conesurf::flatsurf::{
    build_surface, check_gauss_bonnet, ConeLocation, ConeSurface, EdgeGluing, EdgeRef, EuclideanPolygon, SurfaceError,
    DEFAULT_TOLERANCE,
};
use conesurf::geom::Point2;
use conesurf::metric_graph::{distance, refine};
use conesurf::voronoi::{cell_area_lower_bound, voronoi_decompose};

fn triangle(id: usize) -> EuclideanPolygon {
    EuclideanPolygon::new(
        id,
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        ],
    )
}

/// Glue `2n` equilateral triangles along a random perfect matching of their edges.
fn random_gluing(n: usize, seed: u64) -> Result<ConeSurface, SurfaceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<EdgeRef> = (0..2 * n)
        .flat_map(|p| (0..3).map(move |e| EdgeRef::new(p, e)))
        .collect();
    edges.shuffle(&mut rng);
    let gluings = edges.chunks(2).map(|c| EdgeGluing::new(c[0], c[1])).collect();
    build_surface((0..2 * n).map(triangle).collect(), gluings, DEFAULT_TOLERANCE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gauss_bonnet_on_random_gluings(n in 1usize..12, seed in any::<u64>()) {
        match random_gluing(n, seed) {
            Ok(s) => {
                prop_assert!(check_gauss_bonnet(&s) <= 1e-9);
                let t = s.topology();
                prop_assert_eq!(t.euler_characteristic, 2 - 2 * s.genus() as i64);
                let total: f64 = s.cone_points().iter().map(|c| c.total_angle).sum();
                prop_assert!((total - 2.0 * n as f64 * PI).abs() < 1e-9);
            }
            Err(SurfaceError::Disconnected) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn gluing_is_an_involution(n in 1usize..12, seed in any::<u64>()) {
        if let Ok(s) = random_gluing(n, seed) {
            for (p, poly) in s.polygons().iter().enumerate() {
                for k in 0..poly.len() {
                    let (q, j) = s.partner(p, k);
                    prop_assert_ne!((q, j), (p, k));
                    prop_assert_eq!(s.partner(q, j), (p, k));
                }
            }
        }
    }

    #[test]
    fn corners_partition_into_cone_points(n in 1usize..12, seed in any::<u64>()) {
        if let Ok(s) = random_gluing(n, seed) {
            let mut seen = vec![vec![0u32; 3]; 2 * n];
            for c in s.cone_points() {
                let ConeLocation::Vertex { corners } = &c.location else { continue };
                let sum: f64 = corners.iter().map(|k| k.angle).sum();
                prop_assert!((sum - c.total_angle).abs() < 1e-9);
                for k in corners {
                    seen[k.polygon][k.vertex] += 1;
                }
            }
            prop_assert!(seen.iter().flatten().all(|&c| c == 1));
        }
    }

    #[test]
    fn jensen_equal_angles_minimise(weights in prop::collection::vec(0.05f64..1.0, 8)) {
        let total: f64 = weights.iter().sum();
        let thetas: Vec<f64> = weights.iter().map(|w| TAU * w / total).collect();
        if let Ok(b) = cell_area_lower_bound(1.0, &thetas) {
            prop_assert!(b >= cell_area_lower_bound(1.0, &[PI / 4.0; 8]).unwrap() - 1e-12);
        }
    }
}

#[test]
fn scaling_is_equivariant() {
    let m = build_octagon_model(1.0).unwrap();
    let h = 0.1;
    let base = refine(&m.surface, h).unwrap();
    let pairs = [(0usize, 5usize), (2, 17), (8, 21)];
    let d0: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| distance(&base, base.cone_vertex(a), base.cone_vertex(b)).unwrap())
        .collect();
    for lambda in [0.5, 2.0, 7.0] {
        let s = m.surface.scaled(lambda).unwrap();
        assert!((s.area() - lambda * lambda * m.surface.area()).abs() < 1e-9 * s.area());
        for (a, b) in s.cone_points().iter().zip(m.surface.cone_points()) {
            assert!((a.total_angle - b.total_angle).abs() < 1e-12);
        }
        let mesh = refine(&s, lambda * h).unwrap();
        for (&(a, b), &d) in pairs.iter().zip(&d0) {
            let dl = distance(&mesh, mesh.cone_vertex(a), mesh.cone_vertex(b)).unwrap();
            assert!(
                (dl - lambda * d).abs() <= 1e-9 * lambda * d,
                "λ={lambda}: {dl} vs {}",
                lambda * d
            );
        }
    }
}

#[test]
fn voronoi_cells_partition_the_surface() {
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let k = rng.gen_range(2..9);
        let mut sites: Vec<u32> = (0..k).map(|_| rng.gen_range(0..mesh.num_vertices() as u32)).collect();
        sites.sort();
        sites.dedup();
        let vd = voronoi_decompose(&mesh, &sites).unwrap();
        assert!((vd.total_area - vd.surface_area).abs() <= 1e-6 * vd.surface_area);
        assert_eq!(vd.triangle_cell.len(), mesh.triangles().len());
        let summed: f64 = vd.cells.iter().map(|c| c.area).sum();
        assert!((summed - vd.surface_area).abs() <= 1e-6 * vd.surface_area);
    }
}
