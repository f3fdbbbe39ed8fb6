//! The Bolza surface: sphere subdivisions, the optimal flat metric and the
//! combinatorial half of its systole computation.

mod constants;
mod model;
mod sphere;

pub use constants::{
    cat0_bound, constant, exact_constants, flat_bolza_ratio, jenni_systole, jenni_systole_acosh, truncate_decimals,
    Constant,
};
pub use model::{
    build_octagon_model, build_triangle_model, perturbed_triangle_model, BolzaError, BolzaOctagonModel, LiftedEdge,
};
pub use sphere::{
    enumerate_circuits, sphere_complexes, CircuitCertificate, CircuitType, ComplexKind, SphereComplex, SpherePair,
};

use serde::Serialize;

use crate::flatsurf::{is_cat0, Cat0Verdict};

/// A closed geodesic through two adjacent Weierstrass points that lifts a
/// domino circuit of the cube.
#[derive(Debug, Clone, Serialize)]
pub struct SystoleCandidate {
    /// Cube edge inside the domino, dual to the octahedron edge joining the two branch points.
    pub cube_edge: usize,
    /// The two octagons (cube faces) whose centres the loop visits.
    pub octagons: [usize; 2],
    /// Cone point indices of those centres.
    pub weierstrass: [usize; 2],
    pub circuit: CircuitCertificate,
    pub lifts: [LiftedEdge; 2],
    /// Length of the broken line centre → side midpoint → centre → side midpoint → centre.
    pub length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystolicCertificate {
    pub x: f64,
    pub candidates: Vec<SystoleCandidate>,
    /// Faces and petrie hexagons: cube circuits of length ≤ 6 that do not lift.
    pub non_liftable: Vec<CircuitCertificate>,
    /// Liftable circuits with fewer than six edges (expected: none).
    pub short_liftable: Vec<CircuitCertificate>,
    pub cat0: Cat0Verdict,
}

/// Combinatorial certificate that the systole of `g_O` is realized by the
/// twelve domino classes. The metric inequality itself is checked on a mesh.
pub fn systolic_certificate(model: &BolzaOctagonModel) -> Result<SystolicCertificate, BolzaError> {
    let cat0 = is_cat0(&model.surface);
    if let Some(index) = cat0.witness {
        return Err(BolzaError::NotCat0 {
            index,
            angle: model.surface.cone_points()[index].total_angle,
        });
    }
    let circuits = enumerate_circuits(6);
    let short_liftable = circuits
        .iter()
        .filter(|c| c.length < 6 && c.liftable)
        .cloned()
        .collect();
    let non_liftable = circuits.iter().filter(|c| !c.liftable).cloned().collect();

    let pair = sphere_complexes();
    let polygons = model.surface.polygons();
    let mut candidates = Vec::new();
    for circuit in circuits.iter().filter(|c| c.circuit_type == CircuitType::Domino) {
        let [f1, f2] = [circuit.enclosed_faces[0], circuit.enclosed_faces[1]];
        let edge = pair.octahedral.edge_index(f1, f2).ok_or_else(|| {
            BolzaError::ConstructionInvariantViolated(format!("domino faces {f1},{f2} are not adjacent"))
        })?;
        let lifts = model.lifts_of(edge);
        let length = lifts
            .iter()
            .flat_map(|l| l.sides)
            .map(|(v, k)| {
                let centre = polygons[v].marked[0];
                centre.dist(model.side_midpoint(v, k))
            })
            .sum();
        candidates.push(SystoleCandidate {
            cube_edge: edge,
            octagons: [f1, f2],
            weierstrass: [model.weierstrass_points[f1], model.weierstrass_points[f2]],
            circuit: circuit.clone(),
            lifts,
            length,
        });
    }
    Ok(SystolicCertificate {
        x: model.x,
        candidates,
        non_liftable,
        short_liftable,
        cat0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_candidates_of_length_two_x() {
        for x in [1.0, 2.5] {
            let m = build_octagon_model(x).unwrap();
            let cert = systolic_certificate(&m).unwrap();
            assert_eq!(cert.candidates.len(), 12);
            for c in &cert.candidates {
                assert!((c.length - 2.0 * x).abs() < 1e-12);
            }
            let mut edges: Vec<usize> = cert.candidates.iter().map(|c| c.cube_edge).collect();
            edges.sort();
            edges.dedup();
            assert_eq!(edges.len(), 12);
            assert!(cert.short_liftable.is_empty());
            assert_eq!(cert.non_liftable.len(), 10);
        }
    }

    #[test]
    fn candidate_lifts_cross_opposite_sides() {
        let m = build_octagon_model(1.0).unwrap();
        let cert = systolic_certificate(&m).unwrap();
        for c in &cert.candidates {
            for oct in c.octagons {
                let mut ks: Vec<usize> = c
                    .lifts
                    .iter()
                    .flat_map(|l| l.sides)
                    .filter(|s| s.0 == oct)
                    .map(|s| s.1)
                    .collect();
                ks.sort();
                assert_eq!(ks.len(), 2);
                assert_eq!(ks[1] - ks[0], 4);
            }
        }
    }
}
