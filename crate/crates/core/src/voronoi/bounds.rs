use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use super::VoronoiDecomposition;
use crate::bolza::cat0_bound;
use crate::exact::{num, pi, Expr};
use crate::flatsurf::{is_cat0, ConeSurface};
use crate::metric_graph::{DisplacementResult, SystoleEstimate};

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("angle {0} is outside (0, π)")]
    AngleOutOfRange(f64),
    #[error("{0}")]
    InvalidInput(String),
    #[error("inputs were computed from different surfaces")]
    InconsistentInputs,
}

/// Edges of a simple spherical graph with `f ≥ 3` faces whose vertices all
/// have degree at least three: `e ≤ 3f − 6`.
pub fn euler_edge_bound(faces: usize) -> Result<usize, BoundError> {
    if faces < 3 {
        return Err(BoundError::InvalidInput(format!("need at least 3 faces, got {faces}")));
    }
    Ok(3 * faces - 6)
}

/// `Σ (sys/4)² tan(θᵢ/2)`: area of the isosceles triangles of height `sys/4`
/// and apex angles `θᵢ` that a CAT(0) Voronoi cell must contain.
pub fn cell_area_lower_bound(sys: f64, thetas: &[f64]) -> Result<f64, BoundError> {
    if !(sys > 0.0) {
        return Err(BoundError::InvalidInput(format!("systole must be positive, got {sys}")));
    }
    if let Some(&t) = thetas.iter().find(|&&t| !(t > 0.0 && t < PI)) {
        return Err(BoundError::AngleOutOfRange(t));
    }
    let r = sys / 4.0;
    Ok(thetas.iter().map(|t| r * r * (t / 2.0).tan()).sum())
}

/// Total area lower bound `3 tan(π/8) sys²` for CAT(0) metrics in genus two.
pub fn jensen_area_bound(sys: f64) -> f64 {
    3.0 * (PI / 8.0).tan() * sys * sys
}

/// `(12/π) δ²`: area forced by an involution of displacement `δ` on the skeleton.
pub fn pu_displacement_bound(delta: f64) -> f64 {
    12.0 / PI * delta * delta
}

/// Systolic-ratio bound from packing `2g + 2` disjoint disks of radius
/// `sys/4` around the Weierstrass points, each of area at least `π (sys/4)²`.
#[derive(Debug, Clone, Serialize)]
pub struct DiskBound {
    pub genus: usize,
    pub disks: usize,
    /// Disk radius as a fraction of the systole.
    pub radius_fraction: f64,
    /// Lower bound on each disk's area as a fraction of `sys²`.
    pub disk_area_fraction: f64,
    #[serde(serialize_with = "as_string")]
    pub exact: Expr,
    pub bound: f64,
}

fn as_string<S: serde::Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

pub fn hyperelliptic_disk_bound(genus: usize) -> Result<DiskBound, BoundError> {
    if genus < 2 {
        return Err(BoundError::InvalidInput(format!(
            "genus must be at least 2, got {genus}"
        )));
    }
    let exact = num(8.0) / (num((genus + 1) as f64) * pi());
    let disks = 2 * genus + 2;
    let disk_area_fraction = PI / 16.0;
    Ok(DiskBound {
        genus,
        disks,
        radius_fraction: 0.25,
        disk_area_fraction,
        bound: exact.eval(),
        exact,
    })
}

/// One inequality. For upper bounds (`achieved ≤ value`) the slack is
/// `value − achieved`; for lower bounds (`achieved ≥ value`) it is
/// `achieved − value`. Either way a negative slack beyond `tolerance` is a
/// violation.
#[derive(Debug, Clone, Serialize)]
pub struct BoundEntry {
    pub key: String,
    pub statement: String,
    pub value: f64,
    pub achieved: f64,
    pub upper: bool,
    pub applicable: bool,
    pub satisfied: bool,
    pub slack: f64,
    pub tolerance: f64,
    pub inputs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub genus: u32,
    pub cat0: bool,
    pub area: f64,
    pub systole: f64,
    pub systolic_ratio: f64,
    /// Relative mesh error carried by the systole estimate.
    pub mesh_error: f64,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| !e.applicable || e.satisfied)
    }

    pub fn get(&self, key: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| e.applicable && !e.satisfied)
    }
}

struct Entry<'a> {
    key: &'a str,
    statement: &'a str,
    value: f64,
    achieved: f64,
    upper: bool,
    applicable: bool,
    tolerance: f64,
    inputs: &'a [(&'a str, f64)],
}

impl From<Entry<'_>> for BoundEntry {
    fn from(e: Entry<'_>) -> Self {
        let slack = if e.upper {
            e.value - e.achieved
        } else {
            e.achieved - e.value
        };
        BoundEntry {
            key: e.key.to_string(),
            statement: e.statement.to_string(),
            value: e.value,
            achieved: e.achieved,
            upper: e.upper,
            applicable: e.applicable,
            satisfied: slack >= -e.tolerance,
            slack,
            tolerance: e.tolerance,
            inputs: e.inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// Check the systolic ratio and its ingredients against every applicable bound.
///
/// Mesh systoles overestimate by at most `sys.error_bound` (relative), so
/// inequalities with the systole on the small side get that much room; the
/// equality case `g_O` lands inside it.
pub fn bound_report(
    surface: &ConeSurface,
    sys: &SystoleEstimate,
    vd: &VoronoiDecomposition,
    delta: Option<&DisplacementResult>,
) -> Result<BoundReport, BoundError> {
    let fp = surface.fingerprint();
    if sys.surface_fingerprint != fp
        || vd.surface_fingerprint != fp
        || delta.is_some_and(|d| d.surface_fingerprint != fp)
    {
        return Err(BoundError::InconsistentInputs);
    }
    let genus = surface.genus();
    let cat0 = is_cat0(surface).cat0;
    let area = surface.area();
    let s = sys.length;
    let sr = s * s / area;
    let eps = sys.error_bound;
    let sq = (1.0 + eps) * (1.0 + eps) - 1.0;
    let genus2_cat0 = genus == 2 && cat0;

    let mut entries: Vec<BoundEntry> = Vec::new();
    entries.push(
        Entry {
            key: "cat0_genus2",
            statement: "SR ≤ (1/3)cot(π/8) for CAT(0) metrics in genus 2",
            value: cat0_bound().eval(),
            achieved: sr,
            upper: true,
            applicable: genus2_cat0,
            tolerance: cat0_bound().eval() * sq,
            inputs: &[("systole", s), ("area", area)],
        }
        .into(),
    );
    entries.push(
        Entry {
            key: "jensen_area",
            statement: "area ≥ 3tan(π/8)·sys² for CAT(0) metrics in genus 2",
            value: jensen_area_bound(s),
            achieved: area,
            upper: false,
            applicable: genus2_cat0,
            tolerance: jensen_area_bound(s) * sq,
            inputs: &[("systole", s)],
        }
        .into(),
    );
    if let Ok(disk) = hyperelliptic_disk_bound(genus as usize) {
        entries.push(
            Entry {
                key: "hyperelliptic_disk",
                statement: "SR ≤ 8/((g+1)π) for hyperelliptic CAT(0) metrics",
                value: disk.bound,
                achieved: sr,
                upper: true,
                applicable: cat0 && genus == 2,
                tolerance: disk.bound * sq,
                inputs: &[("genus", genus as f64)],
            }
            .into(),
        );
    }
    let weierstrass_sites = vd.sites.len() == 2 * genus as usize + 2;
    entries.push(
        Entry {
            key: "disk_packing",
            statement: "Weierstrass points are pairwise at least sys/2 apart",
            value: s / 2.0,
            achieved: vd.min_site_distance(),
            upper: false,
            applicable: genus >= 2 && weierstrass_sites,
            tolerance: s / 2.0 * eps,
            inputs: &[("systole", s), ("sites", vd.sites.len() as f64)],
        }
        .into(),
    );
    entries.push(
        Entry {
            key: "bavard_klein_bottle",
            statement: "SR ≤ π/2^(3/2)",
            value: PI / 2f64.powf(1.5),
            achieved: sr,
            upper: true,
            applicable: genus == 2,
            tolerance: PI / 2f64.powf(1.5) * sq,
            inputs: &[],
        }
        .into(),
    );
    if let Some(d) = delta {
        let pu = pu_displacement_bound(d.delta);
        entries.push(
            Entry {
                key: "pu_displacement",
                statement: "area ≥ (12/π)·δ(J)²",
                value: pu,
                achieved: area,
                upper: false,
                applicable: true,
                // δ is an overestimate too.
                tolerance: pu * sq,
                inputs: &[("delta", d.delta)],
            }
            .into(),
        );
        entries.push(
            Entry {
                key: "displacement_systole",
                statement: "2δ(J) ≥ sys",
                value: s,
                achieved: 2.0 * d.delta,
                upper: false,
                applicable: true,
                tolerance: s * eps,
                inputs: &[("delta", d.delta), ("systole", s)],
            }
            .into(),
        );
        entries.push(
            Entry {
                key: "bolza_conformal",
                statement: "SR ≤ π/3 for metrics with an isometric involution of displacement ≥ sys/2",
                value: PI / 3.0,
                achieved: sr,
                upper: true,
                applicable: genus == 2,
                tolerance: PI / 3.0 * sq,
                inputs: &[("delta", d.delta)],
            }
            .into(),
        );
    }
    if let Some(sphere) = vd.sphere {
        if let Ok(max_e) = euler_edge_bound(sphere.faces) {
            entries.push(
                Entry {
                    key: "euler_edges",
                    statement: "quotient graph has e ≤ 3f − 6 edges",
                    value: max_e as f64,
                    achieved: sphere.edges as f64,
                    upper: true,
                    applicable: true,
                    tolerance: 0.0,
                    inputs: &[("faces", sphere.faces as f64), ("vertices", sphere.vertices as f64)],
                }
                .into(),
            );
        }
    }
    for (i, cell) in vd.cells.iter().enumerate() {
        let key = format!("cell_area[{i}]");
        let bound = cell_area_lower_bound(s, &cell.center_angles);
        let applicable = cat0 && bound.is_ok() && !cell.center_angles.is_empty();
        let value = bound.unwrap_or(f64::NAN);
        let mut e: BoundEntry = Entry {
            key: &key,
            statement: "cell area ≥ Σ (sys/4)²·tan(θᵢ/2)",
            value,
            achieved: cell.area,
            upper: false,
            applicable,
            // Cell areas are mesh-approximate as well.
            tolerance: value.abs() * sq + 0.02 * cell.area,
            inputs: &[("systole", s), ("sides", cell.side_count as f64)],
        }
        .into();
        if !applicable {
            e.satisfied = false;
        }
        entries.push(e);
    }
    Ok(BoundReport {
        genus,
        cat0,
        area,
        systole: s,
        systolic_ratio: sr,
        mesh_error: eps,
        entries,
    })
}
