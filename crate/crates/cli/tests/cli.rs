use std::path::Path;
use std::process::{Command, Output};

use conesurf::bolza::build_octagon_model;
use conesurf::metric_graph::{build_homology_cover, refine, shortest_essential_cycle, Sources};
use conesurf::report::{constants_table, octagon_svg};

fn conesurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conesurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn table_text_and_json() {
    let out = conesurf(&["table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("metric g_O on Bolza: 0.8047"));
    assert!(text.contains("Jenni: 0.7437"));
    assert!(text.contains("Berger: 0.6666"));

    let out = conesurf(&["table", "--json"]);
    let expected = serde_json::to_value(constants_table()).unwrap();
    assert_eq!(json(&out), expected);
}

#[test]
fn svg_matches_library_and_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("octagon.svg");
    let p = path.to_str().unwrap();
    assert!(conesurf(&["svg", "--x", "2", "--out", p]).status.success());
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(conesurf(&["svg", "--x", "2", "--out", p]).status.success());
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
    assert_eq!(first, octagon_svg(&build_octagon_model(2.0).unwrap()));
}

fn write_model(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("bolza.json");
    let out = conesurf(&["build", "--x", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    path
}

#[test]
fn build_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path());
    let out = conesurf(&["check", "--surface", path.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["genus"], 2);
    assert_eq!(v["cat0"], true);
    assert_eq!(v["cone_angles"].as_array().unwrap().len(), 22);
}

#[test]
fn corrupted_surface_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["gluings"].as_array_mut().unwrap().pop();
    std::fs::write(&path, v.to_string()).unwrap();
    for cmd in ["check", "verify-all"] {
        let out = conesurf(&[cmd, "--surface", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("glued 0 times"), "{err}");
    }
}

#[test]
fn coarse_mesh_is_an_input_error() {
    let out = conesurf(&["verify-all", "--x", "1", "--h", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not below the shortest polygon edge"));
}

#[test]
fn systole_matches_library() {
    let out = conesurf(&["systole", "--x", "1", "--h", "0.05", "--sources", "cone"]);
    assert!(out.status.success());
    let v = json(&out);
    let m = build_octagon_model(1.0).unwrap();
    let mesh = refine(&m.surface, 0.05).unwrap();
    let cover = build_homology_cover(&mesh).unwrap();
    let est = shortest_essential_cycle(&cover, &Sources::ConePoints).unwrap();
    assert_eq!(v["length"].as_f64().unwrap(), est.length);
    assert_eq!(v["class"].as_u64().unwrap(), est.class as u64);
    assert_eq!(v["cycle_edges"].as_u64().unwrap(), est.cycle.edges.len() as u64);
}

#[test]
fn voronoi_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cells.csv");
    let out = conesurf(&[
        "voronoi",
        "--x",
        "1",
        "--h",
        "0.05",
        "--sites",
        "weierstrass",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["cells"].as_array().unwrap().len(), 6);
    assert_eq!(v["sphere"]["edges"], 12);
    assert_eq!(v["dual_edges"], 12);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);

    let out = conesurf(&["bounds", "--x", "1", "--h", "0.05", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    let sr = v["systolic_ratio"].as_f64().unwrap();
    assert!((sr - 0.8047).abs() < 0.08 * 0.8047);

    let out = conesurf(&["voronoi", "--x", "1", "--h", "0.05", "--sites", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let out = conesurf(&["verify-all", "--x", "1", "--h", "0.05", "--json"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let v = json(&out);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn certificate_lists_twelve_dominoes() {
    let out = conesurf(&["certificate", "--x", "1"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["candidates"].as_array().unwrap().len(), 12);
    let out = conesurf(&["certificate", "--circuits", "6"]);
    assert_eq!(json(&out).as_array().unwrap().len(), 22);
}
