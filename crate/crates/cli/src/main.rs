use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use conesurf::bolza::{build_octagon_model, enumerate_circuits, systolic_certificate, BolzaOctagonModel};
use conesurf::flatsurf::{check_gauss_bonnet, is_cat0, ConeSurface};
use conesurf::metric_graph::{build_homology_cover, refine, shortest_essential_cycle};
use conesurf::report::{
    bounds_for, constants_table, named_sites, octagon_svg, parse_sources, verify_all, verify_surface, ReportError,
};
use conesurf::voronoi::voronoi_decompose;

#[derive(Parser)]
#[command(
    name = "conesurf",
    version,
    about = "Flat cone surfaces and the optimal CAT(0) metric on the Bolza surface"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SurfaceArgs {
    /// Surface JSON file; without it the Bolza octagon model at scale --x is used.
    #[arg(long)]
    surface: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Bolza octagon model (or validate a surface file) and print its summary or JSON.
    Build {
        #[command(flatten)]
        input: SurfaceArgs,
        #[arg(long)]
        json: bool,
        /// Write the surface JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Topology, cone angles, Gauss–Bonnet and CAT(0).
    Check {
        #[command(flatten)]
        input: SurfaceArgs,
        #[arg(long)]
        json: bool,
    },
    /// Mesh estimate of the homology systole.
    Systole {
        #[command(flatten)]
        input: SurfaceArgs,
        #[arg(long)]
        h: f64,
        /// cone, all, or default (cone points and edge midpoints).
        #[arg(long, default_value = "default")]
        sources: String,
    },
    /// Voronoi cells around a set of sites.
    Voronoi {
        #[command(flatten)]
        input: SurfaceArgs,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value = "weierstrass")]
        sites: String,
        /// Also write per-cell statistics as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate every applicable systolic-ratio and area bound.
    Bounds {
        #[command(flatten)]
        input: SurfaceArgs,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value = "weierstrass")]
        sites: String,
        #[arg(long)]
        json: bool,
    },
    /// Combinatorial systole certificate for the Bolza model.
    Certificate {
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        /// List every cube circuit up to this length instead.
        #[arg(long)]
        circuits: Option<usize>,
    },
    /// The genus-two table of systolic ratios and bounds.
    Table {
        #[arg(long)]
        json: bool,
    },
    /// Render one octagon of the Bolza model as SVG.
    Svg {
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole verification pipeline.
    VerifyAll {
        #[command(flatten)]
        input: SurfaceArgs,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value = "weierstrass")]
        sites: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

/// Distinguishes failed checks (exit 1) from unusable input (exit 2).
enum Failure {
    Verification(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.into())
        } else {
            Failure::Verification(e.to_string())
        }
    }
}

enum Loaded {
    Model(Box<BolzaOctagonModel>),
    File(ConeSurface),
}

impl Loaded {
    fn surface(&self) -> &ConeSurface {
        match self {
            Loaded::Model(m) => &m.surface,
            Loaded::File(s) => s,
        }
    }

    fn model(&self) -> Option<&BolzaOctagonModel> {
        match self {
            Loaded::Model(m) => Some(m),
            Loaded::File(_) => None,
        }
    }
}

fn load(input: &SurfaceArgs) -> Result<Loaded, Failure> {
    match &input.surface {
        Some(path) => Ok(Loaded::File(
            ConeSurface::from_path(path)
                .map_err(ReportError::from)
                .with_context(|| format!("loading {}", path.display()))?,
        )),
        None => Ok(Loaded::Model(Box::new(
            build_octagon_model(input.x).map_err(ReportError::from)?,
        ))),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(value).context("serializing output")?);
    Ok(())
}

#[derive(Serialize)]
struct CheckOutput {
    genus: u32,
    vertices: usize,
    edges: usize,
    faces: usize,
    area: f64,
    gauss_bonnet_residual: f64,
    cat0: bool,
    cone_angles: Vec<f64>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build { input, json, out } => {
            let loaded = load(&input)?;
            let s = loaded.surface();
            if let Some(path) = out {
                std::fs::write(&path, s.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                println!("{}", s.to_json());
            } else {
                let t = s.topology();
                println!(
                    "{} polygons, {} gluings, genus {}, {} cone points, area {:.12}",
                    s.polygons().len(),
                    s.gluings().len(),
                    s.genus(),
                    s.cone_points().len(),
                    s.area()
                );
                println!(
                    "V={} E={} F={} χ={}",
                    t.vertices, t.edges, t.faces, t.euler_characteristic
                );
            }
        }
        Command::Check { input, json } => {
            let loaded = load(&input)?;
            let s = loaded.surface();
            let t = s.topology();
            let out = CheckOutput {
                genus: s.genus(),
                vertices: t.vertices,
                edges: t.edges,
                faces: t.faces,
                area: s.area(),
                gauss_bonnet_residual: check_gauss_bonnet(s),
                cat0: is_cat0(s).cat0,
                cone_angles: s.cone_points().iter().map(|c| c.total_angle).collect(),
            };
            if json {
                print_json(&out)?;
            } else {
                println!(
                    "genus {} (V={} E={} F={})",
                    out.genus, out.vertices, out.edges, out.faces
                );
                println!("area {:.12}", out.area);
                println!("Gauss-Bonnet residual {:.3e}", out.gauss_bonnet_residual);
                println!("CAT(0): {}", out.cat0);
            }
            if out.gauss_bonnet_residual > 1e-9 {
                return Err(Failure::Verification("Gauss-Bonnet residual above 1e-9".into()));
            }
        }
        Command::Systole { input, h, sources } => {
            let loaded = load(&input)?;
            let sources = parse_sources(&sources)?;
            let mesh = refine(loaded.surface(), h).map_err(ReportError::from)?;
            let cover = build_homology_cover(&mesh).map_err(ReportError::from)?;
            let est = shortest_essential_cycle(&cover, &sources).map_err(ReportError::from)?;
            print_json(&serde_json::json!({
                "length": est.length,
                "class": est.class,
                "cycle_edges": est.cycle.edges.len(),
                "error_band": [est.lower_estimate(), est.length],
                "relative_error_bound": est.error_bound,
                "h": est.h,
                "near_minimal_classes": est.near_minimal.len(),
                "sources": est.sources,
            }))?;
        }
        Command::Voronoi { input, h, sites, csv } => {
            let loaded = load(&input)?;
            let mesh = refine(loaded.surface(), h).map_err(ReportError::from)?;
            let vd = voronoi_decompose(&mesh, &named_sites(&mesh, &sites)?).map_err(ReportError::from)?;
            if let Some(path) = csv {
                let mut text = String::from("cell,site,area,side_count,center_angles\n");
                for (i, c) in vd.cells.iter().enumerate() {
                    let angles: Vec<String> = c.center_angles.iter().map(|t| format!("{t:.9}")).collect();
                    text.push_str(&format!(
                        "{i},{},{:.12},{},{}\n",
                        c.site,
                        c.area,
                        c.side_count,
                        angles.join(";")
                    ));
                }
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&serde_json::json!({
                "cells": vd.cells,
                "dual_edges": vd.dual_edges().len(),
                "arcs": vd.arcs.len(),
                "voronoi_vertices": vd.voronoi_vertices,
                "sphere": vd.sphere,
                "total_area": vd.total_area,
                "surface_area": vd.surface_area,
                "max_cell_radius": vd.max_cell_radius,
            }))?;
        }
        Command::Bounds { input, h, sites, json } => {
            let loaded = load(&input)?;
            let (_, _, report) = bounds_for(loaded.surface(), h, &sites, loaded.model())?;
            if json {
                print_json(&report)?;
            } else {
                println!(
                    "SR = {:.6} (systole {:.6}, area {:.6})",
                    report.systolic_ratio, report.systole, report.area
                );
                for e in &report.entries {
                    let status = match (e.applicable, e.satisfied) {
                        (false, _) => "n/a ",
                        (true, true) => "ok  ",
                        (true, false) => "FAIL",
                    };
                    println!(
                        "{status} {:<22} {:.6} vs {:.6}  slack {:+.6}",
                        e.key, e.achieved, e.value, e.slack
                    );
                }
            }
            if !report.all_satisfied() {
                let names: Vec<&str> = report.violations().map(|e| e.key.as_str()).collect();
                return Err(Failure::Verification(format!("violated: {}", names.join(", "))));
            }
        }
        Command::Certificate { x, circuits } => match circuits {
            Some(n) if (3..=12).contains(&n) => print_json(&enumerate_circuits(n))?,
            Some(n) => {
                return Err(Failure::Input(anyhow::anyhow!(
                    "circuit length must lie in 3..=12, got {n}"
                )))
            }
            None => {
                let model = build_octagon_model(x).map_err(ReportError::from)?;
                print_json(&systolic_certificate(&model).map_err(ReportError::from)?)?;
            }
        },
        Command::Table { json } => {
            let t = constants_table();
            if json {
                print_json(&t)?;
            } else {
                print!("{}", t.to_text());
            }
        }
        Command::Svg { x, out } => {
            let model = build_octagon_model(x).map_err(ReportError::from)?;
            let svg = octagon_svg(&model);
            match out {
                Some(path) => std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{svg}"),
            }
        }
        Command::VerifyAll {
            input,
            h,
            sites,
            seed,
            json,
        } => {
            let report = match &input.surface {
                Some(_) => {
                    let loaded = load(&input)?;
                    let h = h.unwrap_or(loaded.surface().shortest_edge() / 8.0);
                    verify_surface(loaded.surface(), h, &sites, seed)?
                }
                None => verify_all(input.x, h.unwrap_or(input.x / 40.0), seed)?,
            };
            if json {
                print_json(&report)?;
            } else {
                print!("{}", report.to_text());
            }
            if let Some(c) = report.first_failure() {
                return Err(Failure::Verification(format!("check '{}' failed", c.name)));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
