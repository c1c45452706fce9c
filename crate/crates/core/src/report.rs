//! File formats: segment CSV, solution and ensemble manifests, path JSON,
//! and distance-matrix CSV with its JSON sidecar. All numeric JSON output
//! keeps full double precision and no timestamps, so reruns are
//! byte-identical given the same inputs and seed.

use crate::error::Result;
use crate::geom::Point;
use crate::integrate::Segment;
use crate::path::PathCurve;
use crate::solution::{Ensemble, SolutionWindow, TimeWindow};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub fn segment_csv(seg: &Segment) -> String {
    let mut out = String::from("t,x1,x2,branch\n");
    for &(t, p) in &seg.samples {
        writeln!(out, "{t},{},{},{}", p.x1, p.x2, seg.branch).unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentRef {
    pub branch: String,
    pub csv: String,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionManifest {
    pub window: TimeWindow,
    pub provenance: String,
    pub switch_times: Vec<f64>,
    pub segments: Vec<SegmentRef>,
}

/// Write a solution as a JSON manifest plus one CSV per segment; returns
/// the manifest file name.
pub fn write_solution(dir: &Path, name: &str, sol: &SolutionWindow) -> Result<String> {
    fs::create_dir_all(dir)?;
    let mut refs = Vec::new();
    for (i, seg) in sol.segments.iter().enumerate() {
        let csv_name = format!("{name}_seg{i:04}.csv");
        fs::write(dir.join(&csv_name), segment_csv(seg))?;
        refs.push(SegmentRef {
            branch: seg.branch.to_string(),
            csv: csv_name,
            t_start: seg.t_start,
            t_end: seg.t_end,
        });
    }
    let manifest = SolutionManifest {
        window: sol.window,
        provenance: format!("{:?}", sol.provenance).to_lowercase(),
        switch_times: sol.switch_times.clone(),
        segments: refs,
    };
    let file = format!("{name}.json");
    fs::write(dir.join(&file), serde_json::to_string_pretty(&manifest)?)?;
    Ok(file)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub name: String,
    pub members: Vec<String>,
}

pub fn write_ensemble(dir: &Path, ens: &Ensemble) -> Result<String> {
    fs::create_dir_all(dir)?;
    let mut members = Vec::new();
    for (i, m) in ens.members.iter().enumerate() {
        members.push(write_solution(dir, &format!("{}_{i:03}", ens.name), m)?);
    }
    let manifest = EnsembleManifest {
        name: ens.name.clone(),
        members,
    };
    let file = format!("{}_manifest.json", ens.name);
    fs::write(dir.join(&file), serde_json::to_string_pretty(&manifest)?)?;
    Ok(file)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathManifest {
    pub a: Point,
    pub b: Point,
    pub t0: f64,
    pub t1: f64,
    pub samples_csv: String,
    pub source_solution: String,
    pub simple: bool,
}

pub fn write_path(
    dir: &Path,
    name: &str,
    path: &PathCurve,
    source: &str,
    simple: bool,
) -> Result<String> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("t,x1,x2\n");
    for (t, p) in path.samples() {
        writeln!(csv, "{t},{},{}", p.x1, p.x2).unwrap();
    }
    let csv_name = format!("{name}_samples.csv");
    fs::write(dir.join(&csv_name), csv)?;
    let manifest = PathManifest {
        a: path.a,
        b: path.b,
        t0: path.t0,
        t1: path.t1,
        samples_csv: csv_name,
        source_solution: source.into(),
        simple,
    };
    let file = format!("{name}.json");
    fs::write(dir.join(&file), serde_json::to_string_pretty(&manifest)?)?;
    Ok(file)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub s: f64,
    pub grid: f64,
    pub trunc_bound: f64,
    pub members: usize,
}

pub fn write_distance_matrix(
    dir: &Path,
    name: &str,
    mat: &[Vec<f64>],
    sidecar: &MatrixSidecar,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = mat.len();
    let mut csv = String::new();
    write!(csv, "id").unwrap();
    for j in 0..n {
        write!(csv, ",m{j}").unwrap();
    }
    csv.push('\n');
    for (i, row) in mat.iter().enumerate() {
        write!(csv, "m{i}").unwrap();
        for v in row {
            write!(csv, ",{v}").unwrap();
        }
        csv.push('\n');
    }
    fs::write(dir.join(format!("{name}.csv")), csv)?;
    fs::write(
        dir.join(format!("{name}_meta.json")),
        serde_json::to_string_pretty(sidecar)?,
    )?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
