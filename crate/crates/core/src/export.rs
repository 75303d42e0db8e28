//! Writing and loading clusters, trajectories, overlays and reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterDoc, ClusterState};
use crate::error::{Hl0Error, Result};
use crate::experiments::ExperimentReport;
use crate::fingers::{rescale, FingerSet, GapTrajectory, ScalingKind};
use crate::flow::{read_trajectories_csv, write_trajectories_csv, FlowTrajectory, Scaling};
use crate::geometry::PlanarSet;
use crate::particle::ParticleSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.csv` is CSV, everything else JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Finger or gap in the overlay schema. Points are log coordinates
/// `(s, x) = (log|z|, arg z)` after the named scaling. For fingers `chain`
/// lists particle indices; for gaps it lists the levels of the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayDoc {
    pub seed_re: f64,
    pub seed_im: f64,
    pub scaling: String,
    pub points: Vec<[f64; 2]>,
    pub chain: Vec<usize>,
}

fn scaled_points(points: &PlanarSet, spec: &ParticleSpec, scaling: Option<ScalingKind>) -> (String, Vec<[f64; 2]>) {
    match scaling {
        None => ("none".into(), points.points.iter().map(|w| [w.re, w.im]).collect()),
        Some(k) => {
            let name = match k {
                ScalingKind::Sigma => "sigma",
                ScalingKind::SigmaBar => "sigmabar",
            };
            (name.into(), rescale(points, spec, k).points)
        }
    }
}

impl OverlayDoc {
    pub fn from_finger(f: &FingerSet, spec: &ParticleSpec, scaling: Option<ScalingKind>) -> Self {
        let (scaling, points) = scaled_points(&f.points, spec, scaling);
        OverlayDoc {
            seed_re: f.seed.re,
            seed_im: f.seed.im,
            scaling,
            points,
            chain: f.chain.clone(),
        }
    }

    pub fn from_gap(g: &GapTrajectory, spec: &ParticleSpec, scaling: Option<ScalingKind>) -> Self {
        let (scaling, points) = scaled_points(&g.points, spec, scaling);
        OverlayDoc {
            seed_re: g.seed.re,
            seed_im: g.seed.im,
            scaling,
            points,
            chain: g.levels.clone(),
        }
    }
}

pub enum ExportObject<'a> {
    Cluster(&'a ClusterState),
    Trajectories(&'a [FlowTrajectory]),
    Overlays(&'a [OverlayDoc]),
    Report(&'a ExperimentReport),
}

impl ExportObject<'_> {
    fn name(&self) -> &'static str {
        match self {
            ExportObject::Cluster(_) => "cluster",
            ExportObject::Trajectories(_) => "trajectories",
            ExportObject::Overlays(_) => "overlays",
            ExportObject::Report(_) => "report",
        }
    }
}

fn json_bytes<T: Serialize>(v: &T, path: &Path) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Hl0Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    s.push(b'\n');
    Ok(s)
}

/// Writes `object` to `path`. Floats use shortest round-trip form, so
/// loading gives back the same values bit for bit.
pub fn export_data(object: ExportObject<'_>, path: &Path, format: Format) -> Result<()> {
    let bytes = match (&object, format) {
        (ExportObject::Cluster(c), Format::Json) => json_bytes(&c.to_doc(), path)?,
        (ExportObject::Trajectories(t), Format::Json) => json_bytes(t, path)?,
        (ExportObject::Trajectories(t), Format::Csv) => {
            let mut buf = Vec::new();
            write_trajectories_csv(&mut buf, t).map_err(|e| Hl0Error::io(path, e))?;
            buf
        }
        (ExportObject::Overlays(o), Format::Json) => json_bytes(o, path)?,
        (ExportObject::Report(r), Format::Json) => json_bytes(r, path)?,
        (o, Format::Csv) => {
            return Err(Hl0Error::Unsupported(format!("{} as CSV", o.name())));
        }
    };
    let mut f = fs::File::create(path).map_err(|e| Hl0Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Hl0Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Hl0Error::io(path, e))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Hl0Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn load_cluster(path: &Path) -> Result<ClusterState> {
    ClusterState::from_doc(load_json::<ClusterDoc>(path)?)
}

/// JSON files carry their scaling; CSV files are read with `scaling`.
pub fn load_trajectories(path: &Path, scaling: Scaling) -> Result<Vec<FlowTrajectory>> {
    match Format::from_path(path) {
        Format::Json => load_json(path),
        Format::Csv => read_trajectories_csv(&read(path)?, scaling),
    }
}

pub fn load_overlays(path: &Path) -> Result<Vec<OverlayDoc>> {
    load_json(path)
}
