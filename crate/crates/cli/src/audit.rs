//! `pncg audit`: discrete penetration check of written frames.

use crate::obj::read_obj;
use crate::CliError;
use nalgebra::Vector3;
use pncg_core::contact::{audit_positions, AuditReport, HalfSpace, Surface};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAudit {
    pub path: PathBuf,
    pub report: AuditReport,
}

impl FrameAudit {
    pub fn ok(&self) -> bool {
        self.report.penetration_free()
    }
}

/// Parses `px,py,pz,nx,ny,nz`.
pub fn parse_plane(s: &str) -> Result<HalfSpace, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != 6 {
        return Err(format!("expected 6 numbers, got {}", v.len()));
    }
    let n = Vector3::new(v[3], v[4], v[5]);
    if !n.norm().is_finite() || n.norm() <= 0.0 {
        return Err("plane normal is zero".into());
    }
    Ok(HalfSpace::new(Vector3::new(v[0], v[1], v[2]), n))
}

/// `*.obj` files of `dir`, sorted by name.
pub fn frame_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "obj"))
        .collect();
    files.sort();
    Ok(files)
}

/// Audits one OBJ surface. `exact` selects the all-pairs search, otherwise
/// the spatial hash starting at radius `d_hat`.
pub fn audit_obj(path: &Path, d_hat: f64, planes: &[HalfSpace], exact: bool) -> Result<AuditReport, CliError> {
    let surf = read_obj(BufReader::new(File::open(path)?)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if surf.vertices.is_empty() {
        return Err(CliError::Config(format!("{}: no vertices", path.display())));
    }
    let vertices: Vec<usize> = (0..surf.vertices.len()).collect();
    let edges = surf.edges();
    let surface = Surface {
        vertices: &vertices,
        edges: &edges,
        faces: &surf.faces,
    };
    Ok(audit_positions(surface, &surf.vertices, planes, if exact { None } else { Some(d_hat) }))
}

pub fn audit_dir(dir: &Path, d_hat: f64, planes: &[HalfSpace], exact: bool) -> Result<Vec<FrameAudit>, CliError> {
    let files = frame_files(dir)?;
    if files.is_empty() {
        return Err(CliError::Config(format!("no .obj frames in {}", dir.display())));
    }
    files
        .into_iter()
        .map(|path| {
            let report = audit_obj(&path, d_hat, planes, exact)?;
            Ok(FrameAudit { path, report })
        })
        .collect()
}
