//! Structured run summaries.

use pncg_core::solver::{ConvergenceRecord, Termination};
use serde::{Deserialize, Serialize};

/// Distances that may be infinite (nothing to measure) round-trip through
/// JSON as `null`.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    /// 1-based frame number.
    pub frame: usize,
    pub time: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub wall_time_s: f64,
    /// Audited minimum surface distance (pairs and half-spaces) after the step.
    #[serde(with = "unbounded")]
    pub min_distance: f64,
    /// `null` in JSON when the scene has no half-spaces.
    #[serde(with = "unbounded")]
    pub min_ground_distance: f64,
    pub max_constraints: usize,
    pub avg_constraints: f64,
    pub de0: f64,
    pub final_de: f64,
    pub final_grad_inf: f64,
}

impl FrameReport {
    pub fn new(frame: usize, time: f64, record: &ConvergenceRecord, wall_time_s: f64) -> Self {
        let counts = record.rows.iter().map(|r| r.n_constraints);
        let n = record.rows.len().max(1) as f64;
        FrameReport {
            frame,
            time,
            iterations: record.iterations(),
            termination: record.termination,
            wall_time_s,
            min_distance: f64::INFINITY,
            min_ground_distance: f64::INFINITY,
            max_constraints: counts.clone().max().unwrap_or(0),
            avg_constraints: counts.sum::<usize>() as f64 / n,
            de0: record.de0,
            final_de: record.last().map_or(0.0, |r| r.de),
            final_grad_inf: record.final_grad_inf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    SolverAbort,
    Penetration,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: usize,
    pub avg_iters: f64,
    pub max_iters: usize,
    pub avg_contacts: f64,
    pub max_contacts: usize,
    #[serde(with = "unbounded")]
    pub min_distance: f64,
    pub iter_limit_frames: usize,
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn of(frames: &[FrameReport]) -> Self {
        let n = frames.len().max(1) as f64;
        RunSummary {
            frames: frames.len(),
            avg_iters: frames.iter().map(|f| f.iterations as f64).sum::<f64>() / n,
            max_iters: frames.iter().map(|f| f.iterations).max().unwrap_or(0),
            avg_contacts: frames.iter().map(|f| f.avg_constraints).sum::<f64>() / n,
            max_contacts: frames.iter().map(|f| f.max_constraints).max().unwrap_or(0),
            min_distance: frames.iter().map(|f| f.min_distance).fold(f64::INFINITY, f64::min),
            iter_limit_frames: frames.iter().filter(|f| f.termination == Termination::IterLimit).count(),
            wall_time_s: frames.iter().map(|f| f.wall_time_s).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsReport {
    pub h: f64,
    pub d_hat: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub iter_max: usize,
    pub beta_variant: String,
    pub splitting: String,
    pub precision: String,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scene: String,
    pub status: RunStatus,
    /// Error text when the run stopped early.
    pub error: Option<String>,
    pub num_vertices: usize,
    pub num_tets: usize,
    pub settings: SettingsReport,
    pub summary: RunSummary,
    pub frames: Vec<FrameReport>,
}
