//! `pncg ablation`: the same scene under several β formulas.

use crate::run::{with_threads, Overrides};
use crate::CliError;
use pncg_core::sim::{Precision, Scene, Simulation};
use pncg_core::solver::{BetaVariant, Termination};
use pncg_core::Real;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: usize,
    pub iterations: usize,
    pub termination: Termination,
    /// Energy at the start of every iteration, then the final energy.
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub variant: BetaVariant,
    pub mean_iterations: f64,
    pub iter_limit_steps: usize,
    pub steps: Vec<StepTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub scene: String,
    pub steps: usize,
    pub epsilon: f64,
    pub iter_max: usize,
    pub variants: Vec<VariantResult>,
}

impl AblationReport {
    pub fn get(&self, v: BetaVariant) -> Option<&VariantResult> {
        self.variants.iter().find(|r| r.variant == v)
    }

    /// One row per step, one column per variant.
    pub fn table(&self) -> String {
        let mut s = String::from("step");
        for v in &self.variants {
            write!(s, "\t{}", v.variant).unwrap();
        }
        s.push('\n');
        for k in 0..self.steps {
            write!(s, "{}", k + 1).unwrap();
            for v in &self.variants {
                match v.steps.get(k) {
                    Some(t) => write!(s, "\t{}", t.iterations).unwrap(),
                    None => s.push_str("\t-"),
                }
            }
            s.push('\n');
        }
        s.push_str("mean");
        for v in &self.variants {
            write!(s, "\t{:.3}", v.mean_iterations).unwrap();
        }
        s.push('\n');
        s
    }
}

/// Runs the first `steps` time steps of the scene once per variant, sharing
/// every other setting.
pub fn ablation(scene_path: &Path, variants: &[BetaVariant], steps: usize, overrides: &Overrides) -> Result<AblationReport, CliError> {
    if variants.is_empty() {
        return Err(CliError::Config("no variants given".into()));
    }
    let mut scene = Scene::load(scene_path)?;
    overrides.apply(&mut scene);
    scene.validate()?;
    let mut results = Vec::new();
    for &variant in variants {
        let mut s = scene.clone();
        s.solver.beta_variant = variant;
        let r = with_threads(overrides.threads, || match s.solver.precision {
            Precision::F64 => run_variant::<f64>(s, variant, steps),
            Precision::F32 => run_variant::<f32>(s, variant, steps),
        })??;
        results.push(r);
    }
    Ok(AblationReport {
        scene: scene.name.clone(),
        steps,
        epsilon: scene.solver.epsilon,
        iter_max: scene.solver.iter_max,
        variants: results,
    })
}

fn run_variant<T: Real>(scene: Scene, variant: BetaVariant, steps: usize) -> Result<VariantResult, CliError> {
    let mut sim = Simulation::<T>::new(scene)?;
    let mut traces = Vec::with_capacity(steps);
    for step in 1..=steps {
        let rec = sim.step().map_err(|e| CliError::Solver(format!("{variant}: {e}")))?;
        let mut energy: Vec<f64> = rec.rows.iter().map(|r| r.energy).collect();
        if let Some(last) = rec.rows.last() {
            energy.push(last.energy - last.de);
        }
        traces.push(StepTrace {
            step,
            iterations: rec.iterations(),
            termination: rec.termination,
            energy,
        });
    }
    let n = traces.len().max(1) as f64;
    Ok(VariantResult {
        variant,
        mean_iterations: traces.iter().map(|t| t.iterations as f64).sum::<f64>() / n,
        iter_limit_steps: traces.iter().filter(|t| t.termination == Termination::IterLimit).count(),
        steps: traces,
    })
}

/// Writes `ablation.json`, `ablation_table.tsv` and `energy_traces.csv`.
pub fn write_ablation(report: &AblationReport, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.into()))?;
    fs::write(out.join("ablation.json"), json + "\n")?;
    fs::write(out.join("ablation_table.tsv"), report.table())?;
    let mut csv = String::from("variant,step,iter,energy\n");
    for v in &report.variants {
        for t in &v.steps {
            for (i, e) in t.energy.iter().enumerate() {
                writeln!(csv, "{},{},{},{:e}", v.variant, t.step, i, e).unwrap();
            }
        }
    }
    fs::write(out.join("energy_traces.csv"), csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variant_table_is_one_column() {
        let r = AblationReport {
            scene: "x".into(),
            steps: 2,
            epsilon: 1e-3,
            iter_max: 10,
            variants: vec![VariantResult {
                variant: BetaVariant::Dk,
                mean_iterations: 2.5,
                iter_limit_steps: 0,
                steps: vec![
                    StepTrace { step: 1, iterations: 2, termination: Termination::Converged, energy: vec![] },
                    StepTrace { step: 2, iterations: 3, termination: Termination::Converged, energy: vec![] },
                ],
            }],
        };
        assert_eq!(r.table(), "step\tdk\n1\t2\n2\t3\nmean\t2.500\n");
    }
}
