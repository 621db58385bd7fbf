//! Per-iteration solver log.

use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Predicted energy decrease of the applied step.
    pub de: f64,
    /// Step size; the smallest per-region value when splitting.
    pub alpha: f64,
    /// Step size of every region.
    pub alphas: Vec<f64>,
    /// `‖g‖∞` at the start of the iteration.
    pub grad_inf: f64,
    pub n_constraints: usize,
    /// The step cap was binding in at least one region.
    pub capped: bool,
    /// `max_r α_r ‖p_r‖∞`.
    pub max_step: f64,
    /// Some region used `β = 0` after the first iteration.
    pub restart: bool,
    /// Incremental potential at the start of the iteration.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `ΔE < ε ΔE₀`.
    Converged,
    /// `‖g‖∞` fell below `1e-12` of its initial value.
    GradientVanished,
    /// The search direction was exactly zero.
    ZeroDirection,
    /// `ΔE₀` was negligible against the energy: the start is already a minimizer.
    FixedPoint,
    IterLimit,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        self != Termination::IterLimit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub rows: Vec<IterationRecord>,
    pub termination: Termination,
    /// Energy decrease of the first iteration.
    pub de0: f64,
    pub energy0: f64,
    pub grad_inf0: f64,
    /// `‖g‖∞` at the last gradient evaluation.
    pub final_grad_inf: f64,
}

pub const CSV_HEADER: &str = "iter,dE,alpha,grad_inf,n_constraints,capped";

impl IterationRecord {
    pub fn csv_fields(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{}",
            self.iter, self.de, self.alpha, self.grad_inf, self.n_constraints, self.capped
        )
    }
}

impl ConvergenceRecord {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.csv_fields())?;
        }
        Ok(())
    }
}
