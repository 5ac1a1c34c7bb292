//! Per-round records of an experiment and their CSV form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lattice::LatticePoint;
use crate::solvers::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub played: LatticePoint,
    pub loss: f64,
    pub cumloss: f64,
    /// Present on every row with per-round regret, otherwise only on row `T`.
    pub regret_to_date: Option<f64>,
}

/// Parameters of a run. Contains nothing time-dependent, so identical
/// configurations serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub horizon: usize,
    pub dim: usize,
    pub width: i64,
    pub lipschitz: f64,
    pub bound: f64,
    pub eta: f64,
    pub delta: Option<f64>,
    pub delta_clamped: bool,
    pub theoretical_bound: f64,
    pub projection_tolerance: f64,
    pub projection_max_sweeps: usize,
    pub x1: Vec<f64>,
    pub adversary: String,
    pub regret_omitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub records: Vec<RoundRecord>,
    pub best_fixed_point: Option<LatticePoint>,
    pub best_fixed_loss: Option<f64>,
    pub regret: Option<f64>,
    pub meta: TraceMeta,
}

impl RegretTrace {
    pub fn total_loss(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumloss)
    }

    /// `t,loss,cumloss,regret_to_date` followed by one row per round.
    ///
    /// Floats use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,loss,cumloss,regret_to_date\n");
        for r in &self.records {
            let _ = write!(out, "{},{:?},{:?},", r.t, r.loss, r.cumloss);
            if let Some(reg) = r.regret_to_date {
                let _ = write!(out, "{reg:?}");
            }
            out.push('\n');
        }
        out
    }
}
