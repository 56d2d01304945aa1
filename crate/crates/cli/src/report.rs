//! Machine-readable run reports and residual histories.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use tvrelax::{AlphaStage, SolveReport, SolverParams, StopReason};

use crate::error::{CliError, CliResult};

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: PathBuf,
    pub sha256: String,
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
}

/// Per-solve summary; everything except wall time, which lives in
/// [`Timing`] so the rest of a report is reproducible byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub newton_iters: usize,
    pub pcg_iters_total: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub relative_residual: f64,
    pub final_gap: f64,
    pub binary_fraction: f64,
    pub stages: Vec<AlphaStage>,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        SolveSummary {
            newton_iters: r.newton_iters,
            pcg_iters_total: r.pcg_iters.iter().sum(),
            converged: r.converged,
            stop_reason: r.stop_reason,
            relative_residual: r.relative_residual(),
            final_gap: r.final_gap,
            binary_fraction: r.binary_fraction,
            stages: r.stages.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub wall_time_s: f64,
    pub solver_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub version: &'static str,
    /// `ok` or `not_converged`.
    pub status: &'static str,
    pub input: Option<InputInfo>,
    pub params: Option<SolverParams>,
    pub threads: Option<usize>,
    pub solves: Vec<SolveSummary>,
    pub result: Value,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            version: env!("CARGO_PKG_VERSION"),
            status: "ok",
            input: None,
            params: None,
            threads: None,
            solves: Vec::new(),
            result: Value::Null,
            timing: Timing::default(),
        }
    }

    pub fn add_solves(&mut self, reports: &[SolveReport]) {
        self.solves.extend(reports.iter().map(SolveSummary::from));
        self.timing.solver_time_s += reports.iter().map(|r| r.wall_time_s).sum::<f64>();
        if reports.iter().any(|r| !r.converged) {
            self.status = "not_converged";
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::io(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// `iter,residual,pcg_iters` rows for each solve in turn; `iter` restarts
/// at 0 for every solve, and the initial row has no PCG work.
pub fn write_residuals(path: &Path, reports: &[SolveReport]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(["iter", "residual", "pcg_iters"]).map_err(io)?;
    for r in reports {
        for (k, res) in r.residual_history.iter().enumerate() {
            let pcg = if k == 0 { 0 } else { r.pcg_iters[k - 1] };
            w.write_record([k.to_string(), format!("{res:e}"), pcg.to_string()])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
