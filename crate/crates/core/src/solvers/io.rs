use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::fit::FitResult;
use super::model::ModelSpec;
use crate::{Error, Result};

/// JSON summary of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelSpec,
    pub rows: usize,
    pub columns: usize,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub sparsity: f64,
    pub objective_trace: Vec<f64>,
}

impl From<&FitResult> for FitReport {
    fn from(r: &FitResult) -> Self {
        FitReport {
            model: r.model,
            rows: r.w.nrows(),
            columns: r.w.ncols(),
            iterations: r.iterations,
            converged: r.converged,
            objective: r.objective(),
            sparsity: r.sparsity,
            objective_trace: r.objective_trace.clone(),
        }
    }
}

/// Writes `w` as headerless CSV, one line per feature row.
pub fn write_weights_csv<W: Write>(writer: W, w: &Array2<f64>) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in w.rows() {
        out.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Error::invalid(format!("writing weights: {e}")))?;
    }
    out.flush().map_err(|e| Error::invalid(format!("writing weights: {e}")))?;
    Ok(())
}
