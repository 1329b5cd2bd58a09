use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-row weights of the crowd loss (the diagonal of the reliability matrix).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reliability {
    #[default]
    Identity,
    PerWorker(Vec<f64>),
}

pub fn build_reliability(spec: &Reliability, n: usize) -> Result<Array1<f64>> {
    match spec {
        Reliability::Identity => Ok(Array1::ones(n)),
        Reliability::PerWorker(w) => {
            if w.len() != n {
                return Err(Error::dim(format!("{} reliability weights for {n} crowd rows", w.len())));
            }
            if let Some(bad) = w.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::invalid(format!("reliability weight {bad} is not positive")));
            }
            Ok(Array1::from(w.clone()))
        }
    }
}

/// Reliability of a worker from the RMSE of their trace to the crowd median:
/// `1 / (1 + rmse)`.
pub fn rmse_reliability(trace: &[f64], median: &[f64]) -> Result<f64> {
    if trace.len() != median.len() || trace.is_empty() {
        return Err(Error::dim(format!("trace length {} vs median length {}", trace.len(), median.len())));
    }
    let mse = trace
        .iter()
        .zip(median)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / trace.len() as f64;
    Ok(1.0 / (1.0 + mse.sqrt()))
}
