use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Column z-scoring fitted on one set of rows and applied to others.
/// Constant columns are centred but not scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    pub scale: Array1<f64>,
    /// Append a constant 1 column after scaling.
    pub intercept: bool,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>, intercept: bool) -> Self {
        let n = x.nrows().max(1) as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let scale = x
            .axis_iter(Axis(1))
            .zip(mean.iter())
            .map(|(col, m)| {
                let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
                if var > 1e-24 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer {
            mean,
            scale,
            intercept,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.mean.len() + usize::from(self.intercept)
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let z = (&x - &self.mean) / &self.scale;
        if self.intercept {
            concatenate![Axis(1), z, Array2::ones((x.nrows(), 1))]
        } else {
            z
        }
    }
}
