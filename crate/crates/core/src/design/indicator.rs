use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One-hot row of length `r * c` marking `class` inside the block of `task`
/// (both 1-based).
pub fn build_label_indicator(task: usize, class: usize, r: usize, c: usize) -> Result<Array1<f64>> {
    if task == 0 || task > r {
        return Err(Error::invalid(format!("task {task} outside 1..={r}")));
    }
    if class == 0 || class > c {
        return Err(Error::invalid(format!("class {class} outside 1..={c}")));
    }
    let mut y = Array1::zeros(r * c);
    y[(task - 1) * c + class - 1] = 1.0;
    Ok(y)
}

/// `count` equal-width rating levels over [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Levels {
    pub count: usize,
}

impl Levels {
    pub fn new(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid(format!("need at least 2 levels, got {count}")));
        }
        Ok(Levels { count })
    }

    pub fn width(&self) -> f64 {
        2.0 / self.count as f64
    }

    /// Level index (1-based) of a rating. Bin edges belong to the upper bin,
    /// except +1 which belongs to the top level.
    pub fn level_of(&self, value: f64) -> Result<usize> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("rating {value} outside [-1, 1]")));
        }
        let k = ((value + 1.0) * self.count as f64 / 2.0).floor() as usize + 1;
        Ok(k.min(self.count))
    }

    pub fn midpoint(&self, level: usize) -> f64 {
        -1.0 + (level as f64 - 0.5) * self.width()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (1..=self.count).map(|k| self.midpoint(k)).collect()
    }
}

/// Maps ratings to level indices and returns the level midpoints for decoding.
pub fn discretize_levels(values: &[f64], count: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let levels = Levels::new(count)?;
    let classes = values.iter().map(|&v| levels.level_of(v)).collect::<Result<_>>()?;
    Ok((classes, levels.midpoints()))
}
