use std::ops::Range;

use crate::{Error, Result};

/// Whether the cross-validated score is a loss or a gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

/// Splits `0..n` into `folds` consecutive chunks whose sizes differ by at
/// most one (earlier chunks take the remainder).
pub fn contiguous_folds(n: usize, folds: usize) -> Vec<Range<usize>> {
    let base = n / folds;
    let extra = n % folds;
    let mut start = 0;
    (0..folds)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Mean validation score of every grid value and the selected one.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub best: f64,
    /// `(value, mean score)` in ascending order of value.
    pub scores: Vec<(f64, f64)>,
}

/// Picks the grid value with the best mean validation score over
/// `folds` contiguous folds of every task's training rows.
///
/// `eval(value, held_out)` trains without and scores on `held_out`, which
/// lists for every task the positions (into that task's training rows) of
/// the fold. Ties go to the smaller value.
pub fn crossval_lambda1<F>(grid: &[f64], folds: usize, rows_per_task: &[usize], goal: Goal, mut eval: F) -> Result<CvOutcome>
where
    F: FnMut(f64, &[Vec<usize>]) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(Error::invalid("empty hyperparameter grid"));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("grid values must be finite and >= 0"));
    }
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    let min_rows = rows_per_task.iter().copied().min().unwrap_or(0);
    if folds > min_rows {
        return Err(Error::invalid(format!(
            "{folds} folds but the smallest task has {min_rows} training rows"
        )));
    }
    let mut values = grid.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let per_task: Vec<Vec<Range<usize>>> = rows_per_task.iter().map(|&n| contiguous_folds(n, folds)).collect();
    let held_out: Vec<Vec<Vec<usize>>> = (0..folds)
        .map(|k| per_task.iter().map(|f| f[k].clone().collect()).collect())
        .collect();

    let mut scores = Vec::with_capacity(values.len());
    for &v in &values {
        let mut total = 0.0;
        for fold in &held_out {
            total += eval(v, fold)?;
        }
        scores.push((v, total / folds as f64));
    }
    let mut best = scores[0];
    for &s in &scores[1..] {
        let better = match goal {
            Goal::Minimize => s.1 < best.1,
            Goal::Maximize => s.1 > best.1,
        };
        if better {
            best = s;
        }
    }
    Ok(CvOutcome { best: best.0, scores })
}
