use ndarray::{s, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::design::Levels;
use crate::{Error, Result};

/// How task scores turn into a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Arg-max class index.
    Class,
    /// Score-weighted average of level midpoints, a rating in [-1, 1].
    Level,
}

fn check(x: &ArrayView2<f64>, w: &Array2<f64>, c: usize) -> Result<usize> {
    if x.ncols() != w.nrows() {
        return Err(Error::dim(format!("features have {} columns, W has {} rows", x.ncols(), w.nrows())));
    }
    if c == 0 || !w.ncols().is_multiple_of(c) {
        return Err(Error::dim(format!("W has {} columns, not a multiple of {c}", w.ncols())));
    }
    Ok(w.ncols() / c)
}

/// Scores `x W_t` of task `t` (0-based), one row per sample and one column per class.
pub fn task_scores(x: ArrayView2<f64>, w: &Array2<f64>, t: usize, c: usize) -> Result<Array2<f64>> {
    let r = check(&x, w, c)?;
    if t >= r {
        return Err(Error::invalid(format!("task {} out of range 1..={r}", t + 1)));
    }
    Ok(x.dot(&w.slice(s![.., t * c..(t + 1) * c])))
}

/// Scores summed over all task blocks, for samples of unseen tasks.
pub fn pooled_scores(x: ArrayView2<f64>, w: &Array2<f64>, c: usize) -> Result<Array2<f64>> {
    let r = check(&x, w, c)?;
    let mut summed = w.slice(s![.., ..c]).to_owned();
    for t in 1..r {
        summed += &w.slice(s![.., t * c..(t + 1) * c]);
    }
    Ok(x.dot(&summed))
}

/// 1-based index of the largest score; ties go to the lowest index.
pub fn decode_class(scores: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (k, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = k;
        }
    }
    best + 1
}

/// Rating from level scores: negative scores are clipped, the rest act as
/// weights on the level midpoints. Without a positive score the arg-max
/// level's midpoint is returned.
pub fn decode_level(scores: ArrayView1<f64>, levels: Levels) -> Result<f64> {
    if scores.len() != levels.count {
        return Err(Error::dim(format!("{} scores for {} levels", scores.len(), levels.count)));
    }
    let mids = levels.midpoints();
    let total: f64 = scores.iter().map(|v| v.max(0.0)).sum();
    if total > 0.0 {
        Ok(scores.iter().zip(&mids).map(|(s, m)| s.max(0.0) * m).sum::<f64>() / total)
    } else {
        Ok(levels.midpoint(decode_class(scores)))
    }
}

pub fn decode_classes(scores: &Array2<f64>) -> Vec<usize> {
    scores.rows().into_iter().map(decode_class).collect()
}

pub fn decode_levels(scores: &Array2<f64>, levels: Levels) -> Result<Vec<f64>> {
    scores.rows().into_iter().map(|r| decode_level(r, levels)).collect()
}

/// Decoded predictions of [`predict`].
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

/// Predicts rows of `x` with the weights of task `task` (1-based). In level
/// mode the `c` classes are read as equal-width levels over [-1, 1].
pub fn predict(w: &Array2<f64>, x: ArrayView2<f64>, task: usize, c: usize, mode: DecodeMode) -> Result<Predictions> {
    if task == 0 {
        return Err(Error::invalid("task index is 1-based"));
    }
    let scores = task_scores(x, w, task - 1, c)?;
    match mode {
        DecodeMode::Class => Ok(Predictions::Classes(decode_classes(&scores))),
        DecodeMode::Level => Ok(Predictions::Values(decode_levels(&scores, Levels::new(c)?)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn argmax_ties_low() {
        assert_eq!(decode_class(array![0.1, 0.5, 0.5].view()), 2);
        assert_eq!(decode_class(array![-1.0, -1.0].view()), 1);
    }

    #[test]
    fn level_decode() {
        let lv = Levels::new(5).unwrap();
        // one-hot on level 4 returns its midpoint 0.4
        let v = decode_level(array![0.0, 0.0, 0.0, 1.0, 0.0].view(), lv).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
        // equal weight on levels 1 and 5 averages to 0
        let v = decode_level(array![1.0, -3.0, 0.0, 0.0, 1.0].view(), lv).unwrap();
        assert!(v.abs() < 1e-15);
        let v = decode_level(array![-1.0, -0.5, -2.0, -3.0, -4.0].view(), lv).unwrap();
        assert!((v - -0.4).abs() < 1e-15);
    }

    #[test]
    fn small_level_counts() {
        let v = decode_level(array![0.0, 1.0, 0.0].view(), Levels::new(3).unwrap()).unwrap();
        assert!(v.abs() < 1e-15);
        let v = decode_level(array![1.0, 1.0].view(), Levels::new(2).unwrap()).unwrap();
        assert!(v.abs() < 1e-15);
        assert_eq!(decode_class(array![0.9, 0.1].view()), 1);
    }

    #[test]
    fn predict_checks_task() {
        let w = Array2::<f64>::ones((2, 4));
        let x = array![[1.0, 0.0]];
        assert!(predict(&w, x.view(), 0, 2, DecodeMode::Class).is_err());
        assert!(predict(&w, x.view(), 3, 2, DecodeMode::Class).is_err());
        assert_eq!(
            predict(&w, x.view(), 2, 2, DecodeMode::Class).unwrap(),
            Predictions::Classes(vec![1])
        );
    }

    #[test]
    fn scores_by_block() {
        let w = array![[1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 0.0, -1.0]];
        let x = array![[1.0, 1.0]];
        assert_eq!(task_scores(x.view(), &w, 1, 2).unwrap(), array![[3.0, 3.0]]);
        assert_eq!(pooled_scores(x.view(), &w, 2).unwrap(), array![[4.0, 6.0]]);
        assert!(task_scores(x.view(), &w, 2, 2).is_err());
    }
}
