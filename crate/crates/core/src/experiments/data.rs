use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::annotations::{median_fuse, Attribute};
use crate::rng::substream;
use crate::{Error, Result};

/// One rater's ratings, aligned with the clip's sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterSeries {
    pub rater_id: String,
    pub values: Vec<f64>,
}

/// A clip with per-time-point features and dynamic ratings (regression input).
#[derive(Debug, Clone, PartialEq)]
pub struct ClipSeries {
    pub clip_id: String,
    pub times: Vec<f64>,
    /// One row per entry of `times`.
    pub features: Array2<f64>,
    pub crowd: Vec<RaterSeries>,
    pub expert: Vec<RaterSeries>,
    /// Noise-free signal, known only for synthetic data.
    pub truth: Option<Vec<f64>>,
}

/// Regression data of one attribute and feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    pub attribute: Attribute,
    pub feature_set: String,
    pub clips: Vec<ClipSeries>,
}

/// A clip with a static class and windowed per-rater rating vectors
/// (classification input).
#[derive(Debug, Clone, PartialEq)]
pub struct RatedClip {
    pub clip_id: String,
    /// 1-based class.
    pub class: usize,
    pub crowd: Vec<RaterSeries>,
    pub expert: Vec<RaterSeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationData {
    pub attribute: Attribute,
    pub clips: Vec<RatedClip>,
}

impl ClassificationData {
    /// Common length of every rating vector.
    pub fn window_len(&self) -> Result<usize> {
        let mut lens = self
            .clips
            .iter()
            .flat_map(|c| c.crowd.iter().chain(&c.expert))
            .map(|r| r.values.len());
        let first = lens
            .next()
            .ok_or_else(|| Error::invalid("classification data holds no rating vectors"))?;
        if lens.any(|l| l != first) {
            return Err(Error::dim("rating vectors differ in length"));
        }
        Ok(first)
    }
}

impl ClipSeries {
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if self.features.nrows() != n {
            return Err(Error::dim(format!(
                "clip {}: {} feature rows for {n} time points",
                self.clip_id,
                self.features.nrows()
            )));
        }
        for r in self.crowd.iter().chain(&self.expert) {
            if r.values.len() != n {
                return Err(Error::dim(format!(
                    "clip {}: rater {} has {} values for {n} time points",
                    self.clip_id,
                    r.rater_id,
                    r.values.len()
                )));
            }
        }
        if let Some(t) = &self.truth {
            if t.len() != n {
                return Err(Error::dim(format!("clip {}: truth length mismatch", self.clip_id)));
            }
        }
        Ok(())
    }
}

/// Median of the raters' series restricted to `keep` (all raters if `None`).
pub fn fuse_raters(raters: &[RaterSeries], keep: Option<&BTreeSet<String>>) -> Result<Vec<f64>> {
    let chosen: Vec<&[f64]> = raters
        .iter()
        .filter(|r| keep.is_none_or(|k| k.contains(&r.rater_id)))
        .map(|r| r.values.as_slice())
        .collect();
    median_fuse(&chosen)
}

/// The `k` expert ids kept in a reduced-expert condition: all distinct ids
/// sorted, shuffled with the seed's `expert_subset` stream, first `k` taken.
pub fn select_expert_subset<'a>(ids: impl IntoIterator<Item = &'a str>, k: usize, seed: u64) -> BTreeSet<String> {
    let sorted: BTreeSet<&str> = ids.into_iter().collect();
    let mut order: Vec<&str> = sorted.into_iter().collect();
    order.shuffle(&mut substream(seed, "expert_subset", &[]));
    order.into_iter().take(k).map(String::from).collect()
}
