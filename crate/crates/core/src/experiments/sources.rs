use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::data::{ClassificationData, ClipSeries, RatedClip, RaterSeries, RegressionData};
use crate::annotations::{interpolate, load_traces, resample_trace, window_last, AnnotationTrace, Attribute, RaterKind};
use crate::design::{read_feature_csv, read_label_csv};
use crate::{Error, Result};

/// Files of one regression dataset.
///
/// * `features`: feature-CSV `clip_id,time_s,f1..fD`.
/// * `traces`: trace-CSV holding crowd and expert traces; each is
///   interpolated at the feature times.
/// * `truth`: optional dynamic label-CSV `clip_id,time_s,label` with the
///   noise-free signal (synthetic data); otherwise fused expert ratings, or
///   fused crowd ratings without experts, are the evaluation target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionFiles {
    pub features: PathBuf,
    pub traces: PathBuf,
    pub attribute: Attribute,
    #[serde(default)]
    pub feature_set: Option<String>,
    #[serde(default)]
    pub truth: Option<PathBuf>,
}

/// Files of one classification set.
///
/// * `traces`: trace-CSV; every trace is resampled at `rate_hz` and its last
///   `window_s` seconds form one rating vector.
/// * `labels`: static label-CSV `clip_id,label` with classes 1 (low) / 2 (high).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationFiles {
    pub traces: PathBuf,
    pub labels: PathBuf,
    pub attribute: Attribute,
    #[serde(default = "default_window")]
    pub window_s: f64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
}

fn default_window() -> f64 {
    50.0
}

fn default_rate() -> f64 {
    1.0
}

fn traces_by_clip(path: &PathBuf, attribute: Attribute) -> Result<HashMap<String, Vec<AnnotationTrace>>> {
    let mut out: HashMap<String, Vec<AnnotationTrace>> = HashMap::new();
    for t in load_traces(path)? {
        if t.attribute == attribute {
            out.entry(t.clip_id.clone()).or_default().push(t);
        }
    }
    Ok(out)
}

pub fn load_regression(files: &RegressionFiles) -> Result<RegressionData> {
    let blocks = read_feature_csv(&files.features)?;
    let mut traces = traces_by_clip(&files.traces, files.attribute)?;
    let mut truth: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
    if let Some(path) = &files.truth {
        for row in read_label_csv(path)? {
            let t = row
                .time_s
                .ok_or_else(|| Error::invalid(format!("{}: truth labels need a time_s column", path.display())))?;
            truth.entry(row.clip_id).or_default().push((t, row.label));
        }
    }
    let mut clips = Vec::with_capacity(blocks.len());
    for block in blocks {
        let clip_traces = traces.remove(&block.clip_id).unwrap_or_default();
        let (mut crowd, mut expert) = (Vec::new(), Vec::new());
        for t in &clip_traces {
            let series = RaterSeries {
                rater_id: t.rater_id.clone(),
                values: block.times.iter().map(|&s| interpolate(t, s)).collect(),
            };
            match t.rater_kind {
                RaterKind::Crowd => crowd.push(series),
                RaterKind::Expert => expert.push(series),
            }
        }
        let clip_truth = match truth.remove(&block.clip_id) {
            None if files.truth.is_some() => {
                return Err(Error::MissingInput(format!("no truth for clip {}", block.clip_id)));
            }
            None => None,
            Some(rows) => {
                let lookup: HashMap<u64, f64> = rows.iter().map(|(t, v)| (t.to_bits(), *v)).collect();
                Some(
                    block
                        .times
                        .iter()
                        .map(|t| {
                            lookup.get(&t.to_bits()).copied().ok_or_else(|| {
                                Error::MissingInput(format!("no truth for clip {} at {t} s", block.clip_id))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        let clip = ClipSeries {
            clip_id: block.clip_id,
            times: block.times,
            features: block.features,
            crowd,
            expert,
            truth: clip_truth,
        };
        clip.validate()?;
        clips.push(clip);
    }
    if let Some(extra) = traces.keys().min() {
        log::warn!("traces of clip {extra} have no feature rows and are ignored");
    }
    let feature_set = files.feature_set.clone().unwrap_or_else(|| {
        files
            .features
            .file_stem()
            .map_or_else(|| "features".into(), |s| s.to_string_lossy().into_owned())
    });
    Ok(RegressionData {
        attribute: files.attribute,
        feature_set,
        clips,
    })
}

pub fn load_classification(files: &ClassificationFiles) -> Result<ClassificationData> {
    let labels = read_label_csv(&files.labels)?;
    let mut traces = traces_by_clip(&files.traces, files.attribute)?;
    let mut clips = Vec::with_capacity(labels.len());
    for row in labels {
        if row.time_s.is_some() {
            return Err(Error::invalid(format!("{}: expected static labels 'clip_id,label'", files.labels.display())));
        }
        if row.label.fract() != 0.0 || !(1.0..=2.0).contains(&row.label) {
            return Err(Error::invalid(format!("clip {}: class must be 1 or 2, got {}", row.clip_id, row.label)));
        }
        let (mut crowd, mut expert) = (Vec::new(), Vec::new());
        for t in traces.remove(&row.clip_id).unwrap_or_default() {
            let uniform = resample_trace(&t, files.rate_hz)?;
            let series = RaterSeries {
                rater_id: t.rater_id.clone(),
                values: window_last(&uniform, files.window_s)?,
            };
            match t.rater_kind {
                RaterKind::Crowd => crowd.push(series),
                RaterKind::Expert => expert.push(series),
            }
        }
        clips.push(RatedClip {
            clip_id: row.clip_id,
            class: row.label as usize,
            crowd,
            expert,
        });
    }
    Ok(ClassificationData {
        attribute: files.attribute,
        clips,
    })
}
