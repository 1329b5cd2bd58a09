//! Static-class transfer protocol: per-rater rating vectors of labelled
//! clips train the models; clips of a second set, unseen as tasks, are
//! classified from their crowd vectors by per-clip majority vote.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::crossval::{crossval_lambda1, Goal};
use super::data::{select_expert_subset, ClassificationData, RaterSeries};
use super::method::{Method, Tuning};
use super::metrics::accuracy;
use super::table::{Cell, CellKey, CellValue, Metric, ResultTable};
use crate::design::{Labels, Reliability, Standardizer, StackedDesign, TaskDataset, TaskGraph};
use crate::par::{self, Jobs};
use crate::solvers::{decode_class, pooled_scores, FitResult, ModelKind, ModelSpec};
use crate::{Error, Result};

/// Number of static classes (low / high).
pub const CLASSES: usize = 2;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct P2Config {
    #[serde(flatten)]
    pub tuning: Tuning,
}

/// Majority class over the rows' arg-max votes. Ties go to the class with
/// the larger summed score, then to the lower index. 1-based.
pub fn majority_vote(scores: ArrayView2<f64>) -> usize {
    let c = scores.ncols();
    let mut votes = vec![0usize; c];
    for row in scores.rows() {
        votes[decode_class(row) - 1] += 1;
    }
    let sums = scores.sum_axis(Axis(0));
    let mut best = 0;
    for k in 1..c {
        if votes[k] > votes[best] || (votes[k] == votes[best] && sums[k] > sums[best]) {
            best = k;
        }
    }
    best + 1
}

fn vectors(raters: &[RaterSeries], rows: &[usize], width: usize) -> Array2<f64> {
    let mut x = Array2::zeros((rows.len(), width));
    for (i, &r) in rows.iter().enumerate() {
        x.row_mut(i).assign(&ndarray::ArrayView1::from(&raters[r].values[..]));
    }
    x
}

struct Trained {
    std: Standardizer,
    result: FitResult,
}

/// Fits on the crowd rows `crowd_rows[t]` of every labelled clip, plus all
/// (selected) expert rows when the model uses them.
fn train(val: &ClassificationData, width: usize, spec: &ModelSpec, tuning: &Tuning, crowd_rows: &[Vec<usize>], experts: Option<&BTreeSet<String>>) -> Result<Trained> {
    let kind = spec.kind();
    let raw: Vec<Array2<f64>> = val
        .clips
        .iter()
        .zip(crowd_rows)
        .map(|(c, rows)| vectors(&c.crowd, rows, width))
        .collect();
    let views: Vec<_> = raw.iter().map(|a| a.view()).collect();
    let all = ndarray::concatenate(Axis(0), &views).map_err(|e| Error::dim(e.to_string()))?;
    let std = Standardizer::fit(all.view(), true);
    let crowd = val
        .clips
        .iter()
        .zip(&raw)
        .map(|(c, x)| TaskDataset::new(c.clip_id.clone(), std.apply(x.view()), Labels::Classes(vec![c.class; x.nrows()])))
        .collect::<Result<Vec<_>>>()?;
    let expert = if kind.needs_expert() {
        let tasks = val
            .clips
            .iter()
            .map(|c| {
                let rows: Vec<usize> = (0..c.expert.len())
                    .filter(|&r| experts.is_none_or(|k| k.contains(&c.expert[r].rater_id)))
                    .collect();
                let x = vectors(&c.expert, &rows, width);
                TaskDataset::new(c.clip_id.clone(), std.apply(x.view()), Labels::Classes(vec![c.class; rows.len()]))
            })
            .collect::<Result<Vec<_>>>()?;
        Some(tasks)
    } else {
        None
    };
    let graph = kind.needs_graph().then(|| TaskGraph::complete(val.clips.len(), tuning.graph_gamma));
    let design = StackedDesign::assemble(&crowd, expert.as_deref(), CLASSES, graph.as_ref(), &Reliability::Identity)?;
    Ok(Trained {
        result: crate::solvers::fit(spec, &design, &tuning.solver)?,
        std,
    })
}

/// Per-clip majority decisions over the given crowd rows, scored with the
/// task-pooled weights.
fn classify(model: &Trained, data: &ClassificationData, width: usize, rows: &[Vec<usize>]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut predicted = Vec::new();
    let mut truth = Vec::new();
    for (clip, rows) in data.clips.iter().zip(rows) {
        if rows.is_empty() {
            continue;
        }
        let x = model.std.apply(vectors(&clip.crowd, rows, width).view());
        let scores = pooled_scores(x.view(), &model.result.w, CLASSES)?;
        predicted.push(majority_vote(scores.view()));
        truth.push(clip.class);
    }
    Ok((predicted, truth))
}

fn check_pair(val: &ClassificationData, eval: &ClassificationData) -> Result<usize> {
    if val.attribute != eval.attribute {
        return Err(Error::invalid(format!(
            "training set rates {} but evaluation set rates {}",
            val.attribute, eval.attribute
        )));
    }
    let width = val.window_len()?;
    let eval_width = eval.window_len()?;
    if width != eval_width {
        return Err(Error::dim(format!(
            "window length mismatch: training vectors have {width} samples, evaluation vectors {eval_width}"
        )));
    }
    for clip in val.clips.iter().chain(&eval.clips) {
        if !(1..=CLASSES).contains(&clip.class) {
            return Err(Error::invalid(format!("clip {} has class {} outside 1..={CLASSES}", clip.clip_id, clip.class)));
        }
        if clip.crowd.is_empty() {
            return Err(Error::MissingInput(format!("clip {} has no crowd vectors", clip.clip_id)));
        }
    }
    Ok(width)
}

fn run_method(val: &ClassificationData, eval: &ClassificationData, width: usize, tuning: &Tuning, method: Method, seed: u64) -> Result<(f64, f64)> {
    let kind: ModelKind = method.kind();
    let experts = match method {
        Method::ExpertSubset(k) => Some(select_expert_subset(
            val.clips.iter().flat_map(|c| c.expert.iter().map(|r| r.rater_id.as_str())),
            k,
            seed,
        )),
        Method::Model(_) => None,
    };
    let base = kind.uniform(tuning.fixed);
    let all_rows: Vec<Vec<usize>> = val.clips.iter().map(|c| (0..c.crowd.len()).collect()).collect();
    let tuned = if tuning.lambda_grid.len() == 1 {
        tuning.lambda_grid[0]
    } else {
        let sizes: Vec<usize> = all_rows.iter().map(Vec::len).collect();
        crossval_lambda1(&tuning.lambda_grid, tuning.folds, &sizes, Goal::Maximize, |v, held| {
            let keep: Vec<Vec<usize>> = all_rows
                .iter()
                .zip(held)
                .map(|(rows, out)| rows.iter().copied().filter(|r| !out.contains(r)).collect())
                .collect();
            let model = train(val, width, &base.with_tuned(v), tuning, &keep, experts.as_ref())?;
            let (p, t) = classify(&model, val, width, held)?;
            accuracy(&p, &t)
        })?
        .best
    };
    log::debug!("{method}: selected {} = {tuned}", base.tuned_name());
    let model = train(val, width, &base.with_tuned(tuned), tuning, &all_rows, experts.as_ref())?;
    let eval_rows: Vec<Vec<usize>> = eval.clips.iter().map(|c| (0..c.crowd.len()).collect()).collect();
    let (p, t) = classify(&model, eval, width, &eval_rows)?;
    Ok((accuracy(&p, &t)?, model.result.sparsity))
}

/// Runs the transfer protocol on each (training, evaluation) pair of sets.
/// `eval` pairs up with `val` by position.
pub fn run_p2(val: &[ClassificationData], eval: &[ClassificationData], config: &P2Config, models: &[ModelKind], seed: u64, jobs: Jobs) -> Result<ResultTable> {
    config.tuning.validate()?;
    if eval.is_empty() {
        return Err(Error::MissingInput("Eval source required".into()));
    }
    if val.len() != eval.len() {
        return Err(Error::invalid(format!("{} training sets but {} evaluation sets", val.len(), eval.len())));
    }
    if models.is_empty() {
        return Err(Error::invalid("no models requested"));
    }
    let widths = val.iter().zip(eval).map(|(v, e)| check_pair(v, e)).collect::<Result<Vec<_>>>()?;
    if models.iter().any(|m| m.needs_expert()) {
        for set in val {
            if let Some(c) = set.clips.iter().find(|c| c.expert.is_empty()) {
                return Err(Error::MissingInput(format!("eg_mtl needs expert vectors; clip {} has none", c.clip_id)));
            }
        }
    }
    let methods = Method::expand(models, config.tuning.expert_subset);
    let work: Vec<(usize, Method)> = (0..val.len()).flat_map(|p| methods.iter().map(move |&m| (p, m))).collect();
    let outcomes = par::map(jobs, &work, |&(p, method)| run_method(&val[p], &eval[p], widths[p], &config.tuning, method, seed));
    let mut table = ResultTable::new(Metric::Accuracy);
    for (&(p, method), outcome) in work.iter().zip(outcomes) {
        let value = match outcome {
            Ok((acc, sparsity)) => CellValue::Ok {
                mean: acc,
                sd: None,
                sparsity,
                runs: 1,
            },
            Err(e) => {
                log::warn!("{method} on {}: {e}", val[p].attribute);
                CellValue::Failed { reason: e.to_string() }
            }
        };
        table.cells.push(Cell {
            key: CellKey {
                model: method.to_string(),
                attribute: val[p].attribute,
                feature_set: "annotations".into(),
                snippet_s: None,
                half: None,
            },
            value,
        });
    }
    Ok(table)
}
