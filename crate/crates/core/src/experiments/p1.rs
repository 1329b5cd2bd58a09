//! Snippet regression protocol: train on the remainder of every clip,
//! predict rating levels on a held-out snippet at the same position in all
//! clips.

use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::crossval::{crossval_lambda1, Goal};
use super::data::{fuse_raters, select_expert_subset, RegressionData};
use super::method::{Method, Tuning};
use super::metrics::{mean_sd, rmse};
use super::snippets::{extract_snippets, Half};
use super::table::{Cell, CellKey, CellValue, Metric, ResultTable};
use crate::design::{Labels, Levels, Reliability, Standardizer, StackedDesign, TaskDataset, TaskGraph};
use crate::par::{self, Jobs};
use crate::rng::substream;
use crate::solvers::{decode_levels, fit, task_scores, ModelKind, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct P1Config {
    pub snippet_s: f64,
    pub half: Half,
    pub runs: usize,
    pub levels: usize,
    #[serde(flatten)]
    pub tuning: Tuning,
}

impl Default for P1Config {
    fn default() -> Self {
        P1Config {
            snippet_s: 10.0,
            half: Half::Front,
            runs: 5,
            levels: 5,
            tuning: Tuning::default(),
        }
    }
}

impl P1Config {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("runs must be >= 1"));
        }
        if ![5.0, 10.0, 15.0].contains(&self.snippet_s) {
            log::warn!("snippet length {} s is outside the usual 5/10/15 s", self.snippet_s);
        }
        Levels::new(self.levels)?;
        self.tuning.validate()
    }
}

/// Fused labels and evaluation targets of one dataset under one method.
struct Prepared<'a> {
    data: &'a RegressionData,
    levels: Levels,
    crowd: Vec<Vec<usize>>,
    expert: Option<Vec<Vec<usize>>>,
    target: Vec<Vec<f64>>,
}

fn level_labels(values: &[f64], levels: Levels) -> Result<Vec<usize>> {
    values.iter().map(|&v| levels.level_of(v.clamp(-1.0, 1.0))).collect()
}

fn prepare<'a>(data: &'a RegressionData, levels: Levels, method: Method, seed: u64) -> Result<Prepared<'a>> {
    let subset: Option<BTreeSet<String>> = match method {
        Method::ExpertSubset(k) => Some(select_expert_subset(
            data.clips.iter().flat_map(|c| c.expert.iter().map(|r| r.rater_id.as_str())),
            k,
            seed,
        )),
        Method::Model(_) => None,
    };
    let mut crowd = Vec::new();
    let mut expert = Vec::new();
    let mut target = Vec::new();
    for clip in &data.clips {
        clip.validate()?;
        if clip.crowd.is_empty() {
            return Err(Error::MissingInput(format!("clip {} has no crowd ratings", clip.clip_id)));
        }
        let fused_crowd = fuse_raters(&clip.crowd, None)?;
        crowd.push(level_labels(&fused_crowd, levels)?);
        if method.kind().needs_expert() {
            let fused = fuse_raters(&clip.expert, subset.as_ref()).map_err(|_| {
                Error::MissingInput(format!("eg_mtl needs expert ratings; clip {} has none", clip.clip_id))
            })?;
            expert.push(level_labels(&fused, levels)?);
        }
        target.push(match (&clip.truth, clip.expert.is_empty()) {
            (Some(t), _) => t.clone(),
            (None, false) => fuse_raters(&clip.expert, None)?,
            (None, true) => fused_crowd,
        });
    }
    Ok(Prepared {
        data,
        levels,
        crowd,
        expert: method.kind().needs_expert().then_some(expert),
        target,
    })
}

fn rows_of(features: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    features.select(Axis(0), rows)
}

/// Fits on `fit_rows` and returns (RMSE on `eval_rows`, sparsity).
fn fit_and_score(
    prep: &Prepared,
    spec: &ModelSpec,
    tuning: &Tuning,
    fit_rows: &[Vec<usize>],
    eval_rows: &[Vec<usize>],
) -> Result<(f64, f64)> {
    let clips = &prep.data.clips;
    let stacked: Vec<Array2<f64>> = clips.iter().zip(fit_rows).map(|(c, r)| rows_of(&c.features, r)).collect();
    let views: Vec<_> = stacked.iter().map(|a| a.view()).collect();
    let all = ndarray::concatenate(Axis(0), &views).map_err(|e| Error::dim(e.to_string()))?;
    let std = Standardizer::fit(all.view(), true);
    let tasks = |labels: &[Vec<usize>]| -> Result<Vec<TaskDataset>> {
        clips
            .iter()
            .zip(&stacked)
            .zip(fit_rows.iter().zip(labels))
            .map(|((c, x), (rows, lab))| {
                TaskDataset::new(
                    c.clip_id.clone(),
                    std.apply(x.view()),
                    Labels::Classes(rows.iter().map(|&i| lab[i]).collect()),
                )
            })
            .collect()
    };
    let crowd = tasks(&prep.crowd)?;
    let expert = prep.expert.as_ref().map(|e| tasks(e)).transpose()?;
    let kind = spec.kind();
    let graph = kind.needs_graph().then(|| TaskGraph::complete(clips.len(), tuning.graph_gamma));
    let design = StackedDesign::assemble(&crowd, expert.as_deref(), prep.levels.count, graph.as_ref(), &Reliability::Identity)?;
    let result = fit(spec, &design, &tuning.solver)?;
    let mut predicted = Vec::new();
    let mut target = Vec::new();
    for (t, (clip, rows)) in clips.iter().zip(eval_rows).enumerate() {
        if rows.is_empty() {
            continue;
        }
        let x = std.apply(rows_of(&clip.features, rows).view());
        let scores = task_scores(x.view(), &result.w, t, prep.levels.count)?;
        predicted.extend(decode_levels(&scores, prep.levels)?);
        target.extend(rows.iter().map(|&i| prep.target[t][i]));
    }
    Ok((rmse(&predicted, &target)?, result.sparsity))
}

/// One run of one method: draw the snippet, cross-validate the first
/// hyperparameter on the training rows, refit and score the snippet.
fn run_once(prep: &Prepared, cfg: &P1Config, kind: ModelKind, run: usize, seed: u64) -> Result<(f64, f64)> {
    let timelines: Vec<Vec<f64>> = prep.data.clips.iter().map(|c| c.times.clone()).collect();
    let coords = [(cfg.snippet_s * 1000.0).round() as u64, cfg.half.index(), run as u64];
    let mut rng = substream(seed, "snippets", &coords);
    let split = extract_snippets(&timelines, cfg.snippet_s, cfg.half, &mut rng)?;
    let base = kind.uniform(cfg.tuning.fixed);
    let tuned = if cfg.tuning.lambda_grid.len() == 1 {
        cfg.tuning.lambda_grid[0]
    } else {
        let sizes: Vec<usize> = split.train.iter().map(Vec::len).collect();
        crossval_lambda1(&cfg.tuning.lambda_grid, cfg.tuning.folds, &sizes, Goal::Minimize, |v, held| {
            let (fit_rows, eval_rows): (Vec<Vec<usize>>, Vec<Vec<usize>>) = split
                .train
                .iter()
                .zip(held)
                .map(|(train, out)| {
                    let eval: Vec<usize> = out.iter().map(|&p| train[p]).collect();
                    let keep: Vec<usize> = train
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| !out.contains(p))
                        .map(|(_, &i)| i)
                        .collect();
                    (keep, eval)
                })
                .unzip();
            Ok(fit_and_score(prep, &base.with_tuned(v), &cfg.tuning, &fit_rows, &eval_rows)?.0)
        })?
        .best
    };
    log::debug!("{kind} run {run}: selected {} = {tuned}", base.tuned_name());
    fit_and_score(prep, &base.with_tuned(tuned), &cfg.tuning, &split.train, &split.test)
}

/// Runs the snippet protocol for every (dataset, config, method) cell.
///
/// All runs of all cells are scheduled as independent jobs on `jobs`
/// workers; every job draws its randomness from `seed` by name, so the table
/// does not depend on the worker count.
pub fn run_p1(datasets: &[RegressionData], configs: &[P1Config], models: &[ModelKind], seed: u64, jobs: Jobs) -> Result<ResultTable> {
    for cfg in configs {
        cfg.validate()?;
    }
    if models.is_empty() {
        return Err(Error::invalid("no models requested"));
    }
    let needs_expert = models.iter().any(|m| m.needs_expert());
    for data in datasets {
        if data.clips.is_empty() {
            return Err(Error::invalid(format!("dataset {} has no clips", data.feature_set)));
        }
        if needs_expert && data.clips.iter().any(|c| c.expert.is_empty()) {
            return Err(Error::MissingInput(format!(
                "eg_mtl needs expert ratings for every clip of {} / {}",
                data.attribute, data.feature_set
            )));
        }
        let timelines: Vec<Vec<f64>> = data.clips.iter().map(|c| c.times.clone()).collect();
        for cfg in configs {
            extract_snippets(&timelines, cfg.snippet_s, cfg.half, &mut substream(seed, "check", &[]))?;
        }
    }

    struct Cellspec {
        data: usize,
        config: usize,
        method: Method,
    }
    let mut cells = Vec::new();
    for (d, _) in datasets.iter().enumerate() {
        for (c, cfg) in configs.iter().enumerate() {
            for method in Method::expand(models, cfg.tuning.expert_subset) {
                cells.push(Cellspec { data: d, config: c, method });
            }
        }
    }
    let preps = cells
        .iter()
        .map(|cell| prepare(&datasets[cell.data], Levels::new(configs[cell.config].levels)?, cell.method, seed))
        .collect::<Result<Vec<_>>>()?;

    let work: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, cell)| (0..configs[cell.config].runs).map(move |r| (i, r)))
        .collect();
    let outcomes = par::map(jobs, &work, |&(i, run)| {
        let cell = &cells[i];
        run_once(&preps[i], &configs[cell.config], cell.method.kind(), run, seed)
    });

    let mut table = ResultTable::new(Metric::Rmse);
    let mut cursor = 0;
    for cell in &cells {
        let cfg = &configs[cell.config];
        let data = &datasets[cell.data];
        let runs = &outcomes[cursor..cursor + cfg.runs];
        cursor += cfg.runs;
        let value = match runs.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => {
                log::warn!("{} on {} / {}: {e}", cell.method, data.attribute, data.feature_set);
                CellValue::Failed { reason: e.to_string() }
            }
            None => {
                let scores: Vec<f64> = runs.iter().map(|r| r.as_ref().expect("checked").0).collect();
                let sparsity = runs.iter().map(|r| r.as_ref().expect("checked").1).sum::<f64>() / runs.len() as f64;
                let (mean, sd) = mean_sd(&scores);
                CellValue::Ok {
                    mean,
                    sd,
                    sparsity,
                    runs: runs.len(),
                }
            }
        };
        table.cells.push(Cell {
            key: CellKey {
                model: cell.method.to_string(),
                attribute: data.attribute,
                feature_set: data.feature_set.clone(),
                snippet_s: Some(cfg.snippet_s),
                half: Some(cfg.half),
            },
            value,
        });
    }
    Ok(table)
}
