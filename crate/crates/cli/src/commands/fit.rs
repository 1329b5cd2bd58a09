//! `fit`: one model on feature and label files.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::Args;
use egmtl::design::{read_feature_csv, read_label_csv, Labels, Levels, Reliability, StackedDesign, TaskDataset, TaskGraph};
use egmtl::solvers::{fit as fit_model, write_weights_csv, FitReport, ModelKind, ModelSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::config::{self, require};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

/// Largest time difference at which a dynamic label matches a feature row.
const TIME_MATCH: f64 = 1e-6;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Feature-CSV `clip_id,time_s,f1..fD`; each clip is one task.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Label-CSV: dynamic `clip_id,time_s,label` ratings in [-1, 1], or
    /// static `clip_id,label` classes.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Feature-CSV of the expert-rated rows
    #[arg(long)]
    expert_features: Option<PathBuf>,
    /// Label-CSV of the expert ratings, same layout as `--labels`
    #[arg(long)]
    expert_labels: Option<PathBuf>,
    /// Model to fit
    #[arg(long)]
    model: Option<ModelKind>,
    /// Task graph JSON `{"edges": [{"i": 1, "j": 2, "gamma": 1.0}]}`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Relate every pair of tasks with this edge weight instead of `--graph`.
    #[arg(long)]
    complete_graph: Option<f64>,
    /// Rating levels dynamic labels are discretized into.
    #[arg(long)]
    levels: Option<usize>,
    /// Class count of static labels (default: largest label).
    #[arg(long)]
    classes: Option<usize>,
    /// l1 weight (st_lasso, mt_lasso), l2,1 weight (l21_mtl) or graph weight (sr_mtl)
    #[arg(long)]
    alpha: Option<f64>,
    /// Ridge weight (st_lasso, mt_lasso, l21_mtl) or l1 weight (sr_mtl)
    #[arg(long)]
    beta: Option<f64>,
    /// Ridge weight of sr_mtl
    #[arg(long)]
    gamma: Option<f64>,
    /// Weight of the shared part (dirty_mtl, robust_mtl)
    #[arg(long)]
    rho1: Option<f64>,
    /// Weight of the task-specific part (dirty_mtl, robust_mtl)
    #[arg(long)]
    rho2: Option<f64>,
    /// Expert-loss weight of eg_mtl
    #[arg(long)]
    lambda1: Option<f64>,
    /// Graph weight of eg_mtl
    #[arg(long)]
    lambda2: Option<f64>,
    /// l1 weight of eg_mtl
    #[arg(long)]
    lambda3: Option<f64>,
    /// Solver iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative objective change below which the solver stops.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed of the solver's random initial point, if one is used.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub expert_features: Option<PathBuf>,
    pub expert_labels: Option<PathBuf>,
    pub model: Option<ModelSpec>,
    pub graph: Option<PathBuf>,
    pub complete_graph: Option<f64>,
    pub levels: usize,
    pub classes: Option<usize>,
    pub reliability: Reliability,
    pub solver: SolverConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            features: None,
            labels: None,
            expert_features: None,
            expert_labels: None,
            model: None,
            graph: None,
            complete_graph: None,
            levels: 5,
            classes: None,
            reliability: Reliability::Identity,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Serialize)]
struct FitOutput<'a> {
    tasks: &'a [String],
    #[serde(flatten)]
    report: FitReport,
}

/// Applies hyperparameter flags to the model named by `--model` (or the
/// config's model). Parameters not given keep the config value, or 1.
fn resolve_model(base: Option<ModelSpec>, args: &FitArgs) -> CliResult<ModelSpec> {
    let kind = match (args.model, base) {
        (Some(k), _) => k,
        (None, Some(spec)) => spec.kind(),
        (None, None) => return Err(CliError::usage("--model is required (flag or config file)")),
    };
    let spec = base.filter(|s| s.kind() == kind).unwrap_or_else(|| kind.uniform(1.0));
    let mut value = serde_json::to_value(spec).map_err(egmtl::Error::from)?;
    let fields = value.as_object_mut().expect("model specs serialize as objects");
    let flags = [
        ("alpha", args.alpha),
        ("beta", args.beta),
        ("gamma", args.gamma),
        ("rho1", args.rho1),
        ("rho2", args.rho2),
        ("lambda1", args.lambda1),
        ("lambda2", args.lambda2),
        ("lambda3", args.lambda3),
    ];
    for (name, v) in flags {
        let Some(v) = v else { continue };
        if !fields.contains_key(name) {
            return Err(CliError::usage(format!("--{name} does not apply to {kind}")));
        }
        fields.insert(name.to_string(), v.into());
    }
    let spec: ModelSpec = serde_json::from_value(value).map_err(egmtl::Error::from)?;
    spec.validate()?;
    Ok(spec)
}

/// Reads one feature/label file pair into per-clip tasks with class labels
/// in `1..=classes`. Returns the tasks and the class count.
fn read_tasks(features: &Path, labels: &Path, levels: usize, classes: Option<usize>) -> CliResult<(Vec<TaskDataset>, usize)> {
    let blocks = read_feature_csv(features)?;
    let rows = read_label_csv(labels)?;
    let dynamic = rows.first().is_some_and(|r| r.time_s.is_some());
    let mut by_clip: HashMap<&str, Vec<(Option<f64>, f64)>> = HashMap::new();
    for r in &rows {
        by_clip.entry(r.clip_id.as_str()).or_default().push((r.time_s, r.label));
    }
    let missing = |clip: &str| CliError::Core(egmtl::Error::InvalidInput(format!("{}: no labels for clip {clip}", labels.display())));

    if dynamic {
        let levels = Levels::new(levels)?;
        let tasks = blocks
            .into_iter()
            .map(|b| {
                let labelled = by_clip.get(b.clip_id.as_str()).ok_or_else(|| missing(&b.clip_id))?;
                let values = b
                    .times
                    .iter()
                    .map(|&t| {
                        labelled
                            .iter()
                            .find(|(lt, _)| lt.is_some_and(|lt| (lt - t).abs() <= TIME_MATCH))
                            .map(|&(_, v)| v)
                            .ok_or_else(|| {
                                CliError::Core(egmtl::Error::InvalidInput(format!(
                                    "{}: no label for clip {} at time {t}",
                                    labels.display(),
                                    b.clip_id
                                )))
                            })
                    })
                    .collect::<CliResult<Vec<f64>>>()?;
                let task = TaskDataset::new(b.clip_id, b.features, Labels::Continuous(values))?;
                Ok(task.discretized(levels)?)
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok((tasks, levels.count));
    }

    let mut tasks = Vec::with_capacity(blocks.len());
    let mut largest = 0;
    for b in blocks {
        let labelled = by_clip.get(b.clip_id.as_str()).ok_or_else(|| missing(&b.clip_id))?;
        let label = labelled[0].1;
        if labelled.len() > 1 || label.fract() != 0.0 || label < 1.0 {
            return Err(CliError::Core(egmtl::Error::InvalidInput(format!(
                "clip {}: static labels must be one positive integer class per clip",
                b.clip_id
            ))));
        }
        let class = label as usize;
        largest = largest.max(class);
        let n = b.times.len();
        tasks.push(TaskDataset::new(b.clip_id, b.features, Labels::Classes(vec![class; n]))?);
    }
    let c = classes.unwrap_or(largest);
    if largest > c {
        return Err(CliError::Core(egmtl::Error::InvalidInput(format!("class {largest} exceeds --classes {c}"))));
    }
    Ok((tasks, c))
}

pub fn run(args: FitArgs) -> CliResult<()> {
    let mut cfg: FitConfig = config::load(args.config.as_deref())?;
    cfg.model = Some(resolve_model(cfg.model, &args)?);
    config::set(&mut cfg.features, args.features.clone().map(Some));
    config::set(&mut cfg.labels, args.labels.clone().map(Some));
    config::set(&mut cfg.expert_features, args.expert_features.clone().map(Some));
    config::set(&mut cfg.expert_labels, args.expert_labels.clone().map(Some));
    config::set(&mut cfg.graph, args.graph.clone().map(Some));
    config::set(&mut cfg.complete_graph, args.complete_graph.map(Some));
    config::set(&mut cfg.levels, args.levels);
    config::set(&mut cfg.classes, args.classes.map(Some));
    config::set(&mut cfg.solver.max_iter, args.max_iter);
    config::set(&mut cfg.solver.rel_tol, args.tol);
    config::set(&mut cfg.solver.seed, args.seed);
    cfg.solver.validate()?;
    let model = cfg.model.expect("resolved above");
    let kind = model.kind();

    if kind.needs_expert() {
        let absent: Vec<&str> = [
            ("--expert-features", cfg.expert_features.is_none()),
            ("--expert-labels", cfg.expert_labels.is_none()),
        ]
        .into_iter()
        .filter_map(|(name, gone)| gone.then_some(name))
        .collect();
        if !absent.is_empty() {
            return Err(CliError::usage(format!("{kind} needs expert inputs; missing {}", absent.join(" and "))));
        }
    }
    if cfg.graph.is_some() && cfg.complete_graph.is_some() {
        return Err(CliError::usage("give either --graph or --complete-graph, not both"));
    }
    if kind.needs_graph() && cfg.graph.is_none() && cfg.complete_graph.is_none() {
        return Err(CliError::usage(format!("{kind} needs --graph or --complete-graph")));
    }

    let (crowd, c) = read_tasks(&require(&cfg.features, "--features")?, &require(&cfg.labels, "--labels")?, cfg.levels, cfg.classes)?;
    let expert = match (&cfg.expert_features, &cfg.expert_labels) {
        (Some(f), Some(l)) if kind.needs_expert() => {
            let (tasks, ce) = read_tasks(f, l, cfg.levels, Some(c))?;
            if ce != c {
                return Err(CliError::Core(egmtl::Error::InvalidInput(format!("expert labels have {ce} classes, crowd labels {c}"))));
            }
            Some(tasks)
        }
        (Some(_), Some(_)) => {
            log::warn!("{kind} ignores the expert inputs");
            None
        }
        _ => None,
    };
    let graph = match (&cfg.graph, cfg.complete_graph) {
        (Some(path), _) => Some(TaskGraph::from_json_file(path)?),
        (None, Some(gamma)) => Some(TaskGraph::complete(crowd.len(), gamma)),
        (None, None) => None,
    };
    let design = StackedDesign::assemble(&crowd, expert.as_deref(), c, graph.as_ref(), &cfg.reliability)?;
    let result = fit_model(&model, &design, &cfg.solver)?;
    if !result.converged {
        log::warn!("solver stopped after {} iterations without converging", result.iterations);
    }

    let tasks: Vec<String> = crowd.iter().map(|t| t.task_id.clone()).collect();
    let mut out = OutputDir::create(&args.out)?;
    out.write_json(
        "fit.json",
        &FitOutput {
            tasks: &tasks,
            report: FitReport::from(&result),
        },
    )?;
    let mut weights = |name: &str, w: &ndarray::Array2<f64>| -> CliResult<()> {
        let mut buf = Vec::new();
        write_weights_csv(&mut buf, w)?;
        out.write(name, &buf)
    };
    weights("weights.csv", &result.w)?;
    if let (Some(shared), Some(sparse)) = (&result.shared_part, &result.sparse_part) {
        weights("weights_shared.csv", shared)?;
        weights("weights_sparse.csv", sparse)?;
    }
    let seed = cfg.solver.seed;
    out.finish("fit", &cfg, seed)?;
    Ok(())
}
