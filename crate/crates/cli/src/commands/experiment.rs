//! `p1` and `p2`: the two evaluation protocols over file-backed data.

use std::path::{Path, PathBuf};

use clap::Args;
use egmtl::annotations::Attribute;
use egmtl::experiments::{
    load_classification, load_regression, run_p1, run_p2, ClassificationFiles, Half, P1Config, P2Config, RegressionFiles, ResultTable, Tuning,
};
use egmtl::par::Jobs;
use egmtl::solvers::ModelKind;
use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

/// Flags shared by both protocols.
#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Master seed of every random choice.
    #[arg(long)]
    seed: Option<u64>,
    /// Models to run, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    models: Vec<ModelKind>,
    /// Cross-validation grid of each model's first hyperparameter.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Vec<f64>,
    /// Cross-validation folds per task
    #[arg(long)]
    folds: Option<usize>,
    /// Expert count of the reduced-expert EG-MTL run; 0 skips it.
    #[arg(long)]
    expert_subset: Option<usize>,
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
}

impl ProtocolArgs {
    fn apply(&self, seed: &mut u64, models: &mut Vec<ModelKind>, tuning: &mut Tuning) {
        config::set(seed, self.seed);
        config::set_list(models, self.models.clone());
        config::set_list(&mut tuning.lambda_grid, self.lambda_grid.clone());
        config::set(&mut tuning.folds, self.folds);
        config::set(&mut tuning.expert_subset, self.expert_subset.map(|k| (k > 0).then_some(k)));
    }
}

fn write_table(mut out: OutputDir, table: &ResultTable) -> CliResult<OutputDir> {
    out.write("results.csv", table.to_csv_string()?.as_bytes())?;
    out.write("results.txt", table.to_text().as_bytes())?;
    let failed = table.failed().count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", table.cells.len());
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct P1Args {
    /// Feature-CSV of a single dataset (replaces the config's datasets).
    #[arg(long, requires_all = ["traces", "attribute"])]
    features: Option<PathBuf>,
    /// Trace-CSV `clip_id,rater_id,rater_kind,attribute,time_s,value`
    #[arg(long, requires = "features")]
    traces: Option<PathBuf>,
    /// Dynamic label-CSV with the noise-free signal, for synthetic data.
    #[arg(long, requires = "features")]
    truth: Option<PathBuf>,
    /// Rated attribute: arousal or valence
    #[arg(long, requires = "features")]
    attribute: Option<Attribute>,
    /// Test-snippet lengths in seconds, comma separated.
    #[arg(long, value_delimiter = ',')]
    snippet: Vec<f64>,
    /// Halves the snippets come from: front, back.
    #[arg(long, value_delimiter = ',')]
    half: Vec<Half>,
    /// Snippet draws per cell
    #[arg(long)]
    runs: Option<usize>,
    #[command(flatten)]
    common: ProtocolArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct P1RunConfig {
    pub datasets: Vec<RegressionFiles>,
    pub snippets: Vec<f64>,
    pub halves: Vec<Half>,
    pub runs: usize,
    pub levels: usize,
    pub models: Vec<ModelKind>,
    pub seed: u64,
    pub tuning: Tuning,
}

impl Default for P1RunConfig {
    fn default() -> Self {
        let base = P1Config::default();
        P1RunConfig {
            datasets: Vec::new(),
            snippets: vec![base.snippet_s],
            halves: vec![base.half],
            runs: base.runs,
            levels: base.levels,
            models: ModelKind::ALL.to_vec(),
            seed: 0,
            tuning: base.tuning,
        }
    }
}

impl P1RunConfig {
    fn protocol_configs(&self) -> Vec<P1Config> {
        let mut out = Vec::new();
        for &snippet_s in &self.snippets {
            for &half in &self.halves {
                out.push(P1Config {
                    snippet_s,
                    half,
                    runs: self.runs,
                    levels: self.levels,
                    tuning: self.tuning.clone(),
                });
            }
        }
        out
    }
}

pub fn p1(args: P1Args, jobs: Jobs) -> CliResult<()> {
    let mut cfg: P1RunConfig = config::load(args.common.config.as_deref())?;
    let common = &args.common;
    common.apply(&mut cfg.seed, &mut cfg.models, &mut cfg.tuning);
    if let (Some(features), Some(traces), Some(attribute)) = (&args.features, &args.traces, args.attribute) {
        cfg.datasets = vec![RegressionFiles {
            features: features.clone(),
            traces: traces.clone(),
            attribute,
            feature_set: None,
            truth: args.truth.clone(),
        }];
    }
    config::set_list(&mut cfg.snippets, args.snippet);
    config::set_list(&mut cfg.halves, args.half);
    config::set(&mut cfg.runs, args.runs);
    if cfg.datasets.is_empty() {
        return Err(CliError::usage("no dataset: give --features/--traces/--attribute or a config with datasets"));
    }

    let data = cfg.datasets.iter().map(load_regression).collect::<egmtl::Result<Vec<_>>>()?;
    let table = run_p1(&data, &cfg.protocol_configs(), &cfg.models, cfg.seed, jobs)?;
    let out = write_table(OutputDir::create(&common.out)?, &table)?;
    out.finish("p1", &cfg, cfg.seed)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct P2Args {
    /// Trace-CSV of the labelled training clips (crowd and expert).
    #[arg(long, requires_all = ["val_labels", "attribute"])]
    val_traces: Option<PathBuf>,
    /// Label-CSV `clip_id,label` with the class (1 low, 2 high) of each training clip
    #[arg(long, requires = "val_traces")]
    val_labels: Option<PathBuf>,
    /// Trace-CSV of the evaluation clips (crowd).
    #[arg(long, requires_all = ["eval_labels", "attribute"])]
    eval_traces: Option<PathBuf>,
    /// Label-CSV `clip_id,label` with the class of each evaluation clip
    #[arg(long, requires = "eval_traces")]
    eval_labels: Option<PathBuf>,
    /// Rated attribute: arousal or valence
    #[arg(long)]
    attribute: Option<Attribute>,
    /// Seconds kept from the end of each trace.
    #[arg(long)]
    window: Option<f64>,
    #[command(flatten)]
    common: ProtocolArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct P2RunConfig {
    /// Training sets; `eval[i]` is evaluated with the models of `val[i]`.
    pub val: Vec<ClassificationFiles>,
    pub eval: Vec<ClassificationFiles>,
    pub models: Vec<ModelKind>,
    pub seed: u64,
    pub tuning: Tuning,
}

impl Default for P2RunConfig {
    fn default() -> Self {
        P2RunConfig {
            val: Vec::new(),
            eval: Vec::new(),
            models: ModelKind::ALL.to_vec(),
            seed: 0,
            tuning: P2Config::default().tuning,
        }
    }
}

fn class_files(traces: &Path, labels: &Option<PathBuf>, attribute: Option<Attribute>, window: Option<f64>) -> ClassificationFiles {
    let mut files = ClassificationFiles {
        traces: traces.to_path_buf(),
        labels: labels.clone().expect("clap enforces the pair"),
        attribute: attribute.expect("clap enforces the attribute"),
        window_s: 50.0,
        rate_hz: 1.0,
    };
    config::set(&mut files.window_s, window);
    files
}

pub fn p2(args: P2Args, jobs: Jobs) -> CliResult<()> {
    let mut cfg: P2RunConfig = config::load(args.common.config.as_deref())?;
    let common = &args.common;
    common.apply(&mut cfg.seed, &mut cfg.models, &mut cfg.tuning);
    if let Some(t) = &args.val_traces {
        cfg.val = vec![class_files(t, &args.val_labels, args.attribute, args.window)];
    }
    if let Some(t) = &args.eval_traces {
        cfg.eval = vec![class_files(t, &args.eval_labels, args.attribute, args.window)];
    }
    if cfg.eval.is_empty() {
        return Err(egmtl::Error::MissingInput("Eval source required".into()).into());
    }
    if cfg.val.is_empty() {
        return Err(egmtl::Error::MissingInput("Val source required".into()).into());
    }

    let val = cfg.val.iter().map(load_classification).collect::<egmtl::Result<Vec<_>>>()?;
    let eval = cfg.eval.iter().map(load_classification).collect::<egmtl::Result<Vec<_>>>()?;
    let protocol = P2Config { tuning: cfg.tuning.clone() };
    let table = run_p2(&val, &eval, &protocol, &cfg.models, cfg.seed, jobs)?;
    let out = write_table(OutputDir::create(&common.out)?, &table)?;
    out.finish("p2", &cfg, cfg.seed)?;
    Ok(())
}
