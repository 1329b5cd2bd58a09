//! `synth`: planted regression and classification data as ordinary files.

use std::path::PathBuf;

use clap::Args;
use egmtl::annotations::{write_traces, AnnotationTrace, Attribute, RaterKind};
use egmtl::experiments::{synth_classification, synth_generate, ClassificationData, ClassificationFiles, RegressionData, RegressionFiles, SynthConfig};
use egmtl::solvers::write_weights_csv;

use super::experiment::{P1RunConfig, P2RunConfig};
use crate::config;
use crate::error::CliResult;
use crate::output::{csv_bytes, OutputDir};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Master seed of every random draw
    #[arg(long)]
    seed: Option<u64>,
    /// Zero rater noise: every rating equals the planted signal.
    #[arg(long)]
    noiseless: bool,
    /// Number of clips (tasks)
    #[arg(long)]
    tasks: Option<usize>,
    /// Feature dimension
    #[arg(long)]
    features: Option<usize>,
    /// Noise standard deviation of each crowd rater
    #[arg(long)]
    crowd_noise: Option<f64>,
    /// Noise standard deviation of each expert rater
    #[arg(long)]
    expert_noise: Option<f64>,
    /// JSON config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
}

fn regression_files(data: &RegressionData) -> CliResult<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let d = data.clips.first().map_or(0, |c| c.features.ncols());
    let mut features = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["clip_id".to_string(), "time_s".to_string()];
    header.extend((1..=d).map(|j| format!("f{j}")));
    features.write_record(&header)?;
    let mut truth = csv::Writer::from_writer(Vec::new());
    truth.write_record(["clip_id", "time_s", "label"])?;
    let mut traces = Vec::new();
    for clip in &data.clips {
        for (k, t) in clip.times.iter().enumerate() {
            let mut rec = vec![clip.clip_id.clone(), t.to_string()];
            rec.extend(clip.features.row(k).iter().map(|v| v.to_string()));
            features.write_record(&rec)?;
            if let Some(tr) = &clip.truth {
                truth.write_record([clip.clip_id.as_str(), &t.to_string(), &tr[k].to_string()])?;
            }
        }
        for (kind, raters) in [(RaterKind::Crowd, &clip.crowd), (RaterKind::Expert, &clip.expert)] {
            for r in raters {
                traces.push(AnnotationTrace::from_series(&clip.clip_id, &r.rater_id, kind, data.attribute, &clip.times, &r.values)?);
            }
        }
    }
    let mut trace_bytes = Vec::new();
    write_traces(&mut trace_bytes, &traces)?;
    Ok((csv_bytes(features)?, trace_bytes, csv_bytes(truth)?))
}

/// Rating vectors become traces sampled at 1 Hz from t = 0, so resampling at
/// 1 Hz and keeping the full window recovers them exactly.
fn classification_files(data: &ClassificationData) -> CliResult<(Vec<u8>, Vec<u8>)> {
    let mut labels = csv::Writer::from_writer(Vec::new());
    labels.write_record(["clip_id", "label"])?;
    let mut traces = Vec::new();
    for clip in &data.clips {
        labels.write_record([clip.clip_id.as_str(), &clip.class.to_string()])?;
        for (kind, raters) in [(RaterKind::Crowd, &clip.crowd), (RaterKind::Expert, &clip.expert)] {
            for r in raters {
                let times: Vec<f64> = (0..r.values.len()).map(|k| k as f64).collect();
                traces.push(AnnotationTrace::from_series(&clip.clip_id, &r.rater_id, kind, data.attribute, &times, &r.values)?);
            }
        }
    }
    let mut trace_bytes = Vec::new();
    write_traces(&mut trace_bytes, &traces)?;
    Ok((trace_bytes, csv_bytes(labels)?))
}

fn class_files(out: &OutputDir, set: &str, attribute: Attribute, window_s: f64) -> ClassificationFiles {
    ClassificationFiles {
        traces: out.path(&format!("{set}_traces.csv")),
        labels: out.path(&format!("{set}_labels.csv")),
        attribute,
        window_s,
        rate_hz: 1.0,
    }
}

pub fn run(args: SynthArgs) -> CliResult<()> {
    let mut cfg: SynthConfig = config::load(args.config.as_deref())?;
    config::set(&mut cfg.seed, args.seed);
    config::set(&mut cfg.tasks, args.tasks);
    config::set(&mut cfg.features, args.features);
    config::set(&mut cfg.crowd_noise_sd, args.crowd_noise);
    config::set(&mut cfg.expert_noise_sd, args.expert_noise);
    if args.noiseless {
        cfg = cfg.noiseless();
    }
    let synth = synth_generate(&cfg)?;
    let (val, eval) = synth_classification(&cfg)?;

    let mut out = OutputDir::create(&args.out)?;
    let (features, traces, truth) = regression_files(&synth.data)?;
    out.write("features.csv", &features)?;
    out.write("traces.csv", &traces)?;
    out.write("truth.csv", &truth)?;
    let mut w = Vec::new();
    write_weights_csv(&mut w, &synth.w_star)?;
    out.write("w_star.csv", &w)?;
    for (set, data) in [("val", &val), ("eval", &eval)] {
        let (traces, labels) = classification_files(data)?;
        out.write(&format!("{set}_traces.csv"), &traces)?;
        out.write(&format!("{set}_labels.csv"), &labels)?;
    }

    // Ready-made experiment configs pointing at the files above.
    let p1 = P1RunConfig {
        datasets: vec![RegressionFiles {
            features: out.path("features.csv"),
            traces: out.path("traces.csv"),
            attribute: synth.data.attribute,
            feature_set: Some(synth.data.feature_set.clone()),
            truth: Some(out.path("truth.csv")),
        }],
        levels: cfg.levels,
        seed: cfg.seed,
        ..P1RunConfig::default()
    };
    let window_s = val.window_len()? as f64;
    let p2 = P2RunConfig {
        val: vec![class_files(&out, "val", val.attribute, window_s)],
        eval: vec![class_files(&out, "eval", eval.attribute, window_s)],
        seed: cfg.seed,
        ..P2RunConfig::default()
    };
    out.write_json("p1_config.json", &p1)?;
    out.write_json("p2_config.json", &p2)?;
    let seed = cfg.seed;
    out.finish("synth", &cfg, seed)?;
    Ok(())
}
