//! `filter`, `concordance` and `fuse`: trace-level commands.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use egmtl::annotations::{load_static_ratings, load_traces, partition, window_groups, write_traces, AnnotationTrace, QcPolicy, Segment};
use serde::{Deserialize, Serialize};

use crate::config::{self, require};
use crate::error::CliResult;
use crate::output::{csv_bytes, OutputDir};

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Trace-CSV to filter.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Static-rating sidecar `clip_id,rater_id,attribute,static_value`.
    #[arg(long = "static")]
    static_ratings: Option<PathBuf>,
    /// Reject traces with a larger fraction of lost samples.
    #[arg(long)]
    max_missing: Option<f64>,
    /// Reject traces whose slider moved for a smaller fraction of the clip.
    #[arg(long)]
    min_active: Option<f64>,
    /// Reject traces with a smaller standard deviation (canonical scale).
    #[arg(long)]
    min_std: Option<f64>,
    /// Whether a static rating must share the sign of the extremal value.
    #[arg(long)]
    sign_rule: Option<bool>,
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub traces: Option<PathBuf>,
    pub static_ratings: Option<PathBuf>,
    pub policy: QcPolicy,
}

#[derive(Debug, Serialize)]
struct QcReport {
    total: usize,
    accepted: usize,
    rejected: usize,
    by_reason: BTreeMap<String, usize>,
}

pub fn filter(args: FilterArgs) -> CliResult<()> {
    let mut cfg: FilterConfig = config::load(args.config.as_deref())?;
    config::set(&mut cfg.traces, args.traces.map(Some));
    config::set(&mut cfg.static_ratings, args.static_ratings.map(Some));
    config::set(&mut cfg.policy.max_missing_fraction, args.max_missing);
    config::set(&mut cfg.policy.min_active_fraction, args.min_active);
    config::set(&mut cfg.policy.min_std, args.min_std);
    config::set(&mut cfg.policy.require_sign_consistency, args.sign_rule);
    cfg.policy.validate()?;

    let mut traces = load_traces(require(&cfg.traces, "--traces")?)?;
    if let Some(path) = &cfg.static_ratings {
        let mut ratings = load_static_ratings(path)?;
        traces = traces
            .into_iter()
            .map(|t| match ratings.remove(&t.key()) {
                Some(native) => t.attach_static(native),
                None => Ok(t),
            })
            .collect::<egmtl::Result<_>>()?;
        for key in ratings.keys() {
            log::warn!("static rating for {key} has no trace");
        }
    }

    let (accepted, rejected) = partition(&traces, &cfg.policy);
    let mut out = OutputDir::create(&args.out)?;
    let kept: Vec<AnnotationTrace> = accepted.iter().map(|t| (*t).clone()).collect();
    let mut buf = Vec::new();
    write_traces(&mut buf, &kept)?;
    out.write("accepted.csv", &buf)?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["clip_id", "rater_id", "rater_kind", "attribute", "reason"])?;
    let mut by_reason = BTreeMap::new();
    for (t, reason) in &rejected {
        wtr.write_record([
            t.clip_id.as_str(),
            t.rater_id.as_str(),
            &t.rater_kind.to_string(),
            &t.attribute.to_string(),
            &reason.to_string(),
        ])?;
        *by_reason.entry(reason.to_string()).or_insert(0) += 1;
    }
    out.write("rejected.csv", &csv_bytes(wtr)?)?;
    out.write_json(
        "qc_report.json",
        &QcReport {
            total: traces.len(),
            accepted: accepted.len(),
            rejected: rejected.len(),
            by_reason,
        },
    )?;
    out.finish("filter", &cfg, 0)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    /// Pool crowd and expert raters of a clip.
    #[default]
    None,
    /// Separate reports for crowd and expert raters.
    #[value(alias = "rater_kind")]
    RaterKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegmentArg {
    Full,
    #[value(alias = "first_half")]
    FirstHalf,
    #[value(alias = "second_half")]
    SecondHalf,
    /// All three segments.
    All,
}

impl SegmentArg {
    fn segments(self) -> Vec<Segment> {
        match self {
            SegmentArg::Full => vec![Segment::Full],
            SegmentArg::FirstHalf => vec![Segment::FirstHalf],
            SegmentArg::SecondHalf => vec![Segment::SecondHalf],
            SegmentArg::All => Segment::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Length of the final window kept from each trace, in seconds.
    #[arg(long)]
    window: Option<f64>,
    /// Resampling rate in Hz.
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConcordanceArgs {
    /// Trace-CSV `clip_id,rater_id,rater_kind,attribute,time_s,value`
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Part of the window to score
    #[arg(long, value_enum)]
    segment: Option<SegmentArg>,
    /// Score crowd and expert raters separately or together
    #[arg(long, value_enum)]
    group_by: Option<GroupBy>,
    #[command(flatten)]
    window: WindowArgs,
    /// JSON config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcordanceConfig {
    pub traces: Option<PathBuf>,
    pub segments: Vec<Segment>,
    pub group_by: GroupBy,
    pub window_s: f64,
    pub rate_hz: f64,
}

impl Default for ConcordanceConfig {
    fn default() -> Self {
        ConcordanceConfig {
            traces: None,
            segments: Segment::ALL.to_vec(),
            group_by: GroupBy::None,
            window_s: 50.0,
            rate_hz: 1.0,
        }
    }
}

pub fn concordance(args: ConcordanceArgs) -> CliResult<()> {
    let mut cfg: ConcordanceConfig = config::load(args.config.as_deref())?;
    config::set(&mut cfg.traces, args.traces.map(Some));
    config::set(&mut cfg.segments, args.segment.map(SegmentArg::segments));
    config::set(&mut cfg.group_by, args.group_by);
    config::set(&mut cfg.window_s, args.window.window);
    config::set(&mut cfg.rate_hz, args.window.rate);

    let traces = load_traces(require(&cfg.traces, "--traces")?)?;
    let groups = window_groups(&traces, cfg.rate_hz, cfg.window_s, cfg.group_by == GroupBy::RaterKind)?;
    let mut reports = Vec::new();
    for g in &groups {
        if g.vectors.len() < 2 {
            log::warn!("clip {} has a single {} rater; no concordance", g.clip_id, g.attribute);
            continue;
        }
        for &seg in &cfg.segments {
            reports.push(g.concordance(seg)?);
        }
    }
    let mut out = OutputDir::create(&args.out)?;
    out.write_json("concordance.json", &reports)?;
    out.finish("concordance", &cfg, 0)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Trace-CSV `clip_id,rater_id,rater_kind,attribute,time_s,value`
    #[arg(long)]
    traces: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    /// JSON config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuseConfig {
    pub traces: Option<PathBuf>,
    pub window_s: f64,
    pub rate_hz: f64,
}

impl Default for FuseConfig {
    fn default() -> Self {
        FuseConfig {
            traces: None,
            window_s: 50.0,
            rate_hz: 1.0,
        }
    }
}

/// Writes `clip_id,attribute,rater_kind,offset_s,value` rows, `offset_s`
/// counting from the start of the window.
pub fn fuse(args: FuseArgs) -> CliResult<()> {
    let mut cfg: FuseConfig = config::load(args.config.as_deref())?;
    config::set(&mut cfg.traces, args.traces.map(Some));
    config::set(&mut cfg.window_s, args.window.window);
    config::set(&mut cfg.rate_hz, args.window.rate);

    let traces = load_traces(require(&cfg.traces, "--traces")?)?;
    let groups = window_groups(&traces, cfg.rate_hz, cfg.window_s, true)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["clip_id", "attribute", "rater_kind", "offset_s", "value"])?;
    for g in &groups {
        let kind = g.rater_kind.map(|k| k.to_string()).unwrap_or_default();
        for (k, v) in g.fused()?.iter().enumerate() {
            wtr.write_record([
                g.clip_id.as_str(),
                &g.attribute.to_string(),
                &kind,
                &(k as f64 / cfg.rate_hz).to_string(),
                &v.to_string(),
            ])?;
        }
    }
    let mut out = OutputDir::create(&args.out)?;
    out.write("fused.csv", &csv_bytes(wtr)?)?;
    out.finish("fuse", &cfg, 0)?;
    Ok(())
}
