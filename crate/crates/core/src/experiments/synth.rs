use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::data::{ClassificationData, ClipSeries, RatedClip, RaterSeries, RegressionData};
use crate::annotations::Attribute;
use crate::design::{Labels, Levels, TaskDataset};
use crate::rng::{substream, StreamRng};
use crate::solvers::decode_level;
use crate::{Error, Result};

/// Planted-model generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    /// Number of clips (tasks).
    pub tasks: usize,
    /// Feature dimension of the regression data.
    pub features: usize,
    /// Time points per clip at 1 Hz; also the rating-vector length of the
    /// classification data.
    pub samples_per_task: usize,
    pub n_crowd: usize,
    pub n_expert: usize,
    pub crowd_noise_sd: f64,
    pub expert_noise_sd: f64,
    /// Fraction of feature rows of the planted weights that are zero.
    pub sparsity_true: f64,
    pub levels: usize,
    /// Spread of per-clip weight directions around the shared one.
    pub task_spread: f64,
    /// AR(1) coefficient of rater noise over time.
    pub noise_autocorr: f64,
    /// Share of each rater's noise variance that is common to all raters
    /// of the same kind on a clip (and so survives median fusion).
    pub shared_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            tasks: 12,
            features: 5,
            samples_per_task: 50,
            n_crowd: 15,
            n_expert: 16,
            crowd_noise_sd: 0.5,
            expert_noise_sd: 0.1,
            sparsity_true: 0.3,
            levels: 5,
            task_spread: 0.3,
            noise_autocorr: 0.7,
            shared_noise: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn noiseless(mut self) -> Self {
        self.crowd_noise_sd = 0.0;
        self.expert_noise_sd = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("tasks", self.tasks),
            ("features", self.features),
            ("samples_per_task", self.samples_per_task),
            ("n_crowd", self.n_crowd),
            ("n_expert", self.n_expert),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be >= 1")));
            }
        }
        Levels::new(self.levels)?;
        for (name, v) in [("crowd_noise_sd", self.crowd_noise_sd), ("expert_noise_sd", self.expert_noise_sd), ("task_spread", self.task_spread)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.expert_noise_sd > self.crowd_noise_sd {
            return Err(Error::invalid(format!(
                "expert_noise_sd ({}) must not exceed crowd_noise_sd ({})",
                self.expert_noise_sd, self.crowd_noise_sd
            )));
        }
        if !(0.0..=1.0).contains(&self.sparsity_true) {
            return Err(Error::invalid(format!("sparsity_true must lie in [0, 1], got {}", self.sparsity_true)));
        }
        if !(0.0..=1.0).contains(&self.shared_noise) {
            return Err(Error::invalid(format!("shared_noise must lie in [0, 1], got {}", self.shared_noise)));
        }
        if !(0.0..1.0).contains(&self.noise_autocorr) {
            return Err(Error::invalid(format!("noise_autocorr must lie in [0, 1), got {}", self.noise_autocorr)));
        }
        Ok(())
    }
}

/// Output of [`synth_generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub config: SynthConfig,
    /// Planted weights over `[features, 1]`: `D + 1` rows (intercept last),
    /// `R * L` columns.
    pub w_star: Array2<f64>,
    pub data: RegressionData,
}

fn gaussian(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Stationary AR(1) noise with marginal standard deviation `sd`.
fn ar1(rng: &mut StreamRng, n: usize, sd: f64, phi: f64) -> Vec<f64> {
    let innovation = (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut e = gaussian(rng);
    for _ in 0..n {
        out.push(sd * e);
        e = phi * e + innovation * gaussian(rng);
    }
    out
}

/// Noise common to all raters of one kind on clip `t`, and the standard
/// deviation left for each rater's own noise.
fn split_noise(config: &SynthConfig, name: &str, t: usize, n: usize, sd: f64) -> (Vec<f64>, f64) {
    let mut rng = substream(config.seed, &format!("{name}.shared"), &[t as u64]);
    let common = ar1(&mut rng, n, sd * config.shared_noise.sqrt(), config.noise_autocorr);
    (common, sd * (1.0 - config.shared_noise).sqrt())
}

fn noisy(truth: &[f64], noise: &[f64]) -> Vec<f64> {
    truth.iter().zip(noise).map(|(t, e)| (t + e).clamp(-1.0, 1.0)).collect()
}

fn rater_ids(prefix: char, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Planted weights: each level column scores `1/L + k * m_c * (x . b_t)`,
/// with `m_c` the level midpoint and `b_t` a unit direction per clip
/// (shared direction plus a clip deviation, common zero rows). Decoding the
/// scores gives a rating that grows with `x . b_t` and saturates inside
/// [-1, 1].
fn plant_weights(cfg: &SynthConfig, levels: Levels) -> Array2<f64> {
    let mut rng = substream(cfg.seed, "synth.weights", &[]);
    let d = cfg.features;
    let l = levels.count;
    let mut rows: Vec<usize> = (0..d).collect();
    rows.shuffle(&mut rng);
    let n_zero = (cfg.sparsity_true * d as f64).round() as usize;
    let zero_rows = &rows[..n_zero];
    let base: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
    let mids = levels.midpoints();
    let gain = 1.0 / (l as f64 * mids[l - 1]);
    let mut w = Array2::zeros((d + 1, cfg.tasks * l));
    for t in 0..cfg.tasks {
        let mut dir: Vec<f64> = base.iter().map(|b| b + cfg.task_spread * gaussian(&mut rng)).collect();
        for &z in zero_rows {
            dir[z] = 0.0;
        }
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (c, m) in mids.iter().enumerate() {
            let col = t * l + c;
            w[[d, col]] = 1.0 / l as f64;
            if norm > 0.0 {
                for j in 0..d {
                    w[[j, col]] = gain * m * dir[j] / norm;
                }
            }
        }
    }
    w
}

/// Generates regression clips from a planted model: i.i.d. standard normal
/// features, a noise-free signal decoded from `[x, 1] W*`, and crowd/expert
/// ratings equal to the signal plus AR(1) Gaussian noise, clipped to [-1, 1].
/// Part of the noise (`shared_noise` of its variance) is common to all
/// raters of a kind, so fused crowd labels stay noisier than fused expert
/// labels.
pub fn synth_generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let levels = Levels::new(config.levels)?;
    let w_star = plant_weights(config, levels);
    let (d, l, n) = (config.features, levels.count, config.samples_per_task);
    let crowd_ids = rater_ids('c', config.n_crowd);
    let expert_ids = rater_ids('e', config.n_expert);
    let mut clips = Vec::with_capacity(config.tasks);
    for t in 0..config.tasks {
        let mut rng = substream(config.seed, "synth.features", &[t as u64]);
        let features = Array2::from_shape_simple_fn((n, d), || gaussian(&mut rng));
        let block = w_star.slice(ndarray::s![.., t * l..(t + 1) * l]);
        let mut truth = Vec::with_capacity(n);
        for row in features.rows() {
            let mut aug = Array1::ones(d + 1);
            aug.slice_mut(ndarray::s![..d]).assign(&row);
            truth.push(decode_level(aug.dot(&block).view(), levels)?);
        }
        let raters = |ids: &[String], name: &str, sd: f64| -> Vec<RaterSeries> {
            let (common, own) = split_noise(config, name, t, n, sd);
            ids.iter()
                .enumerate()
                .map(|(k, id)| {
                    let mut rng = substream(config.seed, name, &[t as u64, k as u64]);
                    let noise: Vec<f64> = ar1(&mut rng, n, own, config.noise_autocorr)
                        .iter()
                        .zip(&common)
                        .map(|(a, b)| a + b)
                        .collect();
                    RaterSeries {
                        rater_id: id.clone(),
                        values: noisy(&truth, &noise),
                    }
                })
                .collect()
        };
        let crowd = raters(&crowd_ids, "synth.crowd", config.crowd_noise_sd);
        let expert = raters(&expert_ids, "synth.expert", config.expert_noise_sd);
        clips.push(ClipSeries {
            clip_id: format!("clip{:02}", t + 1),
            times: (0..n).map(|k| k as f64).collect(),
            features,
            crowd,
            expert,
            truth: Some(truth),
        });
    }
    Ok(SynthData {
        config: config.clone(),
        w_star,
        data: RegressionData {
            attribute: Attribute::Arousal,
            feature_set: "synthetic".into(),
            clips,
        },
    })
}

impl SynthData {
    /// Per-clip datasets labelled with the discretized median of the crowd
    /// (`expert = false`) or expert ratings.
    pub fn tasks(&self, expert: bool) -> Result<Vec<TaskDataset>> {
        let levels = Levels::new(self.config.levels)?;
        self.data
            .clips
            .iter()
            .map(|c| {
                let fused = super::data::fuse_raters(if expert { &c.expert } else { &c.crowd }, None)?;
                let labels = fused.iter().map(|&v| levels.level_of(v)).collect::<Result<_>>()?;
                TaskDataset::new(c.clip_id.clone(), c.features.clone(), Labels::Classes(labels))
            })
            .collect()
    }
}

fn synth_rated_clips(config: &SynthConfig, set: &str, with_expert: bool) -> Vec<RatedClip> {
    let n = config.samples_per_task;
    let mut rng = substream(config.seed, "synth.classes", &[u64::from(set == "eval")]);
    let mut classes: Vec<usize> = (0..config.tasks).map(|t| if t < config.tasks.div_ceil(2) { 2 } else { 1 }).collect();
    classes.shuffle(&mut rng);
    let crowd_ids = rater_ids('c', config.n_crowd);
    let expert_ids = rater_ids('e', config.n_expert);
    classes
        .into_iter()
        .enumerate()
        .map(|(t, class)| {
            let mut rng = substream(config.seed, &format!("synth.{set}.signal"), &[t as u64]);
            let sign = if class == 2 { 1.0 } else { -1.0 };
            let level = sign * rng.random_range(0.05..0.35);
            let amp = rng.random_range(0.1..0.3);
            let period = rng.random_range(10.0..40.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            let truth: Vec<f64> = (0..n)
                .map(|k| (level + amp * (2.0 * PI * k as f64 / period + phase).sin()).clamp(-1.0, 1.0))
                .collect();
            let raters = |ids: &[String], kind: &str, sd: f64| -> Vec<RaterSeries> {
                let name = format!("synth.{set}.{kind}");
                let (common, own) = split_noise(config, &name, t, n, sd);
                ids.iter()
                    .enumerate()
                    .map(|(k, id)| {
                        let mut rng = substream(config.seed, &name, &[t as u64, k as u64]);
                        let offset = 0.5 * own * gaussian(&mut rng);
                        let noise: Vec<f64> = ar1(&mut rng, n, own, config.noise_autocorr)
                            .iter()
                            .zip(&common)
                            .map(|(e, c)| e + c + offset)
                            .collect();
                        RaterSeries {
                            rater_id: id.clone(),
                            values: noisy(&truth, &noise),
                        }
                    })
                    .collect()
            };
            RatedClip {
                clip_id: format!("{set}{:02}", t + 1),
                class,
                crowd: raters(&crowd_ids, "crowd", config.crowd_noise_sd),
                expert: if with_expert {
                    raters(&expert_ids, "expert", config.expert_noise_sd)
                } else {
                    Vec::new()
                },
            }
        })
        .collect()
}

/// Generates a labelled (crowd + expert) and an evaluation (crowd only)
/// classification set. Each clip has a static binary class (2 = high,
/// 1 = low, balanced), a rating signal around a class-signed level, and
/// rater vectors equal to the signal plus a rater offset and AR(1) noise.
/// `features` is unused: the rating vectors themselves are the features.
pub fn synth_classification(config: &SynthConfig) -> Result<(ClassificationData, ClassificationData)> {
    config.validate()?;
    Ok((
        ClassificationData {
            attribute: Attribute::Arousal,
            clips: synth_rated_clips(config, "val", true),
        },
        ClassificationData {
            attribute: Attribute::Arousal,
            clips: synth_rated_clips(config, "eval", false),
        },
    ))
}
