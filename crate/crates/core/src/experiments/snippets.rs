use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which half of a clip test snippets are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    Front,
    Back,
}

impl Half {
    pub fn index(self) -> u64 {
        match self {
            Half::Front => 0,
            Half::Back => 1,
        }
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Half::Front => "front",
            Half::Back => "back",
        })
    }
}

impl FromStr for Half {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "front" => Ok(Half::Front),
            "back" => Ok(Half::Back),
            other => Err(Error::invalid(format!("unknown half '{other}'"))),
        }
    }
}

/// Test snippet and training remainder, as row indices per clip.
#[derive(Debug, Clone, PartialEq)]
pub struct SnippetSplit {
    /// Start of the snippet relative to the start of the chosen half.
    pub offset_s: f64,
    pub train: Vec<Vec<usize>>,
    pub test: Vec<Vec<usize>>,
}

fn median_spacing(times: &[f64]) -> f64 {
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

/// Clip duration implied by sample times: span plus one sample spacing.
fn duration(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::invalid("a clip timeline needs at least 2 samples"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("clip timeline is not strictly increasing"));
    }
    Ok(times[times.len() - 1] - times[0] + median_spacing(times))
}

/// Draws one snippet offset inside the chosen half and cuts every clip at the
/// same position relative to its half. Clips may differ in length; the
/// shortest half bounds the offset.
pub fn extract_snippets<R: Rng + ?Sized>(
    timelines: &[Vec<f64>],
    snippet_s: f64,
    half: Half,
    rng: &mut R,
) -> Result<SnippetSplit> {
    if timelines.is_empty() {
        return Err(Error::invalid("no clips to cut snippets from"));
    }
    if !(snippet_s > 0.0 && snippet_s.is_finite()) {
        return Err(Error::invalid(format!("snippet length must be positive, got {snippet_s}")));
    }
    let durations = timelines.iter().map(|t| duration(t)).collect::<Result<Vec<_>>>()?;
    let shortest_half = durations.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    if snippet_s > shortest_half + 1e-9 {
        return Err(Error::invalid(format!(
            "{snippet_s} s snippet does not fit in a {shortest_half} s half clip"
        )));
    }
    let slack = (shortest_half - snippet_s).max(0.0);
    let offset_s = if slack > 0.0 { rng.random::<f64>() * slack } else { 0.0 };
    let mut split = SnippetSplit {
        offset_s,
        train: Vec::with_capacity(timelines.len()),
        test: Vec::with_capacity(timelines.len()),
    };
    for (times, dur) in timelines.iter().zip(&durations) {
        let half_start = match half {
            Half::Front => 0.0,
            Half::Back => dur / 2.0,
        };
        let start = half_start + offset_s;
        let end = start + snippet_s;
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (i, t) in times.iter().enumerate() {
            let rel = t - times[0];
            if rel >= start - 1e-9 && rel < end - 1e-9 {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        split.train.push(train);
        split.test.push(test);
    }
    Ok(split)
}
