use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Attribute, RaterKind};
use crate::{Error, Result};

/// Portion of a windowed rating vector a statistic is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Full,
    FirstHalf,
    SecondHalf,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::Full, Segment::FirstHalf, Segment::SecondHalf];

    /// The slice of `values` this segment covers; odd lengths put the middle
    /// sample in the second half.
    pub fn slice(self, values: &[f64]) -> &[f64] {
        let mid = values.len() / 2;
        match self {
            Segment::Full => values,
            Segment::FirstHalf => &values[..mid],
            Segment::SecondHalf => &values[mid..],
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Segment::Full => "full",
            Segment::FirstHalf => "first_half",
            Segment::SecondHalf => "second_half",
        })
    }
}

impl FromStr for Segment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Segment::Full),
            "first_half" => Ok(Segment::FirstHalf),
            "second_half" => Ok(Segment::SecondHalf),
            other => Err(format!("unknown segment '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub clip_set: String,
    pub attribute: Attribute,
    pub segment: Segment,
    /// `None` when raters of both populations were pooled.
    pub rater_kind: Option<RaterKind>,
    pub n_raters: usize,
    pub n_items: usize,
    pub kendalls_w: f64,
}

/// Ranks 1..=n with tied values sharing their average rank, plus the tie
/// correction sum of (t^3 - t) over tie groups.
pub fn ranks_with_ties(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut correction = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        let t = (j - i) as f64;
        correction += t * t * t - t;
        i = j;
    }
    (ranks, correction)
}

/// Kendall's coefficient of concordance for `ratings[rater][item]`.
///
/// Uses average ranks for ties and subtracts `m * sum(T_j)` from the
/// denominator, `T_j` being rater j's tie correction.
pub fn kendalls_w<V: AsRef<[f64]>>(ratings: &[V]) -> Result<f64> {
    let m = ratings.len();
    if m < 2 {
        return Err(Error::invalid(format!("Kendall's W needs at least 2 raters, got {m}")));
    }
    let n = ratings[0].as_ref().len();
    if n < 2 {
        return Err(Error::invalid(format!("Kendall's W needs at least 2 items, got {n}")));
    }
    let mut rank_sums = vec![0.0; n];
    let mut tie_total = 0.0;
    for (i, row) in ratings.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != n {
            return Err(Error::dim(format!("rater {i} rated {} items, expected {n}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("rater {i} has non-finite ratings")));
        }
        let (ranks, ties) = ranks_with_ties(row);
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        tie_total += ties;
    }
    let (mf, nf) = (m as f64, n as f64);
    let mean = mf * (nf + 1.0) / 2.0;
    let s: f64 = rank_sums.iter().map(|r| (r - mean) * (r - mean)).sum();
    let denom = mf * mf * (nf * nf * nf - nf) - mf * tie_total;
    if denom <= 0.0 {
        return Err(Error::invalid("every rater gave all items the same rating"));
    }
    Ok((12.0 * s / denom).clamp(0.0, 1.0))
}

/// Sample Pearson correlation. Constant inputs are an error rather than 0.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dim(format!("lengths {} and {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 points"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::invalid("correlation undefined for a constant vector"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}
