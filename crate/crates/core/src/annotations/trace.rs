use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Range every trace is stored in after loading.
pub const CANONICAL_RANGE: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RaterKind {
    Crowd,
    Expert,
}

impl RaterKind {
    /// Slider range the raw ratings of this population are recorded in.
    pub fn native_range(self) -> (f64, f64) {
        match self {
            RaterKind::Crowd => (-2.0, 2.0),
            RaterKind::Expert => (-1.0, 1.0),
        }
    }

    fn to_canonical(self, v: f64) -> f64 {
        let (lo, hi) = self.native_range();
        let (clo, chi) = CANONICAL_RANGE;
        clo + (v - lo) * (chi - clo) / (hi - lo)
    }

    fn to_native(self, v: f64) -> f64 {
        let (lo, hi) = self.native_range();
        let (clo, chi) = CANONICAL_RANGE;
        lo + (v - clo) * (hi - lo) / (chi - clo)
    }
}

impl fmt::Display for RaterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RaterKind::Crowd => "crowd",
            RaterKind::Expert => "expert",
        })
    }
}

impl FromStr for RaterKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "crowd" => Ok(RaterKind::Crowd),
            "expert" => Ok(RaterKind::Expert),
            other => Err(format!("unknown rater_kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Arousal,
    Valence,
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribute::Arousal => "arousal",
            Attribute::Valence => "valence",
        })
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arousal" | "a" => Ok(Attribute::Arousal),
            "valence" | "v" => Ok(Attribute::Valence),
            other => Err(format!("unknown attribute '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time_s: f64,
    pub value: f64,
}

/// Identity of a trace: one rater rating one attribute of one clip.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceKey {
    pub clip_id: String,
    pub rater_id: String,
    pub attribute: Attribute,
}

impl fmt::Display for TraceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.clip_id, self.rater_id, self.attribute)
    }
}

/// Key of the static-rating sidecar; same fields as [`TraceKey`].
pub type StaticKey = TraceKey;

/// One rater's rating signal for one clip, on the canonical [-1, 1] scale.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTrace {
    pub clip_id: String,
    pub rater_id: String,
    pub rater_kind: RaterKind,
    pub attribute: Attribute,
    pub samples: Vec<Sample>,
    pub value_range: (f64, f64),
    /// Overall self-reported rating for the clip, canonical scale.
    pub static_rating: Option<f64>,
    pub missing_fraction: f64,
}

impl AnnotationTrace {
    /// Builds a trace on the canonical scale and checks its invariants.
    pub fn new(
        clip_id: impl Into<String>,
        rater_id: impl Into<String>,
        rater_kind: RaterKind,
        attribute: Attribute,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        let trace = AnnotationTrace {
            clip_id: clip_id.into(),
            rater_id: rater_id.into(),
            rater_kind,
            attribute,
            samples,
            value_range: CANONICAL_RANGE,
            static_rating: None,
            missing_fraction: 0.0,
        };
        trace.validate()?;
        Ok(trace)
    }

    /// Convenience constructor from parallel time/value slices.
    pub fn from_series(
        clip_id: impl Into<String>,
        rater_id: impl Into<String>,
        rater_kind: RaterKind,
        attribute: Attribute,
        times: &[f64],
        values: &[f64],
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::dim(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        let samples = times
            .iter()
            .zip(values)
            .map(|(&time_s, &value)| Sample { time_s, value })
            .collect();
        Self::new(clip_id, rater_id, rater_kind, attribute, samples)
    }

    pub fn with_static(mut self, rating: Option<f64>) -> Result<Self> {
        self.static_rating = rating;
        self.validate()?;
        Ok(self)
    }

    pub fn with_missing_fraction(mut self, fraction: f64) -> Result<Self> {
        self.missing_fraction = fraction;
        self.validate()?;
        Ok(self)
    }

    pub fn key(&self) -> TraceKey {
        TraceKey {
            clip_id: self.clip_id.clone(),
            rater_id: self.rater_id.clone(),
            attribute: self.attribute,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.samples.iter().map(|s| s.value)
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.time_s - a.time_s,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.value_range;
        for pair in self.samples.windows(2) {
            if !(pair[1].time_s > pair[0].time_s) {
                return Err(Error::invalid(format!(
                    "trace {}: sample times not strictly increasing at t={}",
                    self.key(),
                    pair[1].time_s
                )));
            }
        }
        for s in &self.samples {
            if !s.time_s.is_finite() || s.time_s < 0.0 {
                return Err(Error::invalid(format!(
                    "trace {}: invalid sample time {}",
                    self.key(),
                    s.time_s
                )));
            }
            if !(s.value >= lo && s.value <= hi) {
                return Err(Error::invalid(format!(
                    "trace {}: value {} outside [{lo}, {hi}]",
                    self.key(),
                    s.value
                )));
            }
        }
        if let Some(r) = self.static_rating {
            if !(r >= lo && r <= hi) {
                return Err(Error::invalid(format!(
                    "trace {}: static rating {r} outside [{lo}, {hi}]",
                    self.key()
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.missing_fraction) {
            return Err(Error::invalid(format!(
                "trace {}: missing fraction {} outside [0, 1]",
                self.key(),
                self.missing_fraction
            )));
        }
        Ok(())
    }
}

const TRACE_HEADER: [&str; 6] = ["clip_id", "rater_id", "rater_kind", "attribute", "time_s", "value"];

struct Pending {
    kind: RaterKind,
    /// Every row's time, including rows whose value was lost.
    times: Vec<f64>,
    samples: Vec<Sample>,
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan")
}

fn check_header(path: &Path, headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!("expected header '{}', found '{}'", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

/// Missing fraction of a trace from its row times: the nominal sampling
/// interval is the median row spacing, and any shortfall of present
/// samples against the count that spacing implies counts as lost.
fn missing_fraction(times: &[f64], present: usize) -> f64 {
    if times.len() < 2 {
        return if present == times.len() { 0.0 } else { 1.0 };
    }
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let interval = gaps[gaps.len() / 2];
    let span = times[times.len() - 1] - times[0];
    let expected = ((span / interval).round() as usize + 1).max(present);
    (1.0 - present as f64 / expected as f64).clamp(0.0, 1.0)
}

/// Parses trace-CSV from any reader; `path` is only used in messages.
pub fn read_traces<R: Read>(reader: R, path: &Path) -> Result<Vec<AnnotationTrace>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    check_header(path, &headers, &TRACE_HEADER)?;

    let mut order: Vec<TraceKey> = Vec::new();
    let mut current: Option<TraceKey> = None;
    let mut pending: HashMap<TraceKey, Pending> = HashMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != TRACE_HEADER.len() {
            return Err(parse_err(path, line, format!("expected 6 fields, found {}", record.len())));
        }
        let kind: RaterKind = record[2].parse().map_err(|e: String| parse_err(path, line, e))?;
        let attribute: Attribute = record[3].parse().map_err(|e: String| parse_err(path, line, e))?;
        let time_s: f64 = record[4]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad time_s '{}'", &record[4])))?;
        if !time_s.is_finite() || time_s < 0.0 {
            return Err(parse_err(path, line, format!("time_s must be finite and >= 0, got {time_s}")));
        }
        let value = if is_missing(&record[5]) {
            None
        } else {
            let raw: f64 = record[5]
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad value '{}'", &record[5])))?;
            let (lo, hi) = kind.native_range();
            if !(raw >= lo && raw <= hi) {
                return Err(parse_err(
                    path,
                    line,
                    format!("value {raw} outside the {kind} range [{lo}, {hi}]"),
                ));
            }
            Some(kind.to_canonical(raw))
        };

        let key = TraceKey {
            clip_id: record[0].to_string(),
            rater_id: record[1].to_string(),
            attribute,
        };
        if current.as_ref() != Some(&key) {
            if pending.contains_key(&key) {
                return Err(Error::DuplicateKey(format!("{key} (line {line})")));
            }
            current = Some(key.clone());
        }
        let entry = pending.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Pending {
                kind,
                times: Vec::new(),
                samples: Vec::new(),
            }
        });
        if entry.kind != kind {
            return Err(parse_err(path, line, format!("rater_kind changes within trace {key}")));
        }
        if let Some(&last) = entry.times.last() {
            if time_s <= last {
                return Err(parse_err(
                    path,
                    line,
                    format!("non-monotone timestamp {time_s} after {last} in trace {key}"),
                ));
            }
        }
        entry.times.push(time_s);
        if let Some(value) = value {
            entry.samples.push(Sample { time_s, value });
        }
    }

    order
        .into_iter()
        .map(|key| {
            let p = pending.remove(&key).expect("key recorded on insert");
            let missing = missing_fraction(&p.times, p.samples.len());
            AnnotationTrace::new(key.clip_id, key.rater_id, p.kind, key.attribute, p.samples)?
                .with_missing_fraction(missing)
        })
        .collect()
}

/// Loads trace-CSV: one trace per (clip, rater, attribute), in order of first
/// appearance, with values mapped to the canonical range.
///
/// Each trace occupies one contiguous block of rows; a key that shows up
/// again after rows of another key is reported as a duplicate.
pub fn load_traces(path: impl AsRef<Path>) -> Result<Vec<AnnotationTrace>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_traces(file, path)
}

/// Loads the static-rating sidecar (`clip_id,rater_id,attribute,static_value`).
/// Values are on the native scale of the rater population and are rescaled
/// when attached with [`attach_static`].
pub fn load_static_ratings(path: impl AsRef<Path>) -> Result<HashMap<StaticKey, f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    check_header(path, &headers, &["clip_id", "rater_id", "attribute", "static_value"])?;
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(parse_err(path, line, format!("expected 4 fields, found {}", rec.len())));
        }
        let attribute: Attribute = rec[2].parse().map_err(|e: String| parse_err(path, line, e))?;
        let value: f64 = rec[3]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad static_value '{}'", &rec[3])))?;
        let key = StaticKey {
            clip_id: rec[0].to_string(),
            rater_id: rec[1].to_string(),
            attribute,
        };
        if out.insert(key.clone(), value).is_some() {
            return Err(Error::DuplicateKey(format!("{key} (line {line})")));
        }
    }
    Ok(out)
}

impl AnnotationTrace {
    /// Attaches a native-scale static rating, mapping it to the canonical range.
    pub fn attach_static(self, native: f64) -> Result<Self> {
        let (lo, hi) = self.rater_kind.native_range();
        if !(native >= lo && native <= hi) {
            return Err(Error::invalid(format!(
                "static rating {native} outside the {} range [{lo}, {hi}]",
                self.rater_kind
            )));
        }
        let canonical = self.rater_kind.to_canonical(native);
        self.with_static(Some(canonical))
    }
}

/// Writes traces back as trace-CSV on each population's native scale.
pub fn write_traces<W: Write>(writer: W, traces: &[AnnotationTrace]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::invalid(format!("csv write: {e}"));
    wtr.write_record(TRACE_HEADER).map_err(csv_err)?;
    for t in traces {
        for s in &t.samples {
            wtr.write_record([
                t.clip_id.as_str(),
                t.rater_id.as_str(),
                &t.rater_kind.to_string(),
                &t.attribute.to_string(),
                &s.time_s.to_string(),
                &t.rater_kind.to_native(s.value).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    wtr.flush().map_err(|e| Error::invalid(format!("csv write: {e}")))?;
    Ok(())
}
