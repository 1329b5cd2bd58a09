use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnnotationTrace;
use crate::{Error, Result};

/// Thresholds for discarding unusable annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcPolicy {
    pub max_missing_fraction: f64,
    /// Minimum fraction of the trace duration during which the slider moved.
    pub min_active_fraction: f64,
    /// Minimum sample standard deviation on the canonical scale.
    pub min_std: f64,
    pub require_sign_consistency: bool,
}

impl Default for QcPolicy {
    fn default() -> Self {
        QcPolicy {
            max_missing_fraction: 0.20,
            min_active_fraction: 0.20,
            min_std: 0.01,
            require_sign_consistency: true,
        }
    }
}

impl QcPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_missing_fraction", self.max_missing_fraction),
            ("min_active_fraction", self.min_active_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.min_std >= 0.0) {
            return Err(Error::invalid(format!("min_std must be >= 0, got {}", self.min_std)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Missing,
    Inactivity,
    LowVariance,
    SignInconsistent,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::Missing => "missing",
            RejectReason::Inactivity => "inactivity",
            RejectReason::LowVariance => "low_variance",
            RejectReason::SignInconsistent => "sign",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(RejectReason),
}

impl Verdict {
    pub fn is_accepted(self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

fn active_fraction(trace: &AnnotationTrace) -> f64 {
    let span = trace.duration();
    if span <= 0.0 {
        return 0.0;
    }
    let moving: f64 = trace
        .samples
        .windows(2)
        .filter(|w| w[1].value != w[0].value)
        .map(|w| w[1].time_s - w[0].time_s)
        .sum();
    moving / span
}

fn sample_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Value of largest magnitude; the first one wins on ties.
fn extremal_value(trace: &AnnotationTrace) -> Option<f64> {
    trace
        .values()
        .fold(None, |best: Option<f64>, v| match best {
            Some(b) if b.abs() >= v.abs() => Some(b),
            _ => Some(v),
        })
}

/// Applies the rules in order (missing data, inactivity / flat signal,
/// static-vs-continuous sign) and reports the first one that fails.
///
/// The sign rule only applies when the trace carries a static rating and
/// both signs are non-zero.
pub fn quality_filter(trace: &AnnotationTrace, policy: &QcPolicy) -> Verdict {
    if trace.missing_fraction > policy.max_missing_fraction {
        return Verdict::Rejected(RejectReason::Missing);
    }
    if active_fraction(trace) < policy.min_active_fraction {
        return Verdict::Rejected(RejectReason::Inactivity);
    }
    if sample_std(trace.values()) < policy.min_std {
        return Verdict::Rejected(RejectReason::LowVariance);
    }
    if policy.require_sign_consistency {
        if let (Some(s), Some(e)) = (trace.static_rating, extremal_value(trace)) {
            if s != 0.0 && e != 0.0 && s.signum() != e.signum() {
                return Verdict::Rejected(RejectReason::SignInconsistent);
            }
        }
    }
    Verdict::Accepted
}

/// Splits traces into accepted and rejected sets, preserving input order.
pub fn partition<'a>(
    traces: &'a [AnnotationTrace],
    policy: &QcPolicy,
) -> (Vec<&'a AnnotationTrace>, Vec<(&'a AnnotationTrace, RejectReason)>) {
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for t in traces {
        match quality_filter(t, policy) {
            Verdict::Accepted => accepted.push(t),
            Verdict::Rejected(r) => rejected.push((t, r)),
        }
    }
    (accepted, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::{Attribute, RaterKind};

    fn trace(values: &[f64]) -> AnnotationTrace {
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
        AnnotationTrace::from_series("c", "r", RaterKind::Crowd, Attribute::Valence, &times, values).unwrap()
    }

    fn wavy(n: usize, offset: f64) -> Vec<f64> {
        (0..n).map(|i| offset + 0.3 * (i as f64 * 0.7).sin()).collect()
    }

    #[test]
    fn constant_trace_is_inactive() {
        let t = trace(&[0.2; 30]);
        assert_eq!(quality_filter(&t, &QcPolicy::default()), Verdict::Rejected(RejectReason::Inactivity));
    }

    #[test]
    fn quarter_missing_is_rejected() {
        let t = trace(&wavy(30, 0.0)).with_missing_fraction(0.25).unwrap();
        assert_eq!(quality_filter(&t, &QcPolicy::default()), Verdict::Rejected(RejectReason::Missing));
    }

    #[test]
    fn opposite_static_sign_is_rejected() {
        // extremal continuous value -0.4 against an overall rating of +1.5 (crowd scale)
        let values: Vec<f64> = (0..30).map(|i| -0.1 - 0.3 * (i as f64 / 29.0)).collect();
        let t = trace(&values).attach_static(1.5).unwrap();
        assert_eq!(quality_filter(&t, &QcPolicy::default()), Verdict::Rejected(RejectReason::SignInconsistent));
        let lenient = QcPolicy {
            require_sign_consistency: false,
            ..QcPolicy::default()
        };
        assert!(quality_filter(&t, &lenient).is_accepted());
    }

    #[test]
    fn mostly_still_slider_is_inactive() {
        // moves during the first 5 of 40 seconds only
        let mut values = wavy(6, 0.0);
        values.extend(std::iter::repeat_n(values[5], 35));
        let t = trace(&values);
        assert_eq!(quality_filter(&t, &QcPolicy::default()), Verdict::Rejected(RejectReason::Inactivity));
    }

    #[test]
    fn tiny_wiggle_is_low_variance() {
        let values: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 0.0 } else { 0.001 }).collect();
        let t = trace(&values);
        assert_eq!(quality_filter(&t, &QcPolicy::default()), Verdict::Rejected(RejectReason::LowVariance));
    }

    #[test]
    fn good_trace_passes() {
        let t = trace(&wavy(30, 0.5)).attach_static(1.0).unwrap();
        assert!(quality_filter(&t, &QcPolicy::default()).is_accepted());
    }

    #[test]
    fn missing_rule_reported_first() {
        let t = trace(&[0.0; 10]).with_missing_fraction(0.5).unwrap();
        assert_eq!(quality_filter(&t, &QcPolicy::default()), Verdict::Rejected(RejectReason::Missing));
    }
}
