use super::{AnnotationTrace, Attribute, RaterKind};
use crate::{Error, Result};

/// A trace on a uniform time grid: `values[k]` is the rating at
/// `start_s + k / rate_hz`. Its duration is `values.len() / rate_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformTrace {
    pub clip_id: String,
    pub rater_id: String,
    pub rater_kind: RaterKind,
    pub attribute: Attribute,
    pub start_s: f64,
    pub rate_hz: f64,
    pub values: Vec<f64>,
}

impl UniformTrace {
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.rate_hz
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.start_s + k as f64 / self.rate_hz
    }
}

/// Linear interpolation of the samples at `t`, holding the first/last value
/// outside the sampled span. The trace must hold at least one sample.
pub fn interpolate(trace: &AnnotationTrace, t: f64) -> f64 {
    let s = &trace.samples;
    let first = s[0];
    let last = s[s.len() - 1];
    if t <= first.time_s {
        return first.value;
    }
    if t >= last.time_s {
        return last.value;
    }
    // first index with time > t; 1 <= idx < len
    let idx = s.partition_point(|p| p.time_s <= t);
    let (a, b) = (s[idx - 1], s[idx]);
    if a.time_s == t {
        return a.value;
    }
    let w = (t - a.time_s) / (b.time_s - a.time_s);
    a.value + w * (b.value - a.value)
}

/// Resamples onto a uniform grid at `rate_hz` spanning the first to the last
/// sample time.
pub fn resample_trace(trace: &AnnotationTrace, rate_hz: f64) -> Result<UniformTrace> {
    if trace.samples.len() < 2 {
        return Err(Error::invalid(format!(
            "trace {} has {} samples; resampling needs at least 2",
            trace.key(),
            trace.samples.len()
        )));
    }
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Error::invalid(format!("rate must be positive, got {rate_hz}")));
    }
    let start = trace.samples[0].time_s;
    let n = (trace.duration() * rate_hz + 1e-9).floor() as usize + 1;
    let values = (0..n)
        .map(|k| interpolate(trace, start + k as f64 / rate_hz))
        .collect();
    Ok(UniformTrace {
        clip_id: trace.clip_id.clone(),
        rater_id: trace.rater_id.clone(),
        rater_kind: trace.rater_kind,
        attribute: trace.attribute,
        start_s: start,
        rate_hz,
        values,
    })
}

/// The final `window_s` seconds of a uniform trace.
pub fn window_last(trace: &UniformTrace, window_s: f64) -> Result<Vec<f64>> {
    let needed = (window_s * trace.rate_hz).round() as usize;
    if needed == 0 || trace.values.len() < needed {
        return Err(Error::invalid(format!(
            "trace ({}, {}) lasts {} s, shorter than the {window_s} s window",
            trace.clip_id,
            trace.rater_id,
            trace.duration()
        )));
    }
    Ok(trace.values[trace.values.len() - needed..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tr(times: &[f64], values: &[f64]) -> AnnotationTrace {
        AnnotationTrace::from_series("c", "r", RaterKind::Expert, Attribute::Arousal, times, values).unwrap()
    }

    fn uniform(n: usize) -> UniformTrace {
        UniformTrace {
            clip_id: "c".into(),
            rater_id: "r".into(),
            rater_kind: RaterKind::Expert,
            attribute: Attribute::Arousal,
            start_s: 0.0,
            rate_hz: 1.0,
            values: (0..n).map(|i| i as f64 / n as f64).collect(),
        }
    }

    #[test]
    fn linear_fill() {
        let u = resample_trace(&tr(&[0.0, 2.0], &[0.0, 1.0]), 1.0).unwrap();
        assert_eq!(u.values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_stays_constant() {
        let u = resample_trace(&tr(&[0.0, 10.0], &[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(u.values, vec![1.0; 11]);
    }

    #[test]
    fn uniform_input_is_identity() {
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let values: Vec<f64> = (0..20).map(|i| ((i as f64) * 0.3).sin() * 0.9).collect();
        let u = resample_trace(&tr(&times, &values), 2.0).unwrap();
        assert_eq!(u.values, values);
    }

    #[test]
    fn single_sample_errors() {
        assert!(resample_trace(&tr(&[0.0], &[0.3]), 1.0).is_err());
    }

    #[test]
    fn window_takes_tail() {
        let u = uniform(90);
        let w = window_last(&u, 50.0).unwrap();
        assert_eq!(w.len(), 50);
        assert_eq!(w, u.values[40..].to_vec());
    }

    #[test]
    fn window_equal_to_length_is_whole_trace() {
        let u = uniform(50);
        assert_eq!(window_last(&u, 50.0).unwrap(), u.values);
    }

    #[test]
    fn window_longer_than_trace_errors() {
        assert!(window_last(&uniform(30), 50.0).is_err());
    }

    proptest! {
        #[test]
        fn preserves_values_on_grid(vals in proptest::collection::vec(-1.0f64..1.0, 2..40), gaps in proptest::collection::vec(1usize..4, 40)) {
            // sample times on an integer grid with irregular gaps
            let mut times = Vec::with_capacity(vals.len());
            let mut t = 3.0;
            for g in gaps.iter().take(vals.len()) {
                times.push(t);
                t += *g as f64;
            }
            let trace = tr(&times, &vals);
            let u = resample_trace(&trace, 1.0).unwrap();
            for (time, v) in times.iter().zip(&vals) {
                let k = (time - u.start_s).round() as usize;
                prop_assert!((u.values[k] - v).abs() <= 1e-12);
            }
        }
    }
}
