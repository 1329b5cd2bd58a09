use std::collections::BTreeMap;

use super::{kendalls_w, median_fuse, resample_trace, window_last, AnnotationTrace, Attribute, ConcordanceReport, RaterKind, Segment};
use crate::Result;

/// Windowed rating vectors of every rater of one clip and attribute,
/// optionally restricted to one rater population.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGroup {
    pub clip_id: String,
    pub attribute: Attribute,
    /// `None` when crowd and expert raters are pooled.
    pub rater_kind: Option<RaterKind>,
    pub rater_ids: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

/// Resamples each trace to `rate_hz`, keeps its last `window_s` seconds and
/// groups the vectors by clip and attribute (and rater kind when
/// `split_kinds`). Groups come out sorted by key; raters keep input order.
pub fn window_groups(traces: &[AnnotationTrace], rate_hz: f64, window_s: f64, split_kinds: bool) -> Result<Vec<WindowGroup>> {
    let mut groups: BTreeMap<(String, Attribute, Option<RaterKind>), WindowGroup> = BTreeMap::new();
    for t in traces {
        let vector = window_last(&resample_trace(t, rate_hz)?, window_s)?;
        let kind = split_kinds.then_some(t.rater_kind);
        let g = groups
            .entry((t.clip_id.clone(), t.attribute, kind))
            .or_insert_with(|| WindowGroup {
                clip_id: t.clip_id.clone(),
                attribute: t.attribute,
                rater_kind: kind,
                rater_ids: Vec::new(),
                vectors: Vec::new(),
            });
        g.rater_ids.push(t.rater_id.clone());
        g.vectors.push(vector);
    }
    Ok(groups.into_values().collect())
}

impl WindowGroup {
    pub fn concordance(&self, segment: Segment) -> Result<ConcordanceReport> {
        let rows: Vec<&[f64]> = self.vectors.iter().map(|v| segment.slice(v)).collect();
        Ok(ConcordanceReport {
            clip_set: self.clip_id.clone(),
            attribute: self.attribute,
            segment,
            rater_kind: self.rater_kind,
            n_raters: rows.len(),
            n_items: rows.first().map_or(0, |r| r.len()),
            kendalls_w: kendalls_w(&rows)?,
        })
    }

    pub fn fused(&self) -> Result<Vec<f64>> {
        median_fuse(&self.vectors)
    }
}
