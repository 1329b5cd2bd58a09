//! Time-continuous affect annotations: ingestion, quality control,
//! resampling, fusion and agreement statistics.

mod concordance;
mod fusion;
mod qc;
mod resample;
mod trace;
mod window;

pub use concordance::{kendalls_w, pearson, ranks_with_ties, ConcordanceReport, Segment};
pub use fusion::median_fuse;
pub use qc::{quality_filter, partition, QcPolicy, RejectReason, Verdict};
pub use resample::{interpolate, resample_trace, window_last, UniformTrace};
pub use trace::{
    load_static_ratings, load_traces, read_traces, write_traces, AnnotationTrace, Attribute,
    RaterKind, Sample, StaticKey, TraceKey, CANONICAL_RANGE,
};
pub use window::{window_groups, WindowGroup};
