//! Desk-scale versions of the two evaluation protocols: snippet regression
//! of rating levels and transfer of static-class classifiers, plus the
//! synthetic data, cross-validation, metrics and tables they need.

mod crossval;
mod data;
mod method;
mod metrics;
mod p1;
mod p2;
mod snippets;
mod sources;
mod synth;
mod table;

pub use crossval::{contiguous_folds, crossval_lambda1, CvOutcome, Goal};
pub use data::{fuse_raters, select_expert_subset, ClassificationData, ClipSeries, RatedClip, RaterSeries, RegressionData};
pub use method::{Method, Tuning};
pub use metrics::{accuracy, mean_sd, rmse};
pub use p1::{run_p1, P1Config};
pub use p2::{majority_vote, run_p2, P2Config, CLASSES};
pub use snippets::{extract_snippets, Half, SnippetSplit};
pub use sources::{load_classification, load_regression, ClassificationFiles, RegressionFiles};
pub use synth::{synth_classification, synth_generate, SynthConfig, SynthData};
pub use table::{Cell, CellKey, CellValue, Metric, ResultTable};
