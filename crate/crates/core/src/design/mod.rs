//! Assembly of the stacked crowd + expert learning problem.
//!
//! Weights are a `D x (R*C)` matrix: task `t` (1-based) owns the column
//! block `(t-1)*C .. t*C`, one column per class or rating level.

mod graph;
mod indicator;
mod io;
mod reliability;
mod stack;
mod standardize;

pub use graph::{build_incidence, Edge, TaskGraph};
pub use indicator::{build_label_indicator, discretize_levels, Levels};
pub use io::{read_feature_csv, read_label_csv, DesignSummary, FeatureBlock, LabelRow};
pub use reliability::{build_reliability, rmse_reliability, Reliability};
pub use stack::{stack_tasks, Dims, ExpertBlock, Labels, Stacked, StackedDesign, TaskDataset};
pub use standardize::Standardizer;
