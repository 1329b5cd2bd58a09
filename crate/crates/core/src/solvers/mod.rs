//! Multi-task models and the proximal-gradient solver that fits them.

mod fista;
mod fit;
mod io;
mod model;
mod predict;
mod prox;
pub mod smooth;

pub use fista::{fista_solve, FistaOutput, Init, SolverConfig};
pub use fit::{build_problem, fit, grad_smooth_egmtl, objective_egmtl, sparsity, FitResult, ModelLoss, Problem};
pub use io::{write_weights_csv, FitReport};
pub use model::{ModelKind, ModelSpec};
pub use predict::{decode_class, decode_classes, decode_level, decode_levels, pooled_scores, predict, task_scores, DecodeMode, Predictions};
pub use prox::{project_l1_ball, prox_l1, prox_l21_rows, prox_linf_rows, Penalty};
pub use smooth::{frob_dot, frob_sq, Quadratic, SmoothLoss, SumOfParts};
