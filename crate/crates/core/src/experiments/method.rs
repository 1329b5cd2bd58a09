use std::fmt;

use serde::{Deserialize, Serialize};

use crate::solvers::ModelKind;

fn default_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0, 100.0]
}

/// Settings shared by both protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tuning {
    /// Values tried for each model's first hyperparameter.
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    /// Value of every hyperparameter that is not cross-validated.
    pub fixed: f64,
    /// Edge weight of the complete task graph used by graph-based models.
    pub graph_gamma: f64,
    /// Expert count of the reduced-expert EG-MTL condition; `None` skips it.
    pub expert_subset: Option<usize>,
    pub solver: crate::solvers::SolverConfig,
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            lambda_grid: default_grid(),
            folds: 5,
            fixed: 1.0,
            graph_gamma: 1.0,
            expert_subset: Some(7),
            solver: Default::default(),
        }
    }
}

impl Tuning {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("lambda_grid must be non-empty with finite values >= 0"));
        }
        if self.lambda_grid.len() > 1 && self.folds < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        if !(self.fixed.is_finite() && self.fixed >= 0.0) {
            return Err(Error::invalid("fixed hyperparameter value must be finite and >= 0"));
        }
        if !(self.graph_gamma.is_finite() && self.graph_gamma >= 0.0) {
            return Err(Error::invalid("graph_gamma must be finite and >= 0"));
        }
        if self.expert_subset == Some(0) {
            return Err(Error::invalid("expert_subset must be >= 1"));
        }
        self.solver.validate()
    }
}

/// A row of a result table: a model, or EG-MTL restricted to a subset of
/// experts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Model(ModelKind),
    ExpertSubset(usize),
}

impl Method {
    pub fn kind(self) -> ModelKind {
        match self {
            Method::Model(k) => k,
            Method::ExpertSubset(_) => ModelKind::EgMtl,
        }
    }

    /// The methods run for `models`: each model, plus the reduced-expert
    /// condition right after `eg_mtl` when requested.
    pub fn expand(models: &[ModelKind], expert_subset: Option<usize>) -> Vec<Method> {
        let mut out = Vec::new();
        for &m in models {
            if out.contains(&Method::Model(m)) {
                continue;
            }
            out.push(Method::Model(m));
            if let (ModelKind::EgMtl, Some(k)) = (m, expert_subset) {
                out.push(Method::ExpertSubset(k));
            }
        }
        out
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Model(k) => write!(f, "{k}"),
            Method::ExpertSubset(n) => write!(f, "eg_mtl({n})"),
        }
    }
}
