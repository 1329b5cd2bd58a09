use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    StLasso,
    MtLasso,
    L21Mtl,
    DirtyMtl,
    RobustMtl,
    SrMtl,
    EgMtl,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::StLasso,
        ModelKind::MtLasso,
        ModelKind::L21Mtl,
        ModelKind::DirtyMtl,
        ModelKind::RobustMtl,
        ModelKind::SrMtl,
        ModelKind::EgMtl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::StLasso => "st_lasso",
            ModelKind::MtLasso => "mt_lasso",
            ModelKind::L21Mtl => "l21_mtl",
            ModelKind::DirtyMtl => "dirty_mtl",
            ModelKind::RobustMtl => "robust_mtl",
            ModelKind::SrMtl => "sr_mtl",
            ModelKind::EgMtl => "eg_mtl",
        }
    }

    pub fn needs_graph(self) -> bool {
        matches!(self, ModelKind::SrMtl | ModelKind::EgMtl)
    }

    pub fn needs_expert(self) -> bool {
        self == ModelKind::EgMtl
    }

    /// Whether the weights split into a shared and a sparse part.
    pub fn is_decomposed(self) -> bool {
        matches!(self, ModelKind::DirtyMtl | ModelKind::RobustMtl)
    }

    /// Spec with every hyperparameter set to `value`.
    pub fn uniform(self, value: f64) -> ModelSpec {
        let v = value;
        match self {
            ModelKind::StLasso => ModelSpec::StLasso { alpha: v, beta: v },
            ModelKind::MtLasso => ModelSpec::MtLasso { alpha: v, beta: v },
            ModelKind::L21Mtl => ModelSpec::L21Mtl { alpha: v, beta: v },
            ModelKind::DirtyMtl => ModelSpec::DirtyMtl { rho1: v, rho2: v },
            ModelKind::RobustMtl => ModelSpec::RobustMtl { rho1: v, rho2: v },
            ModelKind::SrMtl => ModelSpec::SrMtl { alpha: v, beta: v, gamma: v },
            ModelKind::EgMtl => ModelSpec::EgMtl {
                lambda1: v,
                lambda2: v,
                lambda3: v,
            },
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown model '{s}'")))
    }
}

/// A model and its hyperparameters.
///
/// * `st_lasso`, `mt_lasso`, `l21_mtl`: `alpha` weighs the sparsity
///   penalty (l1, l1, l2,1 over rows), `beta` the squared Frobenius norm.
/// * `dirty_mtl`: `rho1 * |S|_{1,inf} + rho2 * |Q|_1` with `W = S + Q`.
/// * `robust_mtl`: `rho1 * |S|_{2,1}` over rows, `rho2 * |Q|_{2,1}` over columns.
/// * `sr_mtl`: `alpha` graph smoothness, `beta` l1, `gamma` ridge.
/// * `eg_mtl`: `lambda1` expert loss, `lambda2` graph, `lambda3` l1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    StLasso { alpha: f64, beta: f64 },
    MtLasso { alpha: f64, beta: f64 },
    L21Mtl { alpha: f64, beta: f64 },
    DirtyMtl { rho1: f64, rho2: f64 },
    RobustMtl { rho1: f64, rho2: f64 },
    SrMtl { alpha: f64, beta: f64, gamma: f64 },
    EgMtl { lambda1: f64, lambda2: f64, lambda3: f64 },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::StLasso { .. } => ModelKind::StLasso,
            ModelSpec::MtLasso { .. } => ModelKind::MtLasso,
            ModelSpec::L21Mtl { .. } => ModelKind::L21Mtl,
            ModelSpec::DirtyMtl { .. } => ModelKind::DirtyMtl,
            ModelSpec::RobustMtl { .. } => ModelKind::RobustMtl,
            ModelSpec::SrMtl { .. } => ModelKind::SrMtl,
            ModelSpec::EgMtl { .. } => ModelKind::EgMtl,
        }
    }

    pub fn hyperparameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelSpec::StLasso { alpha, beta }
            | ModelSpec::MtLasso { alpha, beta }
            | ModelSpec::L21Mtl { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            ModelSpec::DirtyMtl { rho1, rho2 } | ModelSpec::RobustMtl { rho1, rho2 } => {
                vec![("rho1", rho1), ("rho2", rho2)]
            }
            ModelSpec::SrMtl { alpha, beta, gamma } => vec![("alpha", alpha), ("beta", beta), ("gamma", gamma)],
            ModelSpec::EgMtl {
                lambda1,
                lambda2,
                lambda3,
            } => vec![("lambda1", lambda1), ("lambda2", lambda2), ("lambda3", lambda3)],
        }
    }

    /// Name of the parameter chosen by cross-validation in the experiment
    /// protocols.
    pub fn tuned_name(&self) -> &'static str {
        self.hyperparameters()[0].0
    }

    /// Copy with the cross-validated parameter replaced.
    pub fn with_tuned(mut self, value: f64) -> Self {
        match &mut self {
            ModelSpec::StLasso { alpha, .. }
            | ModelSpec::MtLasso { alpha, .. }
            | ModelSpec::L21Mtl { alpha, .. }
            | ModelSpec::SrMtl { alpha, .. } => *alpha = value,
            ModelSpec::DirtyMtl { rho1, .. } | ModelSpec::RobustMtl { rho1, .. } => *rho1 = value,
            ModelSpec::EgMtl { lambda1, .. } => *lambda1 = value,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.hyperparameters() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{} {name} must be finite and >= 0, got {v}", self.kind())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let m = ModelSpec::EgMtl {
            lambda1: 10.0,
            lambda2: 1.0,
            lambda3: 1.0,
        };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"kind":"eg_mtl","lambda1":10.0,"lambda2":1.0,"lambda3":1.0}"#);
        assert_eq!(serde_json::from_str::<ModelSpec>(&s).unwrap(), m);
    }

    #[test]
    fn tuned_parameter() {
        let m = ModelKind::DirtyMtl.uniform(1.0).with_tuned(0.1);
        assert_eq!(m, ModelSpec::DirtyMtl { rho1: 0.1, rho2: 1.0 });
        assert_eq!(m.tuned_name(), "rho1");
        assert!(ModelKind::MtLasso.uniform(-1.0).validate().is_err());
        assert_eq!("sr_mtl".parse::<ModelKind>().unwrap(), ModelKind::SrMtl);
    }
}
