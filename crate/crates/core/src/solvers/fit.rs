use ndarray::{s, Array2};

use super::fista::{fista_solve, SolverConfig};
use super::model::{ModelKind, ModelSpec};
use super::prox::Penalty;
use super::smooth::{Quadratic, SmoothLoss, SumOfParts};
use crate::design::StackedDesign;
use crate::{Error, Result};

/// Outcome of fitting one model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelSpec,
    /// `D x RC` weights.
    pub w: Array2<f64>,
    /// For decomposed models, `w = shared_part + sparse_part`.
    pub shared_part: Option<Array2<f64>>,
    pub sparse_part: Option<Array2<f64>>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub sparsity: f64,
}

impl FitResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the start point")
    }
}

/// Fraction of entries with `|w| <= 1e-6 * max|w|`.
pub fn sparsity(w: &Array2<f64>) -> f64 {
    if w.is_empty() {
        return 1.0;
    }
    let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-6 * max;
    w.iter().filter(|v| v.abs() <= tol).count() as f64 / w.len() as f64
}

/// Smooth part of a model's objective.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelLoss {
    Plain(Quadratic),
    /// Over the stacked pair `[shared | sparse]`.
    Pair(SumOfParts<Quadratic>),
}

impl SmoothLoss for ModelLoss {
    fn value(&self, w: &Array2<f64>) -> f64 {
        match self {
            ModelLoss::Plain(q) => q.value(w),
            ModelLoss::Pair(p) => p.value(w),
        }
    }

    fn gradient(&self, w: &Array2<f64>) -> Array2<f64> {
        match self {
            ModelLoss::Plain(q) => q.gradient(w),
            ModelLoss::Pair(p) => p.gradient(w),
        }
    }

    fn bregman(&self, y: &Array2<f64>, g: &Array2<f64>, d: &Array2<f64>) -> f64 {
        match self {
            ModelLoss::Plain(q) => q.bregman(y, g, d),
            ModelLoss::Pair(p) => p.bregman(y, g, d),
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            ModelLoss::Plain(q) => q.shape(),
            ModelLoss::Pair(p) => p.shape(),
        }
    }
}

/// The smooth/non-smooth split a model is optimized with.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub smooth: ModelLoss,
    pub penalty: Penalty,
}

fn crowd_loss(design: &StackedDesign) -> Quadratic {
    Quadratic::weighted_least_squares(design.x.view(), design.y.view(), design.u.view())
}

fn require_graph(design: &StackedDesign, kind: ModelKind) -> Result<&Array2<f64>> {
    design
        .e
        .as_ref()
        .ok_or_else(|| Error::MissingInput(format!("{kind} needs a task graph")))
}

/// Builds the objective of `model` on `design`.
///
/// The crowd loss is `1/2 |U^(1/2) (Y - X W)|_F^2` for every model, so the
/// baselines and EG-MTL share one data term; quadratic regularizers (ridge,
/// graph smoothness, the expert loss) are folded into the smooth part.
pub fn build_problem(model: &ModelSpec, design: &StackedDesign) -> Result<Problem> {
    model.validate()?;
    design.validate()?;
    let rc = design.n_tasks * design.n_classes;
    let problem = match *model {
        ModelSpec::StLasso { alpha, beta } => {
            let blocks: Vec<_> = (0..design.n_tasks).map(|t| design.task_block(t)).collect();
            let mut q = Quadratic::blockwise_least_squares(&blocks, design.n_classes);
            q.add_ridge(beta);
            Problem {
                smooth: ModelLoss::Plain(q),
                penalty: Penalty::L1(alpha),
            }
        }
        ModelSpec::MtLasso { alpha, beta } | ModelSpec::L21Mtl { alpha, beta } => {
            let mut q = crowd_loss(design);
            q.add_ridge(beta);
            let penalty = if model.kind() == ModelKind::MtLasso {
                Penalty::L1(alpha)
            } else {
                Penalty::L21Rows(alpha)
            };
            Problem {
                smooth: ModelLoss::Plain(q),
                penalty,
            }
        }
        ModelSpec::DirtyMtl { rho1, rho2 } => Problem {
            smooth: ModelLoss::Pair(SumOfParts { inner: crowd_loss(design) }),
            penalty: Penalty::Split {
                at: rc,
                left: Box::new(Penalty::LinfRows(rho1)),
                right: Box::new(Penalty::L1(rho2)),
            },
        },
        ModelSpec::RobustMtl { rho1, rho2 } => Problem {
            smooth: ModelLoss::Pair(SumOfParts { inner: crowd_loss(design) }),
            penalty: Penalty::Split {
                at: rc,
                left: Box::new(Penalty::L21Rows(rho1)),
                right: Box::new(Penalty::L21Cols(rho2)),
            },
        },
        ModelSpec::SrMtl { alpha, beta, gamma } => {
            let e = require_graph(design, ModelKind::SrMtl)?;
            let mut q = crowd_loss(design);
            q.add_graph(e.view(), alpha);
            q.add_ridge(gamma);
            Problem {
                smooth: ModelLoss::Plain(q),
                penalty: Penalty::L1(beta),
            }
        }
        ModelSpec::EgMtl {
            lambda1,
            lambda2,
            lambda3,
        } => {
            let ex = design
                .expert
                .as_ref()
                .ok_or_else(|| Error::MissingInput("eg_mtl needs expert features and labels (P, V)".into()))?;
            let e = require_graph(design, ModelKind::EgMtl)?;
            let mut q = crowd_loss(design);
            q.add_squared_residual(ex.p.view(), ex.v.view(), lambda1);
            q.add_graph(e.view(), lambda2);
            Problem {
                smooth: ModelLoss::Plain(q),
                penalty: Penalty::L1(lambda3),
            }
        }
    };
    Ok(problem)
}

/// Fits `model` on `design` with the accelerated proximal-gradient solver.
pub fn fit(model: &ModelSpec, design: &StackedDesign, config: &SolverConfig) -> Result<FitResult> {
    let problem = build_problem(model, design)?;
    let w0 = config.initial_point(problem.smooth.shape());
    let out = fista_solve(&problem.smooth, &problem.penalty, w0, config)?;
    let rc = design.n_tasks * design.n_classes;
    let (w, shared, sparse) = if model.kind().is_decomposed() {
        let shared = out.w.slice(s![.., ..rc]).to_owned();
        let sparse = out.w.slice(s![.., rc..]).to_owned();
        (&shared + &sparse, Some(shared), Some(sparse))
    } else {
        (out.w, None, None)
    };
    Ok(FitResult {
        model: *model,
        sparsity: sparsity(&w),
        w,
        shared_part: shared,
        sparse_part: sparse,
        objective_trace: out.objective_trace,
        iterations: out.iterations,
        converged: out.converged,
    })
}

fn check_weights(w: &Array2<f64>, design: &StackedDesign) -> Result<()> {
    if w.dim() != design.weight_shape() {
        return Err(Error::dim(format!(
            "W is {:?}, design expects {:?}",
            w.dim(),
            design.weight_shape()
        )));
    }
    Ok(())
}

/// EG-MTL objective
/// `1/2 |U^(1/2)(Y - XW)|^2 + l1 |V - PW|^2 + l2 |E W'|^2 + l3 |W|_1`,
/// evaluated from the residuals. Absent expert or graph blocks contribute 0.
pub fn objective_egmtl(w: &Array2<f64>, design: &StackedDesign, lambda1: f64, lambda2: f64, lambda3: f64) -> Result<f64> {
    check_weights(w, design)?;
    let r = &design.y - &design.x.dot(w);
    let crowd: f64 = r
        .rows()
        .into_iter()
        .zip(design.u.iter())
        .map(|(row, u)| u * row.iter().map(|v| v * v).sum::<f64>())
        .sum();
    let expert = design.expert.as_ref().map_or(0.0, |ex| {
        (&ex.v - &ex.p.dot(w)).iter().map(|v| v * v).sum::<f64>()
    });
    let graph = design
        .e
        .as_ref()
        .map_or(0.0, |e| e.dot(&w.t()).iter().map(|v| v * v).sum::<f64>());
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    Ok(0.5 * crowd + lambda1 * expert + lambda2 * graph + lambda3 * l1)
}

/// Gradient of the smooth EG-MTL part:
/// `X'U(XW - Y) + 2 l1 P'(PW - V) + 2 l2 W E'E`.
pub fn grad_smooth_egmtl(w: &Array2<f64>, design: &StackedDesign, lambda1: f64, lambda2: f64) -> Result<Array2<f64>> {
    check_weights(w, design)?;
    let resid = &design.x.dot(w) - &design.y;
    let weighted = &resid * &design.u.view().insert_axis(ndarray::Axis(1));
    let mut g = design.x.t().dot(&weighted);
    if let Some(ex) = &design.expert {
        let er = &ex.p.dot(w) - &ex.v;
        g.scaled_add(2.0 * lambda1, &ex.p.t().dot(&er));
    }
    if let Some(e) = &design.e {
        g.scaled_add(2.0 * lambda2, &w.dot(&e.t().dot(e)));
    }
    Ok(g)
}
