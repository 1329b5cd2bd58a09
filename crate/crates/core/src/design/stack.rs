use std::ops::Range;

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::Serialize;

use super::{build_incidence, build_label_indicator, build_reliability, Levels, Reliability, TaskGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    /// 1-based class or level indices.
    Classes(Vec<usize>),
    /// Ratings in [-1, 1] awaiting discretization.
    Continuous(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Classes(v) => v.len(),
            Labels::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples of one task (one clip): `features` rows paired with `labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task_id: String,
    pub features: Array2<f64>,
    pub labels: Labels,
}

impl TaskDataset {
    pub fn new(task_id: impl Into<String>, features: Array2<f64>, labels: Labels) -> Result<Self> {
        let t = TaskDataset {
            task_id: task_id.into(),
            features,
            labels,
        };
        if t.features.nrows() != t.labels.len() {
            return Err(Error::dim(format!(
                "task {}: {} feature rows but {} labels",
                t.task_id,
                t.features.nrows(),
                t.labels.len()
            )));
        }
        Ok(t)
    }

    pub fn discretized(&self, levels: Levels) -> Result<TaskDataset> {
        let labels = match &self.labels {
            Labels::Classes(c) => Labels::Classes(c.clone()),
            Labels::Continuous(v) => {
                Labels::Classes(v.iter().map(|&x| levels.level_of(x)).collect::<Result<_>>()?)
            }
        };
        TaskDataset::new(self.task_id.clone(), self.features.clone(), labels)
    }

    fn classes(&self) -> Result<&[usize]> {
        match &self.labels {
            Labels::Classes(c) => Ok(c),
            Labels::Continuous(_) => Err(Error::invalid(format!(
                "task {} still has continuous labels; discretize first",
                self.task_id
            ))),
        }
    }
}

/// Row-stacked features and indicator labels of several tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Stacked {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub task_rows: Vec<Range<usize>>,
}

/// Stacks tasks in order. Rows of task `t` get indicator labels in block `t`.
pub fn stack_tasks(tasks: &[TaskDataset], c: usize) -> Result<Stacked> {
    stack_into(tasks, tasks.len(), c, |i| Ok(i + 1))
}

fn stack_into(
    tasks: &[TaskDataset],
    r: usize,
    c: usize,
    task_index: impl Fn(usize) -> Result<usize>,
) -> Result<Stacked> {
    let first = tasks.first().ok_or_else(|| Error::invalid("no tasks to stack"))?;
    let d = first.features.ncols();
    let n: usize = tasks.iter().map(|t| t.features.nrows()).sum();
    let mut x = Array2::zeros((n, d));
    let mut y = Array2::zeros((n, r * c));
    let mut task_rows = Vec::with_capacity(tasks.len());
    let mut row = 0;
    for (i, t) in tasks.iter().enumerate() {
        if t.features.ncols() != d {
            return Err(Error::dim(format!(
                "task {} has {} features, expected {d}",
                t.task_id,
                t.features.ncols()
            )));
        }
        if t.features.nrows() == 0 {
            return Err(Error::invalid(format!("task {} has no samples", t.task_id)));
        }
        let ti = task_index(i)?;
        let classes = t.classes()?;
        let rows = row..row + t.features.nrows();
        x.slice_mut(s![rows.clone(), ..]).assign(&t.features);
        for (k, &class) in classes.iter().enumerate() {
            y.row_mut(row + k).assign(&build_label_indicator(ti, class, r, c)?);
        }
        task_rows.push(rows);
        row += t.features.nrows();
    }
    Ok(Stacked { x, y, task_rows })
}

/// Expert rows of the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertBlock {
    pub p: Array2<f64>,
    pub v: Array2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub n: usize,
    pub n_expert: usize,
    pub d: usize,
    pub r: usize,
    pub c: usize,
}

/// The assembled problem: crowd rows `(x, y)` weighted by `u`, optional
/// expert rows, optional task-graph incidence `e`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedDesign {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub u: Array1<f64>,
    pub expert: Option<ExpertBlock>,
    pub e: Option<Array2<f64>>,
    pub n_tasks: usize,
    pub n_classes: usize,
    /// Crowd row range of each task.
    pub task_rows: Vec<Range<usize>>,
}

impl StackedDesign {
    /// Crowd-only design with identity reliability and no graph.
    pub fn new(x: Array2<f64>, y: Array2<f64>, r: usize, c: usize, task_rows: Vec<Range<usize>>) -> Result<Self> {
        let n = x.nrows();
        let design = StackedDesign {
            u: Array1::ones(n),
            x,
            y,
            expert: None,
            e: None,
            n_tasks: r,
            n_classes: c,
            task_rows,
        };
        design.validate()?;
        Ok(design)
    }

    /// Stacks crowd tasks (and optional expert tasks, matched by task id)
    /// into a design. Expert tasks may cover a subset of the crowd tasks.
    pub fn assemble(
        crowd: &[TaskDataset],
        expert: Option<&[TaskDataset]>,
        c: usize,
        graph: Option<&TaskGraph>,
        reliability: &Reliability,
    ) -> Result<Self> {
        let r = crowd.len();
        let stacked = stack_tasks(crowd, c)?;
        let mut design = StackedDesign::new(stacked.x, stacked.y, r, c, stacked.task_rows)?;
        if let Some(expert) = expert {
            let index_of = |i: usize| -> Result<usize> {
                let id = &expert[i].task_id;
                crowd
                    .iter()
                    .position(|t| &t.task_id == id)
                    .map(|p| p + 1)
                    .ok_or_else(|| Error::invalid(format!("expert task {id} has no crowd counterpart")))
            };
            let ex = stack_into(expert, r, c, index_of)?;
            design = design.with_expert(ex.x, ex.y)?;
        }
        if let Some(g) = graph {
            design = design.with_graph(g)?;
        }
        design.with_reliability(reliability)
    }

    pub fn with_expert(mut self, p: Array2<f64>, v: Array2<f64>) -> Result<Self> {
        self.expert = Some(ExpertBlock { p, v });
        self.validate()?;
        Ok(self)
    }

    pub fn with_graph(mut self, graph: &TaskGraph) -> Result<Self> {
        if graph.is_empty() {
            log::warn!("task graph is empty; the graph penalty vanishes");
        }
        self.e = Some(build_incidence(graph, self.n_tasks, self.n_classes)?);
        Ok(self)
    }

    pub fn with_reliability(mut self, spec: &Reliability) -> Result<Self> {
        self.u = build_reliability(spec, self.x.nrows())?;
        Ok(self)
    }

    /// Returns a copy with features mapped through `f` (crowd and expert rows).
    pub fn map_features(&self, f: impl Fn(ArrayView2<f64>) -> Array2<f64>) -> Result<Self> {
        let mut out = self.clone();
        out.x = f(self.x.view());
        if let Some(ex) = &mut out.expert {
            ex.p = f(ex.p.view());
        }
        out.validate()?;
        Ok(out)
    }

    pub fn dims(&self) -> Dims {
        Dims {
            n: self.x.nrows(),
            n_expert: self.expert.as_ref().map_or(0, |e| e.p.nrows()),
            d: self.x.ncols(),
            r: self.n_tasks,
            c: self.n_classes,
        }
    }

    pub fn weight_shape(&self) -> (usize, usize) {
        (self.x.ncols(), self.n_tasks * self.n_classes)
    }

    /// Crowd rows and label block of one task (0-based), for single-task fits.
    pub fn task_block(&self, t: usize) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>, ndarray::ArrayView1<'_, f64>) {
        let rows = self.task_rows[t].clone();
        let c = self.n_classes;
        (
            self.x.slice(s![rows.clone(), ..]),
            self.y.slice(s![rows.clone(), t * c..(t + 1) * c]),
            self.u.slice(s![rows]),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let rc = self.n_tasks * self.n_classes;
        let (n, d) = self.x.dim();
        if self.n_tasks == 0 || self.n_classes == 0 {
            return Err(Error::invalid("design needs at least one task and one class"));
        }
        if self.y.dim() != (n, rc) {
            return Err(Error::dim(format!("Y is {:?}, expected ({n}, {rc})", self.y.dim())));
        }
        if self.u.len() != n {
            return Err(Error::dim(format!("U has {} entries for {n} rows", self.u.len())));
        }
        if self.u.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("reliability weights must be positive"));
        }
        if let Some(ex) = &self.expert {
            if ex.p.ncols() != d {
                return Err(Error::dim(format!("P has {} columns, X has {d}", ex.p.ncols())));
            }
            if ex.v.dim() != (ex.p.nrows(), rc) {
                return Err(Error::dim(format!("V is {:?}, expected ({}, {rc})", ex.v.dim(), ex.p.nrows())));
            }
        }
        if let Some(e) = &self.e {
            if e.ncols() != rc {
                return Err(Error::dim(format!("E has {} columns, expected {rc}", e.ncols())));
            }
        }
        let covered: usize = self.task_rows.iter().map(|r| r.len()).sum();
        if self.task_rows.len() != self.n_tasks || covered != n {
            return Err(Error::dim(format!(
                "task row ranges cover {covered} rows in {} tasks; design has {n} rows in {} tasks",
                self.task_rows.len(),
                self.n_tasks
            )));
        }
        Ok(())
    }
}
