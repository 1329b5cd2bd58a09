//! Accelerated proximal gradient with backtracking.
//!
//! This is the monotone variant of FISTA: the momentum sequence
//! `t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2` drives the extrapolation, but the
//! primary iterate only moves to the prox point when that lowers the
//! composite objective, so the recorded objective never increases. The
//! Lipschitz estimate is reused between iterations and multiplied by
//! `backtrack_factor` only while the quadratic upper bound fails.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::prox::Penalty;
use super::smooth::{frob_sq, SmoothLoss};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    Zeros,
    /// Small Gaussian entries drawn from `seed`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop when the relative objective change falls below this.
    pub rel_tol: f64,
    /// Initial Lipschitz estimate.
    pub l0: f64,
    pub backtrack_factor: f64,
    pub seed: u64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 5000,
            rel_tol: 1e-7,
            l0: 1.0,
            backtrack_factor: 2.0,
            seed: 0,
            init: Init::Zeros,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::invalid("max_iter must be >= 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return Err(Error::invalid(format!("L0 must be > 0, got {}", self.l0)));
        }
        if !(self.backtrack_factor > 1.0) {
            return Err(Error::invalid(format!(
                "backtrack factor must be > 1, got {}",
                self.backtrack_factor
            )));
        }
        Ok(())
    }

    pub fn initial_point(&self, shape: (usize, usize)) -> Array2<f64> {
        match self.init {
            Init::Zeros => Array2::zeros(shape),
            Init::Random => {
                let mut rng = crate::rng::substream(self.seed, "init", &[]);
                Array2::from_shape_simple_fn(shape, || 0.01 * rng.sample::<f64, _>(StandardNormal))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FistaOutput {
    pub w: Array2<f64>,
    /// Composite objective at the start point and after every iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final Lipschitz estimate.
    pub lipschitz: f64,
}

fn finite(label: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{label} is not finite")))
    }
}

/// Minimizes `smooth(W) + penalty(W)` from `w0`.
pub fn fista_solve<S: SmoothLoss + ?Sized>(
    smooth: &S,
    penalty: &Penalty,
    w0: Array2<f64>,
    config: &SolverConfig,
) -> Result<FistaOutput> {
    config.validate()?;
    penalty.validate()?;
    if w0.dim() != smooth.shape() {
        return Err(Error::dim(format!(
            "start point is {:?}, problem expects {:?}",
            w0.dim(),
            smooth.shape()
        )));
    }
    let objective = |w: &Array2<f64>| smooth.value(w) + penalty.value(w);

    let mut x = w0;
    let mut fx = finite("initial objective", objective(&x))?;
    let mut trace = vec![fx];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut lip = config.l0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        let grad = smooth.gradient(&y);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical(format!("gradient not finite at iteration {iterations}")));
        }

        let z = loop {
            let step = 1.0 / lip;
            let z = penalty.prox(&(&y - &(&grad * step)), step);
            let delta = &z - &y;
            let lhs = smooth.bregman(&y, &grad, &delta);
            if lhs <= 0.5 * lip * frob_sq(&delta) {
                break z;
            }
            lip *= config.backtrack_factor;
            if !lip.is_finite() {
                return Err(Error::Numerical("Lipschitz estimate overflowed".into()));
            }
        };

        let fz = finite("objective", objective(&z))?;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let change = (fz - fx).abs();
        let scale = fx.abs().max(f64::MIN_POSITIVE);

        let (x_next, f_next) = if fz <= fx { (z.clone(), fz) } else { (x.clone(), fx) };
        // y = x_next + (t / t_next)(z - x_next) + ((t - 1) / t_next)(x_next - x)
        y = &x_next + &((&z - &x_next) * (t / t_next)) + &((&x_next - &x) * ((t - 1.0) / t_next));
        x = x_next;
        fx = f_next;
        t = t_next;
        trace.push(fx);

        if change <= config.rel_tol * scale {
            converged = true;
            break;
        }
    }

    Ok(FistaOutput {
        w: x,
        objective_trace: trace,
        iterations,
        converged,
        lipschitz: lip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::smooth::Quadratic;
    use ndarray::{array, Array1};

    fn identity_problem(target: &Array2<f64>) -> Quadratic {
        let d = target.nrows();
        let x = Array2::eye(d);
        Quadratic::weighted_least_squares(x.view(), target.view(), Array1::ones(d).view())
    }

    #[test]
    fn identity_design_lasso_is_soft_threshold() {
        let target = array![[1.3, -0.2], [0.05, -2.0], [0.7, 0.0]];
        let q = identity_problem(&target);
        let cfg = SolverConfig {
            rel_tol: 1e-14,
            ..SolverConfig::default()
        };
        let out = fista_solve(&q, &Penalty::L1(0.4), Array2::zeros((3, 2)), &cfg).unwrap();
        let expected = crate::solvers::prox_l1(&target, 0.4).unwrap();
        assert!((&out.w - &expected).iter().all(|v| v.abs() < 1e-9), "{:?}", out.w);
    }

    #[test]
    fn stationary_start_stops_immediately() {
        let target = array![[1.3, -0.2], [0.05, -2.0]];
        let q = identity_problem(&target);
        let solution = crate::solvers::prox_l1(&target, 0.4).unwrap();
        let out = fista_solve(&q, &Penalty::L1(0.4), solution, &SolverConfig::default()).unwrap();
        assert!(out.iterations <= 2);
        assert!(out.converged);
    }

    #[test]
    fn trace_never_increases() {
        let x = array![[1.0, 0.3, 0.0], [0.2, 1.5, -0.4], [0.0, -0.7, 2.0], [1.0, 1.0, 1.0]];
        let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        let q = Quadratic::weighted_least_squares(x.view(), y.view(), Array1::ones(4).view());
        let out = fista_solve(&q, &Penalty::L1(0.05), Array2::zeros((3, 2)), &SolverConfig::default()).unwrap();
        for w in out.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
        assert!(out.converged);
    }

    #[test]
    fn bad_config_rejected() {
        let q = identity_problem(&array![[1.0]]);
        let cfg = SolverConfig {
            l0: 0.0,
            ..SolverConfig::default()
        };
        assert!(fista_solve(&q, &Penalty::Zero, Array2::zeros((1, 1)), &cfg).is_err());
        assert!(fista_solve(&q, &Penalty::Zero, Array2::zeros((2, 1)), &SolverConfig::default()).is_err());
    }

    #[test]
    fn non_finite_input_is_numerical_error() {
        let q = identity_problem(&array![[f64::NAN]]);
        let err = fista_solve(&q, &Penalty::Zero, Array2::zeros((1, 1)), &SolverConfig::default()).unwrap_err();
        assert!(err.is_numerical());
    }
}
