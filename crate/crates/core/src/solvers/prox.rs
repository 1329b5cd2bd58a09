//! Proximal operators of the penalties used by the model zoo.
//!
//! `prox_{tau*g}(v) = argmin_x 1/2 |x - v|^2 + tau * g(x)`.

use ndarray::{s, Array2, ArrayView1, ArrayViewMut1, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Non-smooth part of a composite objective, weight included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Penalty {
    Zero,
    /// `weight * sum |w_ij|`
    L1(f64),
    /// `weight * sum_rows |row|_2`
    L21Rows(f64),
    /// `weight * sum_cols |col|_2`
    L21Cols(f64),
    /// `weight * sum_rows max_j |w_ij|`
    LinfRows(f64),
    /// Separate penalties on the columns before and after `at`.
    Split {
        at: usize,
        left: Box<Penalty>,
        right: Box<Penalty>,
    },
}

impl Penalty {
    pub fn value(&self, w: &Array2<f64>) -> f64 {
        match self {
            Penalty::Zero => 0.0,
            Penalty::L1(a) => a * w.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::L21Rows(a) => a * w.rows().into_iter().map(|r| norm2(r)).sum::<f64>(),
            Penalty::L21Cols(a) => a * w.columns().into_iter().map(|c| norm2(c)).sum::<f64>(),
            Penalty::LinfRows(a) => {
                a * w
                    .rows()
                    .into_iter()
                    .map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
                    .sum::<f64>()
            }
            Penalty::Split { at, left, right } => {
                left.value(&w.slice(s![.., ..*at]).to_owned()) + right.value(&w.slice(s![.., *at..]).to_owned())
            }
        }
    }

    /// `prox_{step * self}(v)`.
    pub fn prox(&self, v: &Array2<f64>, step: f64) -> Array2<f64> {
        let mut out = v.clone();
        self.prox_in_place(&mut out, step);
        out
    }

    fn prox_in_place(&self, m: &mut Array2<f64>, step: f64) {
        match self {
            Penalty::Zero => {}
            Penalty::L1(a) => soft_threshold_in_place(m, a * step),
            Penalty::L21Rows(a) => m.rows_mut().into_iter().for_each(|r| group_shrink(r, a * step)),
            Penalty::L21Cols(a) => m.columns_mut().into_iter().for_each(|c| group_shrink(c, a * step)),
            Penalty::LinfRows(a) => m.rows_mut().into_iter().for_each(|r| linf_prox(r, a * step)),
            Penalty::Split { at, left, right } => {
                let (mut l, mut r) = m.view_mut().split_at(Axis(1), *at);
                let mut lo = l.to_owned();
                left.prox_in_place(&mut lo, step);
                l.assign(&lo);
                let mut ro = r.to_owned();
                right.prox_in_place(&mut ro, step);
                r.assign(&ro);
            }
        }
    }

    /// Weights of the penalty must be finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        match self {
            Penalty::Zero => Ok(()),
            Penalty::L1(a) | Penalty::L21Rows(a) | Penalty::L21Cols(a) | Penalty::LinfRows(a) => check_tau(*a),
            Penalty::Split { left, right, .. } => {
                left.validate()?;
                right.validate()
            }
        }
    }
}

fn norm2(v: ArrayView1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold must be finite and >= 0, got {tau}")))
    }
}

fn soft_threshold_in_place(m: &mut Array2<f64>, tau: f64) {
    if tau == 0.0 {
        return;
    }
    m.mapv_inplace(|v| v.signum() * (v.abs() - tau).max(0.0));
}

fn group_shrink(mut g: ArrayViewMut1<f64>, tau: f64) {
    if tau == 0.0 {
        return;
    }
    let norm = norm2(g.view());
    if norm <= tau {
        g.fill(0.0);
    } else {
        g *= 1.0 - tau / norm;
    }
}

/// Prox of `tau * |.|_inf` by the Moreau decomposition: the row minus its
/// projection onto the l1 ball of radius `tau`.
fn linf_prox(mut row: ArrayViewMut1<f64>, tau: f64) {
    if tau == 0.0 {
        return;
    }
    let proj = project_l1_ball(row.view(), tau);
    row -= &proj;
}

/// Euclidean projection onto `{x : |x|_1 <= radius}` by sorting magnitudes.
pub fn project_l1_ball(v: ArrayView1<f64>, radius: f64) -> ndarray::Array1<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return v.to_owned();
    }
    if radius <= 0.0 {
        return ndarray::Array1::zeros(v.len());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (j + 1) as f64;
        if m - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// Element-wise soft thresholding `sign(m) * max(|m| - tau, 0)`.
pub fn prox_l1(m: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    check_tau(tau)?;
    Ok(Penalty::L1(1.0).prox(m, tau))
}

/// Row-wise group soft thresholding `r * max(1 - tau / |r|_2, 0)`.
pub fn prox_l21_rows(m: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    check_tau(tau)?;
    Ok(Penalty::L21Rows(1.0).prox(m, tau))
}

/// Row-wise prox of `tau * |r|_inf`.
pub fn prox_linf_rows(m: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    check_tau(tau)?;
    Ok(Penalty::LinfRows(1.0).prox(m, tau))
}
