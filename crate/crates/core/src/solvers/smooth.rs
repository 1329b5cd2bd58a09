use ndarray::{s, Array2, ArrayView2, Axis};

/// Differentiable part of a composite objective.
pub trait SmoothLoss: Send + Sync {
    fn value(&self, w: &Array2<f64>) -> f64;

    fn gradient(&self, w: &Array2<f64>) -> Array2<f64>;

    /// `f(y + delta) - f(y) - <grad_y, delta>`, the quantity the line search
    /// compares against `L/2 * |delta|^2`.
    fn bregman(&self, y: &Array2<f64>, grad_y: &Array2<f64>, delta: &Array2<f64>) -> f64 {
        let z = y + delta;
        self.value(&z) - self.value(y) - frob_dot(grad_y, delta)
    }

    /// Shape of the optimization variable.
    fn shape(&self) -> (usize, usize);
}

pub fn frob_dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// `f(W) = 1/2 sum_b tr(W_b' A_b W_b) + 1/2 tr(W K W') - tr(W' B) + c`
///
/// `W_b` are consecutive column blocks of equal width sharing nothing but
/// `K`; with a single block `A` acts on every column. Every smooth term in
/// the model zoo (weighted least squares, expert loss, ridge, graph
/// Laplacian) folds into this form, so gradients and line-search curvature
/// are evaluated on `D x D` and `RC x RC` Gram matrices instead of the raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    left: Vec<Array2<f64>>,
    block_width: usize,
    right: Option<Array2<f64>>,
    linear: Array2<f64>,
    constant: f64,
}

impl Quadratic {
    /// A zero quadratic over `d x cols` variables with one shared left block.
    pub fn zero(d: usize, cols: usize) -> Self {
        Quadratic {
            left: vec![Array2::zeros((d, d))],
            block_width: cols,
            right: None,
            linear: Array2::zeros((d, cols)),
            constant: 0.0,
        }
    }

    /// Weighted least squares `1/2 |U^(1/2) (Y - X W)|_F^2`.
    pub fn weighted_least_squares(x: ArrayView2<f64>, y: ArrayView2<f64>, u: ndarray::ArrayView1<f64>) -> Self {
        let ux = &x * &u.view().insert_axis(Axis(1));
        let a = x.t().dot(&ux);
        let b = ux.t().dot(&y);
        let constant = 0.5
            * y.rows()
                .into_iter()
                .zip(u.iter())
                .map(|(row, w)| w * row.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>();
        Quadratic {
            left: vec![a],
            block_width: y.ncols(),
            right: None,
            linear: b,
            constant,
        }
    }

    /// Independent least-squares losses per column block: block `t` sees
    /// only its own rows. `blocks[t] = (X_t, Y_t, u_t)` with `Y_t` of width `c`.
    pub fn blockwise_least_squares(
        blocks: &[(ArrayView2<f64>, ArrayView2<f64>, ndarray::ArrayView1<f64>)],
        c: usize,
    ) -> Self {
        let d = blocks.first().map_or(0, |b| b.0.ncols());
        let mut linear = Array2::zeros((d, blocks.len() * c));
        let mut left = Vec::with_capacity(blocks.len());
        let mut constant = 0.0;
        for (t, (x, y, u)) in blocks.iter().enumerate() {
            let q = Quadratic::weighted_least_squares(x.view(), y.view(), u.view());
            linear.slice_mut(s![.., t * c..(t + 1) * c]).assign(&q.linear);
            left.push(q.left.into_iter().next().expect("one block"));
            constant += q.constant;
        }
        Quadratic {
            left,
            block_width: c,
            right: None,
            linear,
            constant,
        }
    }

    /// Adds `weight * |V - P W|_F^2`.
    pub fn add_squared_residual(&mut self, p: ArrayView2<f64>, v: ArrayView2<f64>, weight: f64) {
        if weight == 0.0 {
            return;
        }
        let ptp = p.t().dot(&p) * (2.0 * weight);
        for a in &mut self.left {
            *a += &ptp;
        }
        self.linear.scaled_add(2.0 * weight, &p.t().dot(&v));
        self.constant += weight * v.iter().map(|x| x * x).sum::<f64>();
    }

    /// Adds `weight * |W|_F^2`.
    pub fn add_ridge(&mut self, weight: f64) {
        if weight == 0.0 {
            return;
        }
        for a in &mut self.left {
            for i in 0..a.nrows() {
                a[[i, i]] += 2.0 * weight;
            }
        }
    }

    /// Adds `weight * |E W'|_F^2 = weight * tr(W E'E W')`.
    pub fn add_graph(&mut self, e: ArrayView2<f64>, weight: f64) {
        if weight == 0.0 || e.nrows() == 0 {
            return;
        }
        let k = e.t().dot(&e) * (2.0 * weight);
        match &mut self.right {
            Some(r) => *r += &k,
            None => self.right = Some(k),
        }
    }

    /// Multiplies the whole function by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.left {
            *a *= factor;
        }
        if let Some(r) = &mut self.right {
            *r *= factor;
        }
        self.linear *= factor;
        self.constant *= factor;
    }

    fn apply_left(&self, w: &Array2<f64>) -> Array2<f64> {
        if self.left.len() == 1 {
            return self.left[0].dot(w);
        }
        let mut out = Array2::zeros(w.raw_dim());
        let bw = self.block_width;
        for (t, a) in self.left.iter().enumerate() {
            let cols = s![.., t * bw..(t + 1) * bw];
            out.slice_mut(cols).assign(&a.dot(&w.slice(cols)));
        }
        out
    }

    /// `A W + W K`, the Hessian applied to `w`.
    fn hessian_apply(&self, w: &Array2<f64>) -> Array2<f64> {
        let mut h = self.apply_left(w);
        if let Some(k) = &self.right {
            h += &w.dot(k);
        }
        h
    }
}

impl SmoothLoss for Quadratic {
    fn value(&self, w: &Array2<f64>) -> f64 {
        let h = self.hessian_apply(w);
        0.5 * frob_dot(w, &h) - frob_dot(w, &self.linear) + self.constant
    }

    fn gradient(&self, w: &Array2<f64>) -> Array2<f64> {
        self.hessian_apply(w) - &self.linear
    }

    fn bregman(&self, _y: &Array2<f64>, _grad_y: &Array2<f64>, delta: &Array2<f64>) -> f64 {
        0.5 * frob_dot(delta, &self.hessian_apply(delta))
    }

    fn shape(&self) -> (usize, usize) {
        self.linear.dim()
    }
}

/// Loss over a stacked pair `[S | Q]` that depends only on `S + Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumOfParts<L> {
    pub inner: L,
}

impl<L: SmoothLoss> SumOfParts<L> {
    pub fn combine(&self, z: &Array2<f64>) -> Array2<f64> {
        let cols = self.inner.shape().1;
        &z.slice(s![.., ..cols]) + &z.slice(s![.., cols..])
    }
}

impl<L: SmoothLoss> SmoothLoss for SumOfParts<L> {
    fn value(&self, z: &Array2<f64>) -> f64 {
        self.inner.value(&self.combine(z))
    }

    fn gradient(&self, z: &Array2<f64>) -> Array2<f64> {
        let g = self.inner.gradient(&self.combine(z));
        ndarray::concatenate![Axis(1), g, g]
    }

    fn bregman(&self, y: &Array2<f64>, _grad_y: &Array2<f64>, delta: &Array2<f64>) -> f64 {
        let yc = self.combine(y);
        let dc = self.combine(delta);
        let g = self.inner.gradient(&yc);
        self.inner.bregman(&yc, &g, &dc)
    }

    fn shape(&self) -> (usize, usize) {
        let (d, cols) = self.inner.shape();
        (d, 2 * cols)
    }
}
