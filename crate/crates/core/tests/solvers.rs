use egmtl::design::{Reliability, StackedDesign, TaskGraph};
use egmtl::rng::substream;
use egmtl::solvers::{fit, objective_egmtl, FitResult, ModelSpec, SolverConfig};
use nalgebra::DMatrix;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

fn even_rows(n: usize, r: usize) -> Vec<std::ops::Range<usize>> {
    (0..r).map(|t| t * n / r..(t + 1) * n / r).collect()
}

/// One-hot crowd labels, an expert block and a complete graph.
fn classification_design(seed: u64, n: usize, d: usize, r: usize, c: usize, weights: Vec<f64>) -> StackedDesign {
    let mut rng = substream(seed, "tests.design", &[]);
    let x = gaussian(&mut rng, n, d);
    let rows = even_rows(n, r);
    let mut y = Array2::zeros((n, r * c));
    for (t, range) in rows.iter().enumerate() {
        for i in range.clone() {
            y[[i, t * c + rng.random_range(0..c)]] = 1.0;
        }
    }
    let ne = 3 * d;
    let p = gaussian(&mut rng, ne, d);
    let mut v = Array2::zeros((ne, r * c));
    for i in 0..ne {
        v[[i, (i % r) * c + rng.random_range(0..c)]] = 1.0;
    }
    StackedDesign::new(x, y, r, c, rows)
        .unwrap()
        .with_expert(p, v)
        .unwrap()
        .with_graph(&TaskGraph::complete(r, 1.0))
        .unwrap()
        .with_reliability(&Reliability::PerWorker(weights))
        .unwrap()
}

fn tight() -> SolverConfig {
    SolverConfig {
        max_iter: 200_000,
        rel_tol: 1e-16,
        ..SolverConfig::default()
    }
}

fn rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let num = (a - b).iter().map(|v| v * v).sum::<f64>().sqrt();
    let den = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Multiplying the crowd loss (through its row weights) and all three
    /// penalty weights by one constant scales the objective and leaves the
    /// minimizer alone.
    #[test]
    fn common_scaling_keeps_argmin(seed in 0u64..1000, scale in 0.1f64..20.0, l1 in 0.05f64..2.0, l2 in 0.05f64..2.0, l3 in 0.05f64..2.0) {
        let n = 36;
        let mut rng = substream(seed, "tests.weights", &[]);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let base = classification_design(seed, n, 5, 3, 2, u.clone());
        let scaled = base.clone().with_reliability(&Reliability::PerWorker(u.iter().map(|w| w * scale).collect())).unwrap();
        let a = fit(&ModelSpec::EgMtl { lambda1: l1, lambda2: l2, lambda3: l3 }, &base, &tight()).unwrap();
        let b = fit(&ModelSpec::EgMtl { lambda1: scale * l1, lambda2: scale * l2, lambda3: scale * l3 }, &scaled, &tight()).unwrap();
        let fa = objective_egmtl(&a.w, &base, l1, l2, l3).unwrap();
        let fb = objective_egmtl(&a.w, &scaled, scale * l1, scale * l2, scale * l3).unwrap();
        prop_assert!((fb - scale * fa).abs() <= 1e-9 * fb.abs());
        if a.w.iter().any(|v| *v != 0.0) {
            prop_assert!(rel_diff(&b.w, &a.w) < 1e-6, "relative difference {}", rel_diff(&b.w, &a.w));
        } else {
            prop_assert!(b.w.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn decomposed_fits_add_up(seed in 0u64..1000, rho1 in 0.1f64..3.0, rho2 in 0.1f64..3.0) {
        let design = classification_design(seed, 30, 4, 3, 2, vec![1.0; 30]);
        for spec in [ModelSpec::DirtyMtl { rho1, rho2 }, ModelSpec::RobustMtl { rho1, rho2 }] {
            let result = fit(&spec, &design, &SolverConfig::default()).unwrap();
            let sum = result.shared_part.unwrap() + result.sparse_part.unwrap();
            prop_assert_eq!(sum, result.w);
        }
    }
}

fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// As the expert weight grows with no other regularizer, the fit tends to
/// the least-squares solution of the expert rows alone.
#[test]
fn heavy_expert_weight_reaches_expert_least_squares() {
    let design = classification_design(7, 60, 6, 3, 2, vec![1.0; 60]);
    let ex = design.expert.as_ref().unwrap();
    let oracle = to_na(&ex.p).svd(true, true).solve(&to_na(&ex.v), 1e-12).unwrap();
    let oracle = Array2::from_shape_fn(oracle.shape(), |(i, j)| oracle[(i, j)]);
    let mut errors = Vec::new();
    for lambda1 in [1e1, 1e3, 1e5] {
        let result = fit(&ModelSpec::EgMtl { lambda1, lambda2: 0.0, lambda3: 0.0 }, &design, &tight()).unwrap();
        errors.push(rel_diff(&result.w, &oracle));
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[2] < 1e-3, "{errors:?}");
}

fn column_norms(w: &Array2<f64>) -> Vec<f64> {
    w.columns().into_iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

/// Three tasks draw on the same three features, the fourth on the other
/// three. The row-grouped part of robust_mtl should carry the common
/// features and the column-grouped part the odd task.
#[test]
fn robust_mtl_isolates_outlier_task() {
    let (n_per, d, r) = (40, 6, 4);
    let mut rng = substream(3, "tests.outlier", &[]);
    let x = gaussian(&mut rng, n_per * r, d);
    let mut y = Array2::zeros((n_per * r, r));
    for t in 0..r {
        let features = if t == r - 1 { 3..6 } else { 0..3 };
        for i in t * n_per..(t + 1) * n_per {
            let noise: f64 = rng.sample(StandardNormal);
            y[[i, t]] = features.clone().map(|k| x[[i, k]]).sum::<f64>() + 0.1 * noise;
        }
    }
    let design = StackedDesign::new(x, y, r, 1, even_rows(n_per * r, r)).unwrap();
    let result: FitResult = fit(&ModelSpec::RobustMtl { rho1: 2.0, rho2: 2.6 }, &design, &tight()).unwrap();
    let outlier = column_norms(result.sparse_part.as_ref().unwrap());
    let odd = outlier[r - 1];
    assert!(odd > 0.0, "{outlier:?}");
    for norm in &outlier[..r - 1] {
        assert!(*norm < 0.1 * odd, "{outlier:?}");
    }
    let shared = result.shared_part.as_ref().unwrap();
    let rows: Vec<f64> = shared.rows().into_iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let weakest_common = rows[..3].iter().copied().fold(f64::INFINITY, f64::min);
    let strongest_odd = rows[3..].iter().copied().fold(0.0, f64::max);
    assert!(strongest_odd < 0.25 * weakest_common, "shared row norms {rows:?}");
}
