use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An undirected relatedness edge between tasks `i` and `j` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskGraph {
    pub edges: Vec<Edge>,
}

impl TaskGraph {
    pub fn new(edges: Vec<Edge>) -> Result<Self> {
        let g = TaskGraph { edges };
        g.validate()?;
        Ok(g)
    }

    pub fn empty() -> Self {
        TaskGraph::default()
    }

    /// Every pair of the `r` tasks related with weight `gamma`.
    pub fn complete(r: usize, gamma: f64) -> Self {
        let mut edges = Vec::with_capacity(r * r.saturating_sub(1) / 2);
        for i in 1..=r {
            for j in i + 1..=r {
                edges.push(Edge { i, j, gamma });
            }
        }
        TaskGraph { edges }
    }

    /// Cliques over the given groups of tasks, e.g. high- and low-arousal clips.
    pub fn cliques(groups: &[Vec<usize>], gamma: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for g in groups {
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    edges.push(Edge { i, j, gamma });
                }
            }
        }
        Self::new(edges)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.edges {
            if e.i == 0 || e.j == 0 {
                return Err(Error::invalid("task indices in graph edges are 1-based"));
            }
            if e.i == e.j {
                return Err(Error::invalid(format!("self-loop on task {}", e.i)));
            }
            if !(e.gamma > 0.0 && e.gamma.is_finite()) {
                return Err(Error::invalid(format!("edge ({}, {}) has non-positive weight {}", e.i, e.j, e.gamma)));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(Error::invalid(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let g: TaskGraph = serde_json::from_str(&text)?;
        g.validate()?;
        Ok(g)
    }
}

/// Edge-vertex incidence matrix over the `r * c` weight columns.
///
/// Each task edge `(i, j, gamma)` becomes `c` rows, one per class, holding
/// `+gamma` in column `(i-1)*c + k` and `-gamma` in column `(j-1)*c + k`, so
/// only same-class columns of related tasks are pulled together.
pub fn build_incidence(graph: &TaskGraph, r: usize, c: usize) -> Result<Array2<f64>> {
    graph.validate()?;
    let mut e = Array2::zeros((graph.edges.len() * c, r * c));
    for (q, edge) in graph.edges.iter().enumerate() {
        if edge.i > r || edge.j > r {
            return Err(Error::invalid(format!(
                "edge ({}, {}) references a task outside 1..={r}",
                edge.i, edge.j
            )));
        }
        for k in 0..c {
            let row = q * c + k;
            e[[row, (edge.i - 1) * c + k]] = edge.gamma;
            e[[row, (edge.j - 1) * c + k]] = -edge.gamma;
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_edge_single_class() {
        let g = TaskGraph::new(vec![Edge { i: 1, j: 2, gamma: 1.0 }]).unwrap();
        assert_eq!(build_incidence(&g, 2, 1).unwrap(), array![[1.0, -1.0]]);
    }

    #[test]
    fn class_aligned_expansion() {
        let g = TaskGraph::new(vec![Edge { i: 1, j: 2, gamma: 1.0 }]).unwrap();
        assert_eq!(
            build_incidence(&g, 2, 2).unwrap(),
            array![[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]]
        );
    }

    #[test]
    fn empty_graph_has_no_rows() {
        let e = build_incidence(&TaskGraph::empty(), 3, 2).unwrap();
        assert_eq!(e.dim(), (0, 6));
        let w = Array2::<f64>::ones((4, 6));
        assert_eq!(e.dot(&w.t()).iter().map(|x| x * x).sum::<f64>(), 0.0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(TaskGraph::new(vec![Edge { i: 1, j: 1, gamma: 1.0 }]).is_err());
        assert!(TaskGraph::new(vec![Edge { i: 1, j: 2, gamma: 0.0 }]).is_err());
        assert!(TaskGraph::new(vec![Edge { i: 1, j: 2, gamma: 1.0 }, Edge { i: 2, j: 1, gamma: 2.0 }]).is_err());
        let g = TaskGraph::new(vec![Edge { i: 1, j: 3, gamma: 1.0 }]).unwrap();
        assert!(build_incidence(&g, 2, 1).is_err());
    }

    #[test]
    fn rows_carry_plus_minus_gamma() {
        let g = TaskGraph::complete(4, 0.5);
        let e = build_incidence(&g, 4, 3).unwrap();
        assert_eq!(e.nrows(), 6 * 3);
        for row in e.rows() {
            let nz: Vec<f64> = row.iter().copied().filter(|v| *v != 0.0).collect();
            assert_eq!(nz.len(), 2);
            assert_eq!(nz.iter().sum::<f64>(), 0.0);
            assert!(nz.iter().all(|v| v.abs() == 0.5));
        }
    }

    #[test]
    fn penalty_equals_column_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (r, c, d) = (4, 3, 5);
        let g = TaskGraph::new(vec![
            Edge { i: 1, j: 2, gamma: 1.0 },
            Edge { i: 1, j: 4, gamma: 2.0 },
            Edge { i: 3, j: 2, gamma: 0.5 },
        ])
        .unwrap();
        let e = build_incidence(&g, r, c).unwrap();
        for _ in 0..10 {
            let w = Array2::from_shape_fn((d, r * c), |_| rng.random_range(-1.0..1.0));
            let via_e: f64 = e.dot(&w.t()).iter().map(|x| x * x).sum();
            let mut direct = 0.0;
            for edge in &g.edges {
                for k in 0..c {
                    let a = w.column((edge.i - 1) * c + k);
                    let b = w.column((edge.j - 1) * c + k);
                    let diff: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                    direct += edge.gamma * edge.gamma * diff;
                }
            }
            assert!((via_e - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }
}
