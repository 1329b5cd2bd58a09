//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature and `jobs > 1` the items are mapped on a
//! dedicated rayon pool of `jobs` threads; otherwise they are mapped in
//! sequence. Results come back in input order either way, so anything
//! reduced from them is independent of scheduling.

/// Worker count for [`map`]. `0` means "all available cores".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jobs(pub usize);

impl Default for Jobs {
    fn default() -> Self {
        Jobs(1)
    }
}

impl Jobs {
    pub fn sequential() -> Self {
        Jobs(1)
    }

    pub fn is_sequential(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(jobs: Jobs, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    if jobs.is_sequential() || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.0)
        .build()
        .expect("failed to build rayon thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(_jobs: Jobs, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let items: Vec<u64> = (0..200).collect();
        let seq = map(Jobs(1), &items, |x| x * x + 1);
        let par = map(Jobs(4), &items, |x| x * x + 1);
        assert_eq!(seq, par);
        assert_eq!(seq[10], 101);
    }
}
