use crate::{Error, Result};

/// Element-wise median across aligned rating vectors. With an even number of
/// raters the two middle values are averaged.
pub fn median_fuse<V: AsRef<[f64]>>(traces: &[V]) -> Result<Vec<f64>> {
    let first = traces
        .first()
        .ok_or_else(|| Error::invalid("median fusion needs at least one trace"))?;
    let len = first.as_ref().len();
    if let Some((i, t)) = traces.iter().enumerate().find(|(_, t)| t.as_ref().len() != len) {
        return Err(Error::dim(format!(
            "trace {i} has length {}, expected {len}",
            t.as_ref().len()
        )));
    }
    let m = traces.len();
    let mut column = vec![0.0; m];
    Ok((0..len)
        .map(|k| {
            for (c, t) in column.iter_mut().zip(traces) {
                *c = t.as_ref()[k];
            }
            column.sort_by(f64::total_cmp);
            if m % 2 == 1 {
                column[m / 2]
            } else {
                0.5 * (column[m / 2 - 1] + column[m / 2])
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_trace_is_identity() {
        let t = vec![0.1, -0.4, 0.9];
        assert_eq!(median_fuse(std::slice::from_ref(&t)).unwrap(), t);
    }

    #[test]
    fn median_ignores_outlier() {
        let out = median_fuse(&[vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 100.0]]).unwrap();
        assert_eq!(out[1], 2.0);
    }

    #[test]
    fn even_count_averages_middle() {
        let out = median_fuse(&[vec![0.0; 4], vec![2.0; 4]]).unwrap();
        assert_eq!(out, vec![1.0; 4]);
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(median_fuse::<Vec<f64>>(&[]).is_err());
        assert!(matches!(median_fuse(&[vec![0.0; 3], vec![0.0; 2]]), Err(Error::Dimension(_))));
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_bounded(
            rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 6), 1..7),
            rot in 0usize..7,
        ) {
            let fused = median_fuse(&rows).unwrap();
            let mut permuted = rows.clone();
            permuted.rotate_left(rot % rows.len());
            permuted.reverse();
            prop_assert_eq!(&fused, &median_fuse(&permuted).unwrap());
            for k in 0..6 {
                let lo = rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(fused[k] >= lo && fused[k] <= hi);
            }
        }
    }
}
