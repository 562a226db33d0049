//! Order-statistic selection and the self-scaling transform.
//!
//! Convention: `X_{n-m:n}` is the `(m+1)`-th largest value of a column, so
//! `m = 0` is the maximum. Ties are kept as duplicates.

use std::cmp::Ordering;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

fn descending(a: &f64, b: &f64) -> Ordering {
    b.total_cmp(a)
}

/// `(m+1)`-th largest element of `buf`, reordering `buf` in place.
///
/// Uses introselect: expected linear time, deterministic for a given input.
pub fn select_upper(buf: &mut [f64], m: usize) -> Result<f64> {
    if m >= buf.len() {
        return Err(Error::RankOutOfRange {
            rank: m,
            len: buf.len(),
        });
    }
    let (_, v, _) = buf.select_nth_unstable_by(m, descending);
    Ok(*v)
}

/// `X_{n-m:n}` of `column`: the `(m+1)`-th largest value.
pub fn upper_order_stat(column: &[f64], m: usize) -> Result<f64> {
    select_upper(&mut column.to_vec(), m)
}

/// Columns divided by their own `X_{n-k*:n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
    scale_denominators: Vec<f64>,
    k_star: usize,
}

impl ScaledMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k_star(&self) -> usize {
        self.k_star
    }

    pub fn scale_denominators(&self) -> &[f64] {
        &self.scale_denominators
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    /// Builds a scaled matrix directly from already-scaled columns, with unit
    /// denominators.
    pub fn from_scaled_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let data = DataMatrix::from_columns(columns)?;
        let n = data.n();
        let p = data.p();
        Ok(Self {
            values: data.columns().flatten().copied().collect(),
            n,
            p,
            scale_denominators: vec![1.0; p],
            k_star: 0,
        })
    }
}

/// `Y_i^(j) = X_i^(j) / X_{n-k*:n}^(j)` for every entry.
pub fn self_scale(data: &DataMatrix, k_star: usize) -> Result<ScaledMatrix> {
    let n = data.n();
    if k_star > n - 1 {
        return Err(Error::RankOutOfRange { rank: k_star, len: n });
    }
    let mut values = Vec::with_capacity(n * data.p());
    let mut denominators = Vec::with_capacity(data.p());
    let mut buf = vec![0.0; n];
    for (j, col) in data.columns().enumerate() {
        buf.copy_from_slice(col);
        let d = select_upper(&mut buf, k_star)?;
        if d <= 0.0 {
            return Err(Error::NonpositiveThreshold {
                column: j + 1,
                value: d,
            });
        }
        values.extend(col.iter().map(|x| x / d));
        denominators.push(d);
    }
    Ok(ScaledMatrix {
        values,
        n,
        p: data.p(),
        scale_denominators: denominators,
        k_star,
    })
}

/// The `rank_from_top`-th largest (1 = maximum) of all scaled entries in the
/// `active` columns (0-based indices).
pub fn pooled_upper_order_stat(
    scaled: &ScaledMatrix,
    active: &[usize],
    rank_from_top: usize,
) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let len = scaled.n * active.len();
    if rank_from_top == 0 || rank_from_top > len {
        return Err(Error::RankOutOfRange {
            rank: rank_from_top,
            len,
        });
    }
    let mut pool = Vec::with_capacity(len);
    for &j in active {
        if j >= scaled.p {
            return Err(Error::InvalidData(format!("column {} out of range", j + 1)));
        }
        pool.extend_from_slice(scaled.column(j));
    }
    select_upper(&mut pool, rank_from_top - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted_desc(v: &[f64]) -> Vec<f64> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    #[test]
    fn upper_order_stat_examples() {
        assert_eq!(upper_order_stat(&[3.0, 1.0, 2.0], 0).unwrap(), 3.0);
        assert_eq!(upper_order_stat(&[3.0, 1.0, 2.0], 2).unwrap(), 1.0);
        assert_eq!(upper_order_stat(&[5.0, 5.0, 1.0, 2.0], 1).unwrap(), 5.0);
        assert!(matches!(
            upper_order_stat(&[1.0, 2.0], 2),
            Err(Error::RankOutOfRange { rank: 2, len: 2 })
        ));
    }

    #[test]
    fn self_scale_examples() {
        let data = DataMatrix::from_columns(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0, 100.0]]).unwrap();
        let s = self_scale(&data, 4).unwrap();
        assert_eq!(s.scale_denominators(), &[2.0]);
        assert_eq!(s.column(0), &[0.5, 1.0, 1.5, 2.0, 2.5, 50.0]);

        let ones = DataMatrix::from_columns(vec![vec![1.0; 5]]).unwrap();
        assert_eq!(self_scale(&ones, 2).unwrap().column(0), &[1.0; 5]);

        assert!(self_scale(&data, 6).is_err());
    }

    #[test]
    fn self_scale_rejects_nonpositive_threshold() {
        let data = DataMatrix::from_columns(vec![
            vec![1.0, 2.0, 3.0, 4.0],
            vec![-1.0, 0.0, 0.0, 4.0],
        ])
        .unwrap();
        assert!(matches!(
            self_scale(&data, 2),
            Err(Error::NonpositiveThreshold { column: 2, .. })
        ));
    }

    #[test]
    fn pooled_examples() {
        let s = ScaledMatrix::from_scaled_columns(vec![
            vec![0.5, 1.0, 1.5, 2.0, 2.5, 50.0],
            vec![0.8333, 1.0, 1.1667, 1.3333, 1.5, 1.5833],
        ])
        .unwrap();
        assert_eq!(pooled_upper_order_stat(&s, &[0], 1).unwrap(), 50.0);
        assert_eq!(pooled_upper_order_stat(&s, &[0, 1], 4).unwrap(), 1.5833);
        assert_eq!(pooled_upper_order_stat(&s, &[0, 1], 12).unwrap(), 0.5);
        assert!(pooled_upper_order_stat(&s, &[], 1).is_err());
        assert!(pooled_upper_order_stat(&s, &[0, 1], 13).is_err());
        assert!(pooled_upper_order_stat(&s, &[0, 1], 0).is_err());
    }

    proptest! {
        #[test]
        fn selection_matches_full_sort(v in prop::collection::vec(
            prop_oneof![-100i32..100, 0i32..4].prop_map(|x| x as f64 * 0.5), 1..60),
            frac in 0.0f64..1.0) {
            let m = ((v.len() as f64) * frac) as usize;
            let m = m.min(v.len() - 1);
            prop_assert_eq!(upper_order_stat(&v, m).unwrap(), sorted_desc(&v)[m]);
        }

        #[test]
        fn self_scale_is_scale_equivariant(col in prop::collection::vec(0.01f64..1e3, 5..40),
                                           c in prop::sample::select(vec![0.25, 2.0, 8.0, 1024.0])) {
            // powers of two keep the products exact
            let data = DataMatrix::from_columns(vec![col.clone()]).unwrap();
            let scaled_data = DataMatrix::from_columns(vec![col.iter().map(|x| x * c).collect()]).unwrap();
            let a = self_scale(&data, 3).unwrap();
            let b = self_scale(&scaled_data, 3).unwrap();
            prop_assert_eq!(a.column(0), b.column(0));
        }

        #[test]
        fn pooled_is_monotone_in_rank(cols in prop::collection::vec(
            prop::collection::vec(0.01f64..10.0, 6), 1..5)) {
            let s = ScaledMatrix::from_scaled_columns(cols.clone()).unwrap();
            let active: Vec<usize> = (0..cols.len()).collect();
            let max = cols.iter().flatten().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(pooled_upper_order_stat(&s, &active, 1).unwrap(), max);
            let mut prev = f64::INFINITY;
            for r in 1..=6 * cols.len() {
                let v = pooled_upper_order_stat(&s, &active, r).unwrap();
                prop_assert!(v <= prev);
                prev = v;
            }
        }
    }
}
