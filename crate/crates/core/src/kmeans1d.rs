//! Exact one-dimensional k-means.
//!
//! Optimal 1-D clusters are contiguous in sorted order, so the minimum
//! within-cluster sum of squares follows from a dynamic program over prefix
//! sums in `O(g·p²)`.

use crate::error::{Error, Result};

struct PrefixCost {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl PrefixCost {
    fn new(sorted: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(sorted.len() + 1);
        let mut sum_sq = Vec::with_capacity(sorted.len() + 1);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &v in sorted {
            sum.push(sum.last().unwrap() + v);
            sum_sq.push(sum_sq.last().unwrap() + v * v);
        }
        Self { sum, sum_sq }
    }

    /// Sum of squared deviations of `sorted[i..j]`.
    fn cost(&self, i: usize, j: usize) -> f64 {
        let m = (j - i) as f64;
        let s = self.sum[j] - self.sum[i];
        let c = self.sum_sq[j] - self.sum_sq[i] - s * s / m;
        c.max(0.0)
    }
}

/// Within-cluster sum of squares of `groups` over `values`.
pub fn within_cluster_ss(values: &[f64], groups: &[Vec<usize>]) -> f64 {
    groups
        .iter()
        .map(|g| {
            let mean = g.iter().map(|&j| values[j]).sum::<f64>() / g.len() as f64;
            g.iter().map(|&j| (values[j] - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Globally optimal partition of `values` into `g` clusters, ordered by
/// descending cluster sum. Indices inside a cluster are ascending.
pub fn kmeans_1d_exact(values: &[f64], g: usize) -> Result<Vec<Vec<usize>>> {
    let p = values.len();
    if g == 0 || g > p {
        return Err(Error::InvalidParams(format!(
            "number of clusters g = {g} must lie in 1..={p}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("k-means input must be finite".into()));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&j| values[j]).collect();
    let pc = PrefixCost::new(&sorted);

    // best[c][j]: min cost of the first j sorted values in c+1 clusters;
    // split[c][j]: start of the last cluster in that solution.
    let mut best = vec![vec![f64::INFINITY; p + 1]; g];
    let mut split = vec![vec![0usize; p + 1]; g];
    for j in 1..=p {
        best[0][j] = pc.cost(0, j);
    }
    for c in 1..g {
        for j in (c + 1)..=p {
            let mut b = f64::INFINITY;
            let mut arg = c;
            for i in c..j {
                let v = best[c - 1][i] + pc.cost(i, j);
                if v < b {
                    b = v;
                    arg = i;
                }
            }
            best[c][j] = b;
            split[c][j] = arg;
        }
    }

    let mut bounds = Vec::with_capacity(g);
    let mut j = p;
    for c in (0..g).rev() {
        let i = if c == 0 { 0 } else { split[c][j] };
        bounds.push((i, j));
        j = i;
    }
    let mut groups: Vec<(f64, Vec<usize>)> = bounds
        .into_iter()
        .map(|(i, j)| {
            let mut members = order[i..j].to_vec();
            members.sort_unstable();
            (sorted[i..j].iter().sum(), members)
        })
        .collect();
    groups.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1[0].cmp(&b.1[0])));
    Ok(groups.into_iter().map(|(_, m)| m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive minimum over all assignments of `values` to `g` non-empty clusters.
    fn brute_force_cost(values: &[f64], g: usize) -> f64 {
        let p = values.len();
        let mut labels = vec![0usize; p];
        let mut best = f64::INFINITY;
        loop {
            let mut groups = vec![Vec::new(); g];
            for (j, &l) in labels.iter().enumerate() {
                groups[l].push(j);
            }
            if groups.iter().all(|gr| !gr.is_empty()) {
                best = best.min(within_cluster_ss(values, &groups));
            }
            let mut pos = 0;
            loop {
                if pos == p {
                    return best;
                }
                labels[pos] += 1;
                if labels[pos] < g {
                    break;
                }
                labels[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn examples() {
        let v = [1.0, 1.1, 2.0, 2.1];
        assert_eq!(kmeans_1d_exact(&v, 2).unwrap(), vec![vec![2, 3], vec![0, 1]]);
        assert_eq!(kmeans_1d_exact(&v, 1).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(
            kmeans_1d_exact(&[0.3, 0.9, 0.1, 0.5], 4).unwrap(),
            vec![vec![1], vec![3], vec![0], vec![2]]
        );
        assert!(kmeans_1d_exact(&v, 5).is_err());
        assert!(kmeans_1d_exact(&v, 0).is_err());
    }

    #[test]
    fn matches_exhaustive_search() {
        let v = [0.91, 1.2, 0.33, 0.52, 0.49, 0.27, 1.05, 0.6];
        for g in 1..=4 {
            let groups = kmeans_1d_exact(&v, g).unwrap();
            let cost = within_cluster_ss(&v, &groups);
            assert!((cost - brute_force_cost(&v, g)).abs() < 1e-12, "g = {g}");
        }
    }

    #[test]
    fn matches_exhaustive_search_twelve_values() {
        let v = [
            0.21, 0.94, 0.35, 1.62, 0.27, 0.88, 1.41, 0.52, 0.19, 1.03, 0.61, 1.55,
        ];
        let groups = kmeans_1d_exact(&v, 3).unwrap();
        let cost = within_cluster_ss(&v, &groups);
        assert!((cost - brute_force_cost(&v, 3)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn optimal_against_exhaustive(v in prop::collection::vec(0.0f64..3.0, 1..9), g in 1usize..4) {
            let g = g.min(v.len());
            let groups = kmeans_1d_exact(&v, g).unwrap();
            prop_assert_eq!(groups.len(), g);
            let cost = within_cluster_ss(&v, &groups);
            prop_assert!((cost - brute_force_cost(&v, g)).abs() < 1e-9);
            let sums: Vec<f64> = groups.iter().map(|gr| gr.iter().map(|&j| v[j]).sum()).collect();
            prop_assert!(sums.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn beats_random_partitions(v in prop::collection::vec(0.0f64..3.0, 4..40),
                                   labels in prop::collection::vec(0usize..3, 40)) {
            let g = 3;
            let mut groups = vec![Vec::new(); g];
            for j in 0..v.len() {
                groups[labels[j]].push(j);
            }
            groups.retain(|gr| !gr.is_empty());
            let opt = kmeans_1d_exact(&v, groups.len()).unwrap();
            prop_assert!(within_cluster_ss(&v, &opt) <= within_cluster_ss(&v, &groups) + 1e-9);
        }
    }
}
