//! Hill estimation, the tail k-means baseline and group-level aggregation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans1d::kmeans_1d_exact;
use crate::order_stats::select_upper;
use crate::partition::TailPartition;

/// Description of the band produced by [`hill_ci`].
pub const HILL_CI_FORMULA: &str =
    "asymptotic normal: gamma_hat * (1 -/+ z_{(1+level)/2} / sqrt(k)), lower limit clipped at 0";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub gamma_hat: f64,
    pub k_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
}

/// `γ̂ = (1/k) Σ_{i=0}^{k-1} [log X_{n-i:n} - log X_{n-k:n}]`.
///
/// The top `k + 1` order statistics must be strictly positive. Errors name
/// column 1; [`hill_columns`] rewrites them with the actual column.
pub fn hill(column: &[f64], k: usize) -> Result<HillEstimate> {
    let n = column.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParams(format!(
            "Hill k = {k} must lie in 1..={}",
            n.saturating_sub(1)
        )));
    }
    let mut buf = column.to_vec();
    let base = select_upper(&mut buf, k)?;
    if base <= 0.0 {
        return Err(Error::NonpositiveOrderStat {
            column: 1,
            rank: k,
            value: base,
        });
    }
    let sum: f64 = buf[..k].iter().map(|&x| (x / base).ln()).sum();
    Ok(HillEstimate {
        gamma_hat: sum / k as f64,
        k_used: k,
        ci_low: None,
        ci_high: None,
    })
}

/// Hill estimate of every column with the same `k`.
pub fn hill_columns(data: &DataMatrix, k: usize) -> Result<Vec<HillEstimate>> {
    data.columns()
        .enumerate()
        .map(|(j, c)| {
            hill(c, k).map_err(|e| match e {
                Error::NonpositiveOrderStat { rank, value, .. } => Error::NonpositiveOrderStat {
                    column: j + 1,
                    rank,
                    value,
                },
                e => e,
            })
        })
        .collect()
}

/// Standard normal quantile.
pub fn normal_quantile(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u)
}

/// Attaches the band `γ̂·(1 ∓ z/√k)`, `z` the `(1+level)/2` normal quantile.
pub fn hill_ci(estimate: HillEstimate, level: f64) -> Result<HillEstimate> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} outside (0, 1)")));
    }
    if estimate.k_used == 0 {
        return Err(Error::InvalidParams("estimate has k_used = 0".into()));
    }
    let z = normal_quantile((1.0 + level) / 2.0);
    let half = estimate.gamma_hat * z / (estimate.k_used as f64).sqrt();
    Ok(HillEstimate {
        ci_low: Some((estimate.gamma_hat - half).max(0.0)),
        ci_high: Some(estimate.gamma_hat + half),
        ..estimate
    })
}

/// Hill estimates clustered by exact 1-D k-means into `g` groups, heaviest
/// group sum first.
pub fn tail_kmeans(data: &DataMatrix, g: usize, k: usize) -> Result<TailPartition> {
    let gammas: Vec<f64> = hill_columns(data, k)?.iter().map(|h| h.gamma_hat).collect();
    tail_kmeans_from_estimates(&gammas, g)
}

/// k-means step of [`tail_kmeans`] on precomputed estimates.
pub fn tail_kmeans_from_estimates(gammas: &[f64], g: usize) -> Result<TailPartition> {
    let groups = kmeans_1d_exact(gammas, g)?;
    TailPartition::new(groups, gammas.len())
}

/// Group-level indices obtained by averaging Hill estimates within groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupIndices {
    pub group_gammas: Vec<f64>,
    pub column_gammas: Vec<f64>,
}

/// Within-group mean of `raw`, broadcast back to every member column.
pub fn aggregate_by_partition(raw: &[f64], partition: &TailPartition) -> Result<GroupIndices> {
    if raw.len() != partition.p() {
        return Err(Error::DimensionMismatch {
            expected: partition.p(),
            found: raw.len(),
        });
    }
    let mut column_gammas = vec![0.0; raw.len()];
    let group_gammas = partition
        .groups()
        .iter()
        .map(|g| {
            let mean = g.iter().map(|&j| raw[j]).sum::<f64>() / g.len() as f64;
            for &j in g {
                column_gammas[j] = mean;
            }
            mean
        })
        .collect();
    Ok(GroupIndices {
        group_gammas,
        column_gammas,
    })
}

/// Hill estimates with `k_hill`, averaged within each group of `partition`.
pub fn estimate_group_indices(
    data: &DataMatrix,
    partition: &TailPartition,
    k_hill: usize,
) -> Result<GroupIndices> {
    if partition.p() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: partition.p(),
        });
    }
    let raw: Vec<f64> = hill_columns(data, k_hill)?.iter().map(|h| h.gamma_hat).collect();
    aggregate_by_partition(&raw, partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pareto_quantile_column(n: usize, gamma: f64) -> Vec<f64> {
        (1..=n)
            .map(|i| ((n + 1) as f64 / (n + 1 - i) as f64).powf(gamma))
            .collect()
    }

    #[test]
    fn hill_examples() {
        let e = std::f64::consts::E;
        let col = [0.5, e * e, 0.1, e, 1.0];
        assert!((hill(&col, 2).unwrap().gamma_hat - 1.5).abs() < 1e-15);
        assert_eq!(hill(&[3.0; 10], 4).unwrap().gamma_hat, 0.0);
        assert!(hill(&col, 5).is_err());
        assert!(hill(&col, 0).is_err());
        assert!(matches!(
            hill(&[-1.0, 0.0, 2.0], 1),
            Err(Error::NonpositiveOrderStat { .. })
        ));
    }

    #[test]
    fn hill_on_exact_pareto_quantiles() {
        // Brute-force evaluation on the explicit column (40 digits):
        // (1/10) Σ_{i=0}^{9} log(11/(i+1)) = 0.887454015490819…
        let col = pareto_quantile_column(100, 1.0);
        let h = hill(&col, 10).unwrap();
        assert!((h.gamma_hat - 0.887_454_015_490_819_0).abs() < 1e-13);
    }

    #[test]
    fn hill_converges_on_large_pareto_sample() {
        for gamma in [1.0, 0.5, 0.25] {
            let col = pareto_quantile_column(10_000, gamma);
            let h = hill(&col, 1000).unwrap().gamma_hat;
            assert!((h - gamma).abs() / gamma < 0.05, "gamma {gamma}: {h}");
        }
    }

    #[test]
    fn ci_examples() {
        let est = HillEstimate {
            gamma_hat: 1.0,
            k_used: 100,
            ci_low: None,
            ci_high: None,
        };
        let band = hill_ci(est, 0.95).unwrap();
        assert!((band.ci_low.unwrap() - (1.0 - 0.195_996_398_454_005_4)).abs() < 1e-9);
        assert!((band.ci_high.unwrap() - 1.195_996_398_454_005_4).abs() < 1e-9);

        let zero = hill_ci(HillEstimate { gamma_hat: 0.0, ..est }, 0.95).unwrap();
        assert_eq!((zero.ci_low, zero.ci_high), (Some(0.0), Some(0.0)));

        let narrow = hill_ci(est, 0.90).unwrap();
        let wide = hill_ci(est, 0.99).unwrap();
        assert!(wide.ci_low.unwrap() < narrow.ci_low.unwrap());
        assert!(wide.ci_high.unwrap() > narrow.ci_high.unwrap());

        assert!(hill_ci(est, 1.0).is_err());
        assert!(hill_ci(est, 0.0).is_err());
        // large z relative to sqrt(k) clips at zero
        let clipped = hill_ci(HillEstimate { k_used: 1, ..est }, 0.99).unwrap();
        assert_eq!(clipped.ci_low, Some(0.0));
    }

    #[test]
    fn tail_kmeans_examples() {
        let data = DataMatrix::from_columns(vec![
            pareto_quantile_column(100, 1.0),
            pareto_quantile_column(100, 0.25),
        ])
        .unwrap();
        assert_eq!(tail_kmeans(&data, 2, 10).unwrap().groups(), &[vec![0], vec![1]]);
        assert_eq!(tail_kmeans(&data, 1, 10).unwrap(), TailPartition::single(2));

        let dup = DataMatrix::from_columns(vec![
            pareto_quantile_column(100, 0.25),
            pareto_quantile_column(100, 1.0),
            pareto_quantile_column(100, 0.25),
        ])
        .unwrap();
        let part = tail_kmeans(&dup, 2, 10).unwrap();
        assert_eq!(part.groups(), &[vec![1], vec![0, 2]]);
    }

    #[test]
    fn aggregation_examples() {
        let whole = TailPartition::single(2);
        let g = aggregate_by_partition(&[1.0, 0.8], &whole).unwrap();
        assert!((g.group_gammas[0] - 0.9).abs() < 1e-15);
        assert_eq!(g.column_gammas, vec![g.group_gammas[0]; 2]);

        let singles = TailPartition::new(vec![vec![1], vec![0]], 2).unwrap();
        let g = aggregate_by_partition(&[1.0, 0.8], &singles).unwrap();
        assert_eq!(g.column_gammas, vec![1.0, 0.8]);

        let part = TailPartition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let g = aggregate_by_partition(&[1.2, 0.8, 0.3], &part).unwrap();
        assert!((g.group_gammas[0] - 1.0).abs() < 1e-15);
        assert_eq!(g.group_gammas[1], 0.3);
        assert_eq!(g.column_gammas, vec![g.group_gammas[0], g.group_gammas[0], 0.3]);
        assert!(aggregate_by_partition(&[1.0], &part).is_err());
    }

    proptest! {
        #[test]
        fn hill_is_scale_invariant(col in prop::collection::vec(0.01f64..100.0, 12..60),
                                   c in 0.001f64..1000.0) {
            let scaled: Vec<f64> = col.iter().map(|x| x * c).collect();
            let a = hill(&col, 10).unwrap().gamma_hat;
            let b = hill(&scaled, 10).unwrap().gamma_hat;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn aggregate_stays_within_group_range(raw in prop::collection::vec(0.0f64..2.0, 2..20),
                                              labels in prop::collection::vec(1usize..4, 20)) {
            let mut labels = labels[..raw.len()].to_vec();
            let mut used: Vec<usize> = labels.clone();
            used.sort_unstable();
            used.dedup();
            for l in labels.iter_mut() {
                *l = used.iter().position(|u| u == l).unwrap() + 1;
            }
            let part = TailPartition::from_labels(&labels).unwrap();
            let agg = aggregate_by_partition(&raw, &part).unwrap();
            for (l, g) in part.groups().iter().enumerate() {
                let lo = g.iter().map(|&j| raw[j]).fold(f64::INFINITY, f64::min);
                let hi = g.iter().map(|&j| raw[j]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(agg.group_gammas[l] >= lo - 1e-12 && agg.group_gammas[l] <= hi + 1e-12);
                for &j in g {
                    prop_assert_eq!(agg.column_gammas[j], agg.group_gammas[l]);
                }
            }
        }
    }
}
