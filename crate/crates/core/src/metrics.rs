//! Ground truth of simulated designs and the evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::TailPartition;

/// True group labels (1-based) and the decreasing group indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    group_of: Vec<usize>,
    gammas: Vec<f64>,
}

impl GroundTruth {
    pub fn new(group_of: Vec<usize>, gammas: Vec<f64>) -> Result<Self> {
        if gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidData("group indices must be positive".into()));
        }
        if gammas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidData(
                "group indices must be strictly decreasing".into(),
            ));
        }
        let g = gammas.len();
        let mut used = vec![false; g];
        for &c in &group_of {
            if c == 0 || c > g {
                return Err(Error::InvalidData(format!("label {c} outside 1..={g}")));
            }
            used[c - 1] = true;
        }
        if let Some(l) = used.iter().position(|u| !u) {
            return Err(Error::InvalidData(format!("group {} has no columns", l + 1)));
        }
        Ok(Self { group_of, gammas })
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn p(&self) -> usize {
        self.group_of.len()
    }

    pub fn g(&self) -> usize {
        self.gammas.len()
    }

    /// `γ_j` for every column.
    pub fn column_gammas(&self) -> Vec<f64> {
        self.group_of.iter().map(|&c| self.gammas[c - 1]).collect()
    }

    pub fn partition(&self) -> TailPartition {
        TailPartition::from_labels(&self.group_of).expect("labels validated at construction")
    }
}

/// Equal-size design: `g` groups of `q` consecutive columns with
/// `γ^(l) = (1 - Δ)^(l-1)`.
pub fn truth_from_design(g: usize, q: usize, delta: f64) -> Result<GroundTruth> {
    if g == 0 || q == 0 {
        return Err(Error::InvalidParams("g and q must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParams(format!("delta = {delta} must lie in (0, 1)")));
    }
    let gammas = (0..g).map(|l| (1.0 - delta).powi(l as i32)).collect();
    let labels = (1..=g * q).map(|j| j.div_ceil(q)).collect();
    GroundTruth::new(labels, gammas)
}

/// Fraction of columns whose estimated group position equals the true label.
/// Group order carries meaning, so no relabelling is attempted.
pub fn accuracy(truth: &GroundTruth, estimate: &TailPartition) -> Result<f64> {
    if truth.p() != estimate.p() {
        return Err(Error::DimensionMismatch {
            expected: truth.p(),
            found: estimate.p(),
        });
    }
    let hits = truth
        .group_of()
        .iter()
        .zip(estimate.labels())
        .filter(|(c, c_hat)| **c == *c_hat)
        .count();
    Ok(hits as f64 / truth.p() as f64)
}

/// Mean squared deviation between two index vectors.
pub fn mse(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidData("mse of empty vectors".into()));
    }
    let sum: f64 = truth.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(sum / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(groups: Vec<Vec<usize>>) -> TailPartition {
        let p = groups.iter().map(Vec::len).sum();
        let zero_based = groups
            .into_iter()
            .map(|g| g.into_iter().map(|j| j - 1).collect())
            .collect();
        TailPartition::new(zero_based, p).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let truth = GroundTruth::new(vec![1, 1, 2, 2], vec![1.0, 0.5]).unwrap();
        assert_eq!(accuracy(&truth, &part(vec![vec![1, 2], vec![3, 4]])).unwrap(), 1.0);
        // columns 1, 3 and 4 keep their true position
        assert_eq!(accuracy(&truth, &part(vec![vec![1], vec![2, 3, 4]])).unwrap(), 0.75);
        let truth = GroundTruth::new(vec![1, 2], vec![1.0, 0.5]).unwrap();
        assert_eq!(accuracy(&truth, &part(vec![vec![2], vec![1]])).unwrap(), 0.0);
        assert!(accuracy(&truth, &part(vec![vec![1, 2, 3]])).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 0.5], &[1.0, 0.5]).unwrap(), 0.0);
        assert!((mse(&[1.0, 1.0], &[1.1, 0.9]).unwrap() - 0.01).abs() < 1e-15);
        let v = mse(&[1.0, 0.5, 0.25], &[0.9, 0.6, 0.25]).unwrap();
        assert!((v - 0.006_666_666_666_666_667).abs() < 1e-15);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn design_examples() {
        let t = truth_from_design(3, 1, 0.5).unwrap();
        assert_eq!(t.gammas(), &[1.0, 0.5, 0.25]);
        assert_eq!(t.group_of(), &[1, 2, 3]);
        let t = truth_from_design(1, 4, 0.5).unwrap();
        assert_eq!(t.gammas(), &[1.0]);
        assert_eq!(t.group_of(), &[1, 1, 1, 1]);
        let t = truth_from_design(2, 2, 0.1).unwrap();
        assert_eq!(t.gammas(), &[1.0, 0.9]);
        assert_eq!(t.group_of(), &[1, 1, 2, 2]);
        assert_eq!(t.column_gammas(), vec![1.0, 1.0, 0.9, 0.9]);
    }

    #[test]
    fn ground_truth_invariants() {
        assert!(GroundTruth::new(vec![1, 2], vec![0.5, 1.0]).is_err());
        assert!(GroundTruth::new(vec![1, 1], vec![1.0, 0.5]).is_err());
        assert!(GroundTruth::new(vec![1, 3], vec![1.0, 0.5]).is_err());
        assert!(GroundTruth::new(vec![1], vec![-1.0]).is_err());
    }

    proptest! {
        #[test]
        fn accuracy_in_unit_interval(labels in prop::collection::vec(1usize..4, 1..20),
                                     est in prop::collection::vec(1usize..5, 1..20)) {
            let p = labels.len().min(est.len());
            let mut labels = labels[..p].to_vec();
            // force a valid truth by relabelling to a dense range
            let mut seen: Vec<usize> = labels.clone();
            seen.sort_unstable();
            seen.dedup();
            for l in labels.iter_mut() {
                *l = seen.iter().position(|s| s == l).unwrap() + 1;
            }
            let gammas: Vec<f64> = (0..seen.len()).map(|l| 0.5f64.powi(l as i32)).collect();
            let truth = GroundTruth::new(labels.clone(), gammas).unwrap();
            let mut est = est[..p].to_vec();
            let mut seen: Vec<usize> = est.clone();
            seen.sort_unstable();
            seen.dedup();
            for l in est.iter_mut() {
                *l = seen.iter().position(|s| s == l).unwrap() + 1;
            }
            let estimate = TailPartition::from_labels(&est).unwrap();
            let acc = accuracy(&truth, &estimate).unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
            prop_assert_eq!(acc == 1.0, est == labels);
        }

        #[test]
        fn mse_is_symmetric_and_zero_on_diagonal(
            pairs in prop::collection::vec((0.01f64..5.0, 0.01f64..5.0), 1..30)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        }

        #[test]
        fn design_groups_have_q_members(g in 1usize..8, q in 1usize..8, delta in 0.001f64..0.999) {
            let t = truth_from_design(g, q, delta).unwrap();
            prop_assert!(t.gammas().windows(2).all(|w| w[1] < w[0]));
            for l in 1..=g {
                prop_assert_eq!(t.group_of().iter().filter(|&&c| c == l).count(), q);
            }
        }
    }
}
