//! Ordered partitions of the column set, heaviest tail first.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ordered list of disjoint, non-empty column groups covering `0..p`.
///
/// Group `l` was extracted before group `l + 1`. Columns are stored 0-based
/// and sorted within each group; the serialized form is 1-based:
/// `{"groups": [[1, 2], [3]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TailPartition {
    groups: Vec<Vec<usize>>,
    p: usize,
}

impl TailPartition {
    /// Validates that `groups` is a partition of `0..p` into non-empty sets.
    pub fn new(groups: Vec<Vec<usize>>, p: usize) -> Result<Self> {
        let mut seen = vec![false; p];
        let mut groups = groups;
        for (l, g) in groups.iter_mut().enumerate() {
            if g.is_empty() {
                return Err(Error::InvalidData(format!("group {} is empty", l + 1)));
            }
            g.sort_unstable();
            for &j in g.iter() {
                if j >= p {
                    return Err(Error::InvalidData(format!(
                        "column {} out of range 1..={p}",
                        j + 1
                    )));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidData(format!(
                        "column {} appears in more than one group",
                        j + 1
                    )));
                }
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidData(format!("column {} is not assigned", j + 1)));
        }
        Ok(Self { groups, p })
    }

    /// Single group holding every column.
    pub fn single(p: usize) -> Self {
        Self {
            groups: vec![(0..p).collect()],
            p,
        }
    }

    /// Builds a partition from 1-based group labels per column; group `l`
    /// collects every column labelled `l`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let g = labels.iter().copied().max().unwrap_or(0);
        let mut groups = vec![Vec::new(); g];
        for (j, &l) in labels.iter().enumerate() {
            if l == 0 {
                return Err(Error::InvalidData("group labels are 1-based".into()));
            }
            groups[l - 1].push(j);
        }
        Self::new(groups, labels.len())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// 1-based group position of every column (`ĉ_j`).
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.p];
        for (l, g) in self.groups.iter().enumerate() {
            for &j in g {
                out[j] = l + 1;
            }
        }
        out
    }

    /// Groups rendered with the given column names.
    pub fn named_groups(&self, names: &[String]) -> Vec<Vec<String>> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&j| names[j].clone()).collect())
            .collect()
    }

    /// Groups as 1-based indices.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|j| j + 1).collect())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    groups: Vec<Vec<usize>>,
}

impl Serialize for TailPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            groups: self.one_based(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TailPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = Wire::deserialize(d)?;
        let p = wire.groups.iter().map(Vec::len).sum();
        let groups = wire
            .groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|j| j.checked_sub(1).ok_or_else(|| D::Error::custom("indices are 1-based")))
                    .collect()
            })
            .collect::<std::result::Result<Vec<Vec<usize>>, _>>()?;
        TailPartition::new(groups, p).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TailPartition::new(vec![vec![0], vec![1]], 2).is_ok());
        assert!(TailPartition::new(vec![vec![0], vec![]], 1).is_err());
        assert!(TailPartition::new(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(TailPartition::new(vec![vec![0]], 2).is_err());
        assert!(TailPartition::new(vec![vec![2]], 2).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let part = TailPartition::new(vec![vec![2, 0], vec![1]], 3).unwrap();
        assert_eq!(part.labels(), vec![1, 2, 1]);
        assert_eq!(TailPartition::from_labels(&part.labels()).unwrap(), part);
    }

    #[test]
    fn json_is_one_based() {
        let part = TailPartition::new(vec![vec![1], vec![0, 2]], 3).unwrap();
        let s = serde_json::to_string(&part).unwrap();
        assert_eq!(s, r#"{"groups":[[2],[1,3]]}"#);
        let back: TailPartition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, part);
        assert!(serde_json::from_str::<TailPartition>(r#"{"groups":[[0]]}"#).is_err());
    }
}
