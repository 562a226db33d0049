//! Observation matrix: `n` i.i.d. rows, `p` variables stored column-major.

use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
    labels: Option<Vec<String>>,
}

impl DataMatrix {
    /// Builds a matrix from its columns. Every column must have the same
    /// length `n >= 2` and contain only finite values.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        if p == 0 {
            return Err(Error::InvalidData("at least one column is required".into()));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::InvalidData(format!(
                "at least two rows are required, found {n}"
            )));
        }
        let mut values = Vec::with_capacity(n * p);
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column {} has {} rows, expected {n}",
                    j + 1,
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value at row {}, column {}",
                    i + 1,
                    j + 1
                )));
            }
            values.extend(col);
        }
        Ok(Self {
            values,
            n,
            p,
            labels: None,
        })
    }

    /// Builds a matrix from row-major records.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::InvalidData(format!(
                    "row {} has {} values, expected {p}",
                    i + 1,
                    row.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(columns)
    }

    /// Attaches column labels; they must be `p` distinct strings.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: labels.len(),
            });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidData(format!("duplicate column label {l:?}")));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Column `j` (0-based).
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of column `j` (0-based), falling back to `V{j+1}`.
    pub fn label(&self, j: usize) -> String {
        match &self.labels {
            Some(l) => l[j].clone(),
            None => format!("V{}", j + 1),
        }
    }

    /// All labels, generated as `V1..Vp` when none are attached.
    pub fn labels_or_default(&self) -> Vec<String> {
        (0..self.p).map(|j| self.label(j)).collect()
    }

    /// Number of strictly positive observations in the sparsest column.
    pub fn min_positive_count(&self) -> usize {
        self.columns()
            .map(|c| c.iter().filter(|&&v| v > 0.0).count())
            .min()
            .unwrap_or(0)
    }

    /// Multiplies column `j` by `scales[j]`.
    pub fn scale_columns(&self, scales: &[f64]) -> Result<Self> {
        if scales.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: scales.len(),
            });
        }
        let columns = self
            .columns()
            .zip(scales)
            .map(|(c, &s)| c.iter().map(|v| v * s).collect())
            .collect();
        let out = Self::from_columns(columns)?;
        match &self.labels {
            Some(l) => out.with_labels(l.clone()),
            None => Ok(out),
        }
    }

    /// New matrix whose column `j` is column `order[j]` of `self`.
    pub fn select_columns(&self, order: &[usize]) -> Result<Self> {
        if let Some(&bad) = order.iter().find(|&&j| j >= self.p) {
            return Err(Error::InvalidData(format!("column {} out of range", bad + 1)));
        }
        let columns = order.iter().map(|&j| self.column(j).to_vec()).collect();
        let out = Self::from_columns(columns)?;
        match &self.labels {
            Some(l) => out.with_labels(order.iter().map(|&j| l[j].clone()).collect()),
            None => Ok(out),
        }
    }

    /// New matrix with rows reordered so that row `i` is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: order.len(),
            });
        }
        let columns = self
            .columns()
            .map(|c| order.iter().map(|&i| c[i]).collect())
            .collect();
        let out = Self::from_columns(columns)?;
        match &self.labels {
            Some(l) => out.with_labels(l.clone()),
            None => Ok(out),
        }
    }
}
