//! Iterative tail clustering: each round extracts the columns whose high
//! self-scaled quantile reaches the pooled threshold of the remaining columns.
//!
//! Round `l` with active set `I`:
//!
//! * `u_l` is the `(k·|I|)`-th largest of all scaled entries of the active columns;
//! * column `j` joins group `l` iff its `(⌊βk⌋+1)`-th largest scaled value is `>= u_l`.
//!
//! The column achieving the most of the top `k·|I|` pooled entries owns at
//! least `k > ⌊βk⌋` of them, so every round extracts at least one column.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::order_stats::{pooled_upper_order_stat, select_upper, self_scale, ScaledMatrix};
use crate::params::ClusterParams;
use crate::partition::TailPartition;

/// One extraction round.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Active columns (0-based) at the start of the round.
    pub active: Vec<usize>,
    /// Pooled threshold `u_l`.
    pub threshold: f64,
    /// Per-column statistic `Y_{n-⌊βk⌋:n}`, aligned with `active`.
    pub statistics: Vec<f64>,
    /// Columns (0-based) extracted in this round.
    pub extracted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub iterations: Vec<IterationRecord>,
}

/// Result of one extraction round.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub group: Vec<usize>,
    pub threshold: f64,
    pub statistics: Vec<f64>,
}

/// Per-column statistic `Y_{n-m:n}` for every column of `scaled`.
fn column_statistics(scaled: &ScaledMatrix, m: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; scaled.n()];
    (0..scaled.p())
        .map(|j| {
            buf.copy_from_slice(scaled.column(j));
            select_upper(&mut buf, m)
        })
        .collect()
}

fn check_round(scaled: &ScaledMatrix, active: &[usize], k: usize, beta: f64) -> Result<usize> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParams(format!("beta = {beta} must lie in (0, 1)")));
    }
    if k == 0 || k > scaled.n() {
        return Err(Error::InvalidParams(format!(
            "k = {k} must lie in 1..={}",
            scaled.n()
        )));
    }
    Ok((beta * k as f64).floor() as usize)
}

fn extract_with(
    scaled: &ScaledMatrix,
    active: &[usize],
    k: usize,
    mut stats_of: impl FnMut(usize) -> Result<f64>,
) -> Result<Extraction> {
    let threshold = pooled_upper_order_stat(scaled, active, k * active.len())?;
    let statistics = active
        .iter()
        .map(|&j| stats_of(j))
        .collect::<Result<Vec<_>>>()?;
    let group = active
        .iter()
        .zip(&statistics)
        .filter(|(_, &s)| s >= threshold)
        .map(|(&j, _)| j)
        .collect();
    Ok(Extraction {
        group,
        threshold,
        statistics,
    })
}

/// One round: threshold `u` and the columns of `active` whose statistic
/// reaches it. A `⌊βk⌋` of zero makes the statistic the column maximum.
pub fn extract_heaviest_group(
    scaled: &ScaledMatrix,
    active: &[usize],
    k: usize,
    beta: f64,
) -> Result<Extraction> {
    let m = check_round(scaled, active, k, beta)?;
    let mut buf = vec![0.0; scaled.n()];
    extract_with(scaled, active, k, |j| {
        buf.copy_from_slice(scaled.column(j));
        select_upper(&mut buf, m)
    })
}

struct Engine {
    scaled: ScaledMatrix,
    statistics: Vec<f64>,
    k: usize,
}

impl Engine {
    fn new(data: &DataMatrix, params: &ClusterParams) -> Result<Self> {
        params.validate(data.n(), data.p())?;
        let scaled = self_scale(data, params.k_star)?;
        let statistics = column_statistics(&scaled, params.beta_k())?;
        Ok(Self {
            scaled,
            statistics,
            k: params.k,
        })
    }

    fn round(&self, active: &[usize]) -> Result<IterationRecord> {
        let ex = extract_with(&self.scaled, active, self.k, |j| Ok(self.statistics[j]))?;
        Ok(IterationRecord {
            active: active.to_vec(),
            threshold: ex.threshold,
            statistics: ex.statistics,
            extracted: ex.group,
        })
    }
}

fn remove(active: &mut Vec<usize>, group: &[usize]) {
    // both sorted ascending
    let mut g = group.iter().peekable();
    active.retain(|j| {
        while g.peek().is_some_and(|&&x| x < *j) {
            g.next();
        }
        g.peek() != Some(&j)
    });
}

/// Partition into exactly `g = params.known_g` groups.
pub fn cluster_known_g(
    data: &DataMatrix,
    params: &ClusterParams,
) -> Result<(TailPartition, IterationTrace)> {
    let g = params.known_g.ok_or_else(|| {
        Error::InvalidParams("known-g clustering requires known_g to be set".into())
    })?;
    let engine = Engine::new(data, params)?;
    let p = data.p();
    let mut active: Vec<usize> = (0..p).collect();
    let mut groups = Vec::with_capacity(g);
    let mut trace = IterationTrace::default();
    for l in 1..g {
        if active.is_empty() {
            return Err(Error::ActiveSetExhausted { group: l });
        }
        let rec = engine.round(&active)?;
        remove(&mut active, &rec.extracted);
        groups.push(rec.extracted.clone());
        trace.iterations.push(rec);
    }
    if active.is_empty() {
        return Err(Error::ActiveSetExhausted { group: g });
    }
    groups.push(active);
    Ok((TailPartition::new(groups, p)?, trace))
}

/// Partition with an emergent number of groups: extract until no column remains.
pub fn cluster_unknown_g(
    data: &DataMatrix,
    params: &ClusterParams,
) -> Result<(TailPartition, IterationTrace)> {
    let engine = Engine::new(data, &params.without_known_g())?;
    let p = data.p();
    let mut active: Vec<usize> = (0..p).collect();
    let mut groups = Vec::new();
    let mut trace = IterationTrace::default();
    while !active.is_empty() {
        let rec = engine.round(&active)?;
        if rec.extracted.is_empty() {
            // unreachable for beta < 1, kept so a violated invariant cannot loop forever
            return Err(Error::InvalidParams(format!(
                "round {} extracted no column",
                groups.len() + 1
            )));
        }
        remove(&mut active, &rec.extracted);
        groups.push(rec.extracted.clone());
        trace.iterations.push(rec);
    }
    Ok((TailPartition::new(groups, p)?, trace))
}

/// Dispatches on `params.known_g`.
pub fn cluster(data: &DataMatrix, params: &ClusterParams) -> Result<(TailPartition, IterationTrace)> {
    match params.known_g {
        Some(_) => cluster_known_g(data, params),
        None => cluster_unknown_g(data, params),
    }
}
