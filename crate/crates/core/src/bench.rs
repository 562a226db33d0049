//! Replication engine for simulation studies: sweeps over design and tuning
//! parameters, the proposed algorithms against tail k-means, and JSON/CSV
//! reports.
//!
//! Every replication seed is a pure function of the master seed, the
//! index of the configuration point and the replication index, so results
//! do not depend on how the rayon pool schedules the work.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_known_g, cluster_unknown_g};
use crate::error::{Error, Result};
use crate::hill::{aggregate_by_partition, hill_columns, tail_kmeans_from_estimates};
use crate::metrics::{accuracy, mse};
use crate::params::{default_beta, default_k, default_k_star, ClusterParams};
use crate::partition::TailPartition;
use crate::sim::{generate, SimModel, SimModelSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Fixed CSV column order of [`emit_report`].
pub const CSV_COLUMNS: [&str; 13] = [
    "model",
    "g",
    "q",
    "delta",
    "n",
    "k",
    "k_star",
    "beta",
    "method",
    "reps",
    "failures",
    "mean_accuracy",
    "mean_mse",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Iterative extraction with the true number of groups.
    ProposedKnownG,
    /// Iterative extraction until every column is assigned.
    ProposedUnknownG,
    /// Exact 1-D k-means on Hill estimates with the true number of groups.
    TailKmeans,
    /// Per-column Hill estimates without grouping; reports MSE only.
    RawHill,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::ProposedKnownG,
        Method::ProposedUnknownG,
        Method::TailKmeans,
        Method::RawHill,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ProposedKnownG => "proposed_known_g",
            Method::ProposedUnknownG => "proposed_unknown_g",
            Method::TailKmeans => "tail_kmeans",
            Method::RawHill => "raw_hill",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidParams(format!("unknown method {s:?}")))
    }
}

/// Value lists for the swept quantities. An unset axis keeps the template
/// value (`g`, `q`, `delta`) or the default formula (`k`, `k_star`, `beta`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub g: Option<Vec<usize>>,
    pub q: Option<Vec<usize>>,
    pub delta: Option<Vec<f64>>,
    pub k: Option<Vec<usize>>,
    pub k_star: Option<Vec<usize>>,
    pub beta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Design template; its seed is the master seed.
    pub template: SimModelSpec,
    #[serde(default)]
    pub axes: SweepAxes,
    /// Vary `k`, `k_star` and `beta` one at a time, the other two at their
    /// defaults, instead of over their Cartesian product. Design axes are
    /// always crossed.
    #[serde(default)]
    pub one_at_a_time: bool,
    pub reps: usize,
    pub methods: Vec<Method>,
    /// Hill sample fraction for tail k-means and group aggregation; the
    /// clustering `k` of each point when unset.
    #[serde(default)]
    pub k_hill: Option<usize>,
}

/// One fully resolved configuration point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub model: SimModel,
    pub g: usize,
    pub q: usize,
    pub delta: f64,
    pub n: usize,
    pub k: usize,
    pub k_star: usize,
    pub beta: f64,
    pub k_hill: usize,
    /// Which of `k`, `k_star`, `beta` came from the default formulas.
    pub defaults: ParamDefaults,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDefaults {
    pub k: bool,
    pub k_star: bool,
    pub beta: bool,
}

impl SweepPoint {
    pub fn params(&self) -> Result<ClusterParams> {
        ClusterParams::new(self.k, self.k_star, self.beta)
    }

    pub fn spec(&self, seed: u64) -> SimModelSpec {
        SimModelSpec {
            model: self.model,
            g: self.g,
            q: self.q,
            delta: self.delta,
            n: self.n,
            seed,
        }
    }
}

fn axis<T: Copy>(values: &Option<Vec<T>>, fallback: T) -> Vec<T> {
    values.clone().unwrap_or_else(|| vec![fallback])
}

type Overrides = (Option<usize>, Option<usize>, Option<f64>);

fn param_overrides(axes: &SweepAxes, one_at_a_time: bool) -> Vec<Overrides> {
    if one_at_a_time {
        let mut out = Vec::new();
        out.extend(axes.k.iter().flatten().map(|&k| (Some(k), None, None)));
        out.extend(axes.k_star.iter().flatten().map(|&ks| (None, Some(ks), None)));
        out.extend(axes.beta.iter().flatten().map(|&b| (None, None, Some(b))));
        if axes.k.is_none() && axes.k_star.is_none() && axes.beta.is_none() {
            out.push((None, None, None));
        }
        return out;
    }
    let ks: Vec<Option<usize>> = axes.k.as_ref().map_or(vec![None], |v| v.iter().map(|&x| Some(x)).collect());
    let kss: Vec<Option<usize>> = axes.k_star.as_ref().map_or(vec![None], |v| v.iter().map(|&x| Some(x)).collect());
    let bs: Vec<Option<f64>> = axes.beta.as_ref().map_or(vec![None], |v| v.iter().map(|&x| Some(x)).collect());
    let mut out = Vec::new();
    for &k in &ks {
        for &ks in &kss {
            for &b in &bs {
                out.push((k, ks, b));
            }
        }
    }
    out
}

impl SweepConfig {
    /// Configuration points in report order: `g`, `q`, `delta` outermost,
    /// then the tuning parameters.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        if self.reps == 0 {
            return Err(Error::InvalidParams("reps must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParams("methods must not be empty".into()));
        }
        let t = &self.template;
        let overrides = param_overrides(&self.axes, self.one_at_a_time);
        let mut points = Vec::new();
        for &g in &axis(&self.axes.g, t.g) {
            for &q in &axis(&self.axes.q, t.q) {
                for &delta in &axis(&self.axes.delta, t.delta) {
                    for &(k, k_star, beta) in &overrides {
                        let point = resolve(t, g, q, delta, k, k_star, beta, self.k_hill)?;
                        points.push(point);
                    }
                }
            }
        }
        Ok(points)
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve(
    t: &SimModelSpec,
    g: usize,
    q: usize,
    delta: f64,
    k: Option<usize>,
    k_star: Option<usize>,
    beta: Option<f64>,
    k_hill: Option<usize>,
) -> Result<SweepPoint> {
    let spec = SimModelSpec { g, q, delta, ..*t };
    let context = |e: Error| {
        Error::InvalidParams(format!("config point g={g}, q={q}, delta={delta}: {e}"))
    };
    spec.validate().map_err(context)?;
    let p = spec.p();
    let kv = k.unwrap_or_else(|| default_k(p));
    // simulated data are positive, so n0 = n
    let ksv = k_star.unwrap_or_else(|| default_k_star(spec.n));
    let bv = beta.unwrap_or_else(|| default_beta(kv, ksv, p));
    let params = ClusterParams::new(kv, ksv, bv).map_err(context)?;
    params.validate(spec.n, p).map_err(context)?;
    let k_hill = k_hill.unwrap_or(kv);
    if k_hill == 0 || k_hill >= spec.n {
        return Err(context(Error::InvalidParams(format!(
            "k_hill = {k_hill} must lie in 1..{}",
            spec.n
        ))));
    }
    Ok(SweepPoint {
        model: spec.model,
        g,
        q,
        delta,
        n: spec.n,
        k: kv,
        k_star: ksv,
        beta: bv,
        k_hill,
        defaults: ParamDefaults {
            k: k.is_none(),
            k_star: k_star.is_none(),
            beta: beta.is_none(),
        },
    })
}

/// Result of one method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    /// `None` for [`Method::RawHill`].
    pub partition: Option<TailPartition>,
    pub accuracy: Option<f64>,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub outcome: Result<MethodOutcome>,
    pub seconds: f64,
}

fn run_method(
    method: Method,
    data: &crate::data::DataMatrix,
    truth: &crate::metrics::GroundTruth,
    params: &ClusterParams,
    hill_raw: &[f64],
) -> Result<MethodOutcome> {
    let truth_gammas = truth.column_gammas();
    let partition = match method {
        Method::RawHill => {
            return Ok(MethodOutcome {
                partition: None,
                accuracy: None,
                mse: mse(&truth_gammas, hill_raw)?,
            })
        }
        Method::ProposedKnownG => cluster_known_g(data, &params.with_known_g(truth.g()))?.0,
        Method::ProposedUnknownG => cluster_unknown_g(data, params)?.0,
        Method::TailKmeans => tail_kmeans_from_estimates(hill_raw, truth.g())?,
    };
    let grouped = aggregate_by_partition(hill_raw, &partition)?;
    Ok(MethodOutcome {
        accuracy: Some(accuracy(truth, &partition)?),
        mse: mse(&truth_gammas, &grouped.column_gammas)?,
        partition: Some(partition),
    })
}

/// Generates one dataset from `spec` and applies every method to it.
///
/// Hill estimates with `k_hill` are shared by tail k-means, the group
/// aggregation of every partition and [`Method::RawHill`]. Errors from data
/// generation or Hill estimation fail the whole replication; clustering
/// errors are reported per method.
pub fn run_replication(
    spec: &SimModelSpec,
    params: &ClusterParams,
    methods: &[Method],
    k_hill: usize,
) -> Result<Vec<MethodRun>> {
    let (data, truth) = generate(spec)?;
    let hill_raw: Vec<f64> = hill_columns(&data, k_hill)?.iter().map(|h| h.gamma_hat).collect();
    Ok(methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(method, &data, &truth, params, &hill_raw);
            MethodRun {
                method,
                outcome,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect())
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep` at configuration point `point`.
pub fn replication_seed(master: u64, point: usize, rep: usize) -> u64 {
    mix(mix(mix(master) ^ point as u64) ^ rep as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepFailure {
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub reps: usize,
    pub failures: usize,
    /// Mean over successful replications; `None` when there are none or the
    /// method has no partition.
    pub mean_accuracy: Option<f64>,
    pub mean_mse: Option<f64>,
    /// One entry per replication, `None` where it failed.
    pub accuracies: Vec<Option<f64>>,
    pub mses: Vec<Option<f64>>,
    /// Partitions as 1-based groups, one entry per replication.
    pub partitions: Vec<Option<Vec<Vec<usize>>>>,
    pub errors: Vec<RepFailure>,
    pub wall_time_secs: f64,
}

fn mean(values: &[Option<f64>]) -> Option<f64> {
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
}

impl MethodSummary {
    fn from_runs(method: Method, runs: &[(usize, std::result::Result<MethodOutcome, String>, f64)]) -> Self {
        let mut accuracies = Vec::with_capacity(runs.len());
        let mut mses = Vec::with_capacity(runs.len());
        let mut partitions = Vec::with_capacity(runs.len());
        let mut errors = Vec::new();
        let mut wall_time_secs = 0.0;
        for (rep, outcome, secs) in runs {
            wall_time_secs += secs;
            match outcome {
                Ok(o) => {
                    accuracies.push(o.accuracy);
                    mses.push(Some(o.mse));
                    partitions.push(o.partition.as_ref().map(TailPartition::one_based));
                }
                Err(e) => {
                    accuracies.push(None);
                    mses.push(None);
                    partitions.push(None);
                    errors.push(RepFailure {
                        rep: *rep,
                        error: e.clone(),
                    });
                }
            }
        }
        Self {
            method,
            reps: runs.len(),
            failures: errors.len(),
            mean_accuracy: mean(&accuracies),
            mean_mse: mean(&mses),
            accuracies,
            mses,
            partitions,
            errors,
            wall_time_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub point: SweepPoint,
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterFormulas {
    pub k: String,
    pub k_star: String,
    pub beta: String,
    pub k_hill: String,
    pub n0: String,
    pub seeds: String,
}

impl Default for ParameterFormulas {
    fn default() -> Self {
        Self {
            k: "floor(3 * ln(p)^1.05), at least 1".into(),
            k_star: "floor(n0^0.98)".into(),
            beta: "min(2 * (k / k_star) * p + 0.5, 0.9)".into(),
            k_hill: "k".into(),
            n0: "n (simulated data are strictly positive)".into(),
            seeds: "splitmix64(splitmix64(splitmix64(master) ^ point) ^ rep)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub software_version: String,
    pub master_seed: u64,
    pub reps: usize,
    pub one_at_a_time: bool,
    pub parameter_formulas: ParameterFormulas,
    pub cells: Vec<Cell>,
}

impl BenchReport {
    pub fn empty(master_seed: u64, reps: usize) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            reps,
            one_at_a_time: false,
            parameter_formulas: ParameterFormulas::default(),
            cells: Vec::new(),
        }
    }

    /// Copy with every wall-time field zeroed, for determinism checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for c in &mut r.cells {
            for m in &mut c.methods {
                m.wall_time_secs = 0.0;
            }
        }
        r
    }

    /// Summary of `method` at configuration point `index`.
    pub fn summary(&self, index: usize, method: Method) -> Option<&MethodSummary> {
        self.cells.get(index)?.methods.iter().find(|m| m.method == method)
    }
}

/// Runs every replication of every configuration point.
pub fn run_sweep(config: &SweepConfig) -> Result<BenchReport> {
    let points = config.points()?;
    let master = config.template.seed;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (0..config.reps).map(move |r| (i, r)))
        .collect();
    type Run = (usize, std::result::Result<MethodOutcome, String>, f64);
    let results: Vec<Vec<Run>> = tasks
        .par_iter()
        .map(|&(i, rep)| {
            let point = &points[i];
            let seed = replication_seed(master, i, rep);
            let runs = point
                .params()
                .and_then(|params| run_replication(&point.spec(seed), &params, &config.methods, point.k_hill));
            match runs {
                Ok(runs) => runs
                    .into_iter()
                    .map(|r| (rep, r.outcome.map_err(|e| e.to_string()), r.seconds))
                    .collect(),
                Err(e) => config
                    .methods
                    .iter()
                    .map(|_| (rep, Err(e.to_string()), 0.0))
                    .collect(),
            }
        })
        .collect();

    let mut report = BenchReport::empty(master, config.reps);
    report.one_at_a_time = config.one_at_a_time;
    for (i, point) in points.iter().enumerate() {
        let block = &results[i * config.reps..(i + 1) * config.reps];
        let methods = config
            .methods
            .iter()
            .enumerate()
            .map(|(m, &method)| {
                let runs: Vec<Run> = block.iter().map(|r| r[m].clone()).collect();
                MethodSummary::from_runs(method, &runs)
            })
            .collect();
        report.cells.push(Cell {
            point: *point,
            seeds: (0..config.reps).map(|r| replication_seed(master, i, r)).collect(),
            methods,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Serializes `report`: JSON is the full nested document, CSV one row per
/// configuration point and method with the columns of [`CSV_COLUMNS`].
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            serde_json::to_vec_pretty(report).expect("report serialization cannot fail")
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let row_err = "writing to memory cannot fail";
            w.write_record(CSV_COLUMNS).expect(row_err);
            for cell in &report.cells {
                let p = &cell.point;
                for m in &cell.methods {
                    w.write_record([
                        p.model.name().to_string(),
                        p.g.to_string(),
                        p.q.to_string(),
                        p.delta.to_string(),
                        p.n.to_string(),
                        p.k.to_string(),
                        p.k_star.to_string(),
                        p.beta.to_string(),
                        m.method.name().to_string(),
                        m.reps.to_string(),
                        m.failures.to_string(),
                        opt(m.mean_accuracy),
                        opt(m.mean_mse),
                    ])
                    .expect(row_err);
                }
            }
            w.into_inner().expect(row_err)
        }
    }
}

/// Writes `report` in `format` to `out`.
pub fn write_report<W: Write>(report: &BenchReport, format: ReportFormat, mut out: W) -> Result<()> {
    out.write_all(&emit_report(report, format))?;
    Ok(())
}

pub fn parse_report_json(bytes: &[u8]) -> Result<BenchReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        row: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Named sweep designs of the simulation study, on `model` with `n = 2000`.
///
/// * `fig1`: accuracy against `q` for `g ∈ {3, 4, 5}`, `Δ = 0.5`;
/// * `fig2`: accuracy against `Δ` for `g ∈ {3, 4, 5}`, `q = 15`;
/// * `fig3`: `k`, `β` and `k*` varied one at a time, `Δ = 0.5`, `q = 15`;
/// * `fig5`: the `fig1` grid with every method including raw Hill, for MSE.
pub fn preset(name: &str, model: SimModel, reps: usize, master_seed: u64) -> Result<SweepConfig> {
    let template = SimModelSpec {
        model,
        g: 3,
        q: 15,
        delta: 0.5,
        n: 2000,
        seed: master_seed,
    };
    let clustering = vec![Method::ProposedKnownG, Method::ProposedUnknownG, Method::TailKmeans];
    let groups = Some(vec![3, 4, 5]);
    let qs = Some(vec![5, 10, 15, 20, 25, 30]);
    let (axes, one_at_a_time, methods) = match name {
        "fig1" => (
            SweepAxes {
                g: groups,
                q: qs,
                ..Default::default()
            },
            false,
            clustering,
        ),
        "fig2" => (
            SweepAxes {
                g: groups,
                delta: Some(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]),
                ..Default::default()
            },
            false,
            clustering,
        ),
        "fig3" => (
            SweepAxes {
                g: groups,
                k: Some(vec![2, 4, 6, 8, 10, 12, 15, 20, 30, 50]),
                k_star: Some(vec![200, 500, 1000, 1500, 1717, 1900]),
                beta: Some(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]),
                ..Default::default()
            },
            true,
            clustering,
        ),
        "fig5" => (
            SweepAxes {
                g: groups,
                q: qs,
                ..Default::default()
            },
            false,
            Method::ALL.to_vec(),
        ),
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown preset {other:?} (expected fig1, fig2, fig3 or fig5)"
            )))
        }
    };
    Ok(SweepConfig {
        template,
        axes,
        one_at_a_time,
        reps,
        methods,
        k_hill: None,
    })
}
