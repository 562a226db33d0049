//! JSON documents written by the commands.

use serde::Serialize;
use tailclust::{ClusterParams, GroundTruth, HillEstimate, SimModelSpec};

/// Version of every JSON document emitted by the CLI.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ParamsUsed {
    #[serde(flatten)]
    pub params: ClusterParams,
    /// Positive-observation count used by the default formulas.
    pub n0: usize,
    pub k_default: bool,
    pub k_star_default: bool,
    pub beta_default: bool,
    pub k_hill: usize,
    pub ci_level: f64,
}

#[derive(Debug, Serialize)]
pub struct ColumnEstimate {
    pub label: String,
    /// 1-based group of the column.
    pub group: usize,
    pub gamma_hat: f64,
    pub k_used: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Serialize)]
pub struct GroupSummary {
    pub group: usize,
    pub members: Vec<String>,
    /// Mean Hill estimate over the members.
    pub gamma: f64,
}

#[derive(Debug, Serialize)]
pub struct Statistic {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct Round {
    pub round: usize,
    pub active: Vec<String>,
    pub threshold: f64,
    pub statistics: Vec<Statistic>,
    pub extracted: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct PartitionOut {
    /// 1-based column indices.
    pub groups: Vec<Vec<usize>>,
    pub labels: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct ClusterOutput {
    pub schema_version: u32,
    pub input: String,
    pub n: usize,
    pub p: usize,
    pub params: ParamsUsed,
    pub partition: PartitionOut,
    pub columns: Vec<ColumnEstimate>,
    pub groups: Vec<GroupSummary>,
    pub trace: Vec<Round>,
}

#[derive(Debug, Serialize)]
pub struct HillRow {
    pub label: String,
    #[serde(flatten)]
    pub estimate: HillEstimate,
}

#[derive(Debug, Serialize)]
pub struct HillOutput {
    pub schema_version: u32,
    pub input: String,
    pub n: usize,
    pub k: usize,
    pub ci_level: f64,
    pub ci_formula: &'static str,
    pub columns: Vec<HillRow>,
}

#[derive(Debug, Serialize)]
pub struct SimSidecar {
    pub schema_version: u32,
    pub data_file: String,
    pub spec: SimModelSpec,
    pub published_model: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub labels: Vec<String>,
    pub truth: GroundTruth,
}
