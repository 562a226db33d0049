//! Clustering of heavy-tailed variables into groups that share a common
//! extreme value index.
//!
//! Columns are self-scaled by a high order statistic, then groups are peeled
//! off from the heaviest tail downwards by comparing each column's high
//! quantile to a threshold computed on the pooled remaining columns. The
//! crate also provides the Hill + k-means baseline, group-level index
//! estimation, the simulation models used to benchmark both, and CSV
//! ingestion of price series.

pub mod bench;
pub mod cluster;
pub mod data;
pub mod dist;
pub mod error;
pub mod hill;
pub mod ingest;
pub mod kmeans1d;
pub mod metrics;
pub mod order_stats;
pub mod params;
pub mod partition;
pub mod sim;

pub use cluster::{cluster, cluster_known_g, cluster_unknown_g, IterationRecord, IterationTrace};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use hill::{estimate_group_indices, hill, hill_ci, tail_kmeans, HillEstimate};
pub use metrics::{accuracy, mse, truth_from_design, GroundTruth};
pub use params::{default_params, ClusterParams};
pub use partition::TailPartition;
pub use sim::{generate, SimModel, SimModelSpec};
