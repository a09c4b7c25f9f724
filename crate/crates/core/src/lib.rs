//! k-medoids clustering of time series by whale optimization (WOA-kMedoids)
//! and by the classic PAM baseline.
//!
//! The pipeline is: load or synthesize a [`Dataset`], materialize a
//! [`DistanceMatrix`] once (windowed DTW or squared Euclidean), then cluster
//! with [`pam::pam`] or [`woa::run`] and score against ground truth with
//! [`eval::rand_index`]. The [`bench`] module strings these together into
//! reproducible comparison, convergence, and parameter-sweep experiments.

pub mod bench;
pub mod dataset;
pub mod distance;
mod error;
pub mod eval;
pub mod pam;
mod result;
pub mod woa;

pub use dataset::{Dataset, TimeSeries};
pub use distance::{DistanceMatrix, DtwParams, Metric};
pub use error::{Error, Result};
pub use result::{assign_nearest, Assignment, ClusteringResult};
pub use woa::{RunTelemetry, WhalePosition, WoaParams};
