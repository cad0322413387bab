//! Unsupervised feature selection by discriminability.
//!
//! Each feature is scored by how well it separates data subsets of every size: the
//! partial diameter `phi(k)` is the narrowest spread any `k` points can have along the
//! feature, and the normalized discriminability averages `phi(k)/k` over all `k`.
//! Features are ranked by the corresponding intrinsic dimension `1/delta²`, lowest
//! first. For large datasets `phi` is evaluated on a log-spaced support sequence, which
//! yields upper and lower bounds and a computable bound on the ranking error.

pub mod approximation;
pub mod baselines;
pub mod cli;
pub mod discriminability;
pub mod document;
mod error;
pub mod ingest;
pub mod matrix;
mod order;
pub mod selection;
mod serde_float;
pub mod synthetic;

pub use approximation::{
    bounded_score, make_log_support_sequence, max_error_ratio, max_error_sweep, true_error_ratio, BoundedScore,
    ErrorReport, SupportSequence, SweepPoint,
};
pub use baselines::{
    select_by_correlation, select_by_variance, select_random, select_rrfs, BaselineMethod, BaselineResult,
};
pub use discriminability::{
    dataset_discriminability, feature_discriminability, phi, phi_oracle, sort_feature, FeatureScore, SortedFeature,
};
pub use error::{Error, Result};
pub use ingest::{ingest_csv, IngestSpec};
pub use matrix::DataMatrix;
pub use selection::{correlation_prefilter, fsd, lsfsd, pearson, RankedScores, Ranking, SelectionConfig};
pub use synthetic::{generate_synthetic, SyntheticData};
