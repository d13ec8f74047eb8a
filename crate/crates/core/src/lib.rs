//! Information-theoretic feature selection over discretized tabular data.
//!
//! The crate is organized bottom-up:
//!
//! - [`dataset`]: CSV ingestion, equal-width discretization, train/test splits.
//! - [`estimators`]: entropies, mutual information and conditional mutual
//!   information over integer-coded columns, with an MI-term call counter.
//! - [`criteria`]: the sequential-forward-selection score functions
//!   (MIM, MIFS, mRMR, JMI, DISR, CMIM, RelaxMRMR, JMI-3/4, CMIM-3/4).
//! - [`hocmim`]: high-order conditional mutual information maximization with
//!   greedy representative-set search and adaptive order selection.
//! - [`selection`]: the forward-selection engine and MI-call accounting.
//! - [`eval`]: KNN evaluation over repeated holdout splits and average ranks.
//! - [`synth`] and [`oracle`]: bundled datasets and brute-force cross-checks.
//!
//! ```
//! use hocmim_core::synth::toy_dataset;
//! use hocmim_core::{run_sfs, Criterion, EstimatorContext, HocmimParams};
//!
//! let data = toy_dataset();
//! let ctx = EstimatorContext::plugin(&data);
//! let hocmim = Criterion::hocmim(HocmimParams::fixed(2))?;
//! let result = run_sfs(&ctx, &hocmim, 5)?;
//! assert_eq!(result.names, ["X3", "X2", "X4", "X1", "X5"]);
//! # Ok::<(), hocmim_core::Error>(())
//! ```

pub mod criteria;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod hocmim;
pub mod oracle;
pub mod selection;
pub mod synth;

pub use criteria::{Criterion, CriterionKind, Scorer};
pub use dataset::{
    apply_binning, fit_binning, load_csv, load_csv_default_target, make_splits, read_csv, BinningSpec, DiscreteDataset, RawTable,
    Split, SplitSpec,
};
pub use error::{Error, Result};
pub use estimators::{features, EstimatorContext, EstimatorKind, JointEncoding, Var};
pub use eval::{
    average_ranks, benchmark, error_curve, knn_classify, CriterionRanker, DataSource, EvalReport,
    FeatureRanker, FixedOrder, KnnConfig, Representation, xor_recovery,
};
pub use oracle::{run_oracle_suite, OracleConfig, OracleReport};
pub use hocmim::{HocmimParams, OrderMode, RedundancyTrace, StopReason};
pub use selection::{predicted_mi_calls, run_sfs, MiCallCount, SelectionResult};
