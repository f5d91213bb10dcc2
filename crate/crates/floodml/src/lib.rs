//! From-scratch binary classification toolkit for rainfall/flood tabular data.
//!
//! The crate covers the whole experiment end to end:
//!
//! - [`dataset`]: daily-rainfall CSV ingestion, zero imputation, monthly
//!   aggregation, flood-label merging, and label encoding.
//! - [`preprocess`]: seeded train/test splitting and standard scaling with
//!   fit-on-train semantics.
//! - [`models`]: four classifiers (logistic regression, SVC with SMO, KNN,
//!   decision tree) behind one prediction/scoring contract.
//! - [`metrics`]: confusion matrix, classification reports, ROC curves, AUC.
//! - [`pipeline`]: config-driven experiment runner emitting deterministic
//!   report artifacts.
//! - [`synth`]: synthetic rainfall/flood data generator for desk-scale runs.

pub mod dataset;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod synth;
