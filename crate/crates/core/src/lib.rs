//! Temporal co-editing network analysis.
//!
//! The crate covers the full pipeline from raw activity to statistics:
//!
//! - [`model`]: commit and co-edit event logs, CSV ingestion, commit histories
//!   and the top-fraction (Pareto) developer filter.
//! - [`miner`]: a simplified git miner that emits co-edit edges `A -> B` when
//!   `A` changes a line last touched by `B`.
//! - [`burst`]: inter-event times, the burstiness coefficient and the commit
//!   timestamp shuffle null.
//! - [`cascade`]: trigger classification and greedy cascade-chain tracing.
//! - [`validate`]: co-edit timestamp shuffling, permutation tests and
//!   table-shaped reports.
//! - [`synth`]: random and planted-cascade ground-truth networks.
//! - [`churn`]: windowed feature extraction, SMOTE, balanced logistic
//!   regression and leave-one-repository-out evaluation.

pub mod burst;
pub mod cascade;
pub mod churn;
pub mod error;
pub mod miner;
pub mod model;
pub mod rng;
pub mod synth;
pub mod validate;

pub use error::{Error, Result};
pub use model::{CoEditEvent, CommitEvent, CommitHistory, DevId, EventLog};
