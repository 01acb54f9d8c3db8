//! Self-paced curriculum learning for binary code classifiers.
//!
//! Each epoch the current model scores every training sample; confident
//! correct predictions are easy and confident mistakes are hard. An age
//! threshold admits samples from easy to hard at a rate that adapts to the
//! training state, so mislabeled code tends to stay out of the updates.
//!
//! The crate bundles the curriculum engine ([`difficulty`], [`scheduler`],
//! [`selector`]), a reference training stack ([`features`], [`model`],
//! [`optim`], [`trainer`]), synthetic noisy corpora ([`corpus`]), metrics
//! ([`eval`]), the workflows used by the CLI ([`harness`]) and a stateful
//! handle for external training loops ([`session`]).

// `!(x >= 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod difficulty;
pub mod error;
pub mod eval;
pub mod features;
pub mod harness;
pub mod model;
pub mod optim;
pub mod scheduler;
pub mod selector;
pub mod session;
pub mod stats;
pub mod trainer;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    AgeState, DifficultyRecord, Label, Prediction, Sample, SelectionMask, SelectorConfig,
};
