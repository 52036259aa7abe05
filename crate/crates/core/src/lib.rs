//! Selection of interpretable teaching sequences for multiclass visual
//! categories, simulated random-walk learners to evaluate them, and the
//! file formats shared with the session service and CLI.
//!
//! The pipeline is: load a [`model::Dataset`] of precomputed feature vectors,
//! attach explanation maps and difficulties ([`explanations`]), build a
//! hypothesis space on the training split ([`hypothesis`]), filter the pool to
//! teachable items, select a teaching set ([`teacher`]) and evaluate it with
//! simulated learners ([`simulator`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod explanations;
pub mod hypothesis;
pub mod learner;
pub mod model;
pub mod simulator;
pub mod synthetic;
pub mod teacher;

pub use error::{Error, Result};
pub use exec::Exec;
pub use model::{
    Dataset, ExplanationMap, Hypothesis, HypothesisSpace, Item, LearnerParams, Split, Strategy,
    TeachingSet,
};
