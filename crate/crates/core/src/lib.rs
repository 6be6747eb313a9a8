//! Intrusion-detection classifiers for NSL-KDD connection records.
//!
//! The crate covers the whole offline pipeline: loading and partitioning the
//! data, discretization, Naive Bayes, K2-learned Bayesian networks with
//! junction-tree inference, random trees and forests, feature selection,
//! the three-member combined detector, and cross-validated evaluation.

pub mod bayes_net;
pub mod dataset;
pub mod discretize;
pub mod distribution;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod featsel;
pub mod learner;
pub mod model_file;
pub mod naive_bayes;
pub mod rng;
pub mod trees;

mod entropy;

pub use distribution::ClassDistribution;
pub use error::{Error, Result};
