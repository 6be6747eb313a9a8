//! Discrete Bayesian networks: K2 structure search, CPT estimation and
//! exact inference on a junction tree.
//!
//! Nodes `0..F` are the dataset's features and node `F` is the class.
//! Every feature must be nominal; discretize numeric features first.

mod classifier;
mod cpt;
mod data;
mod factor;
mod jtree;
mod k2;
mod structure;

pub use self::classifier::{train_k2_classifier, K2Classifier, K2Config};
pub use self::cpt::{fit_cpts, BayesNetModel, Cpt};
pub use self::data::DiscreteData;
pub use self::factor::Factor;
pub use self::jtree::{
    build_junction_tree, predict_bn, query_class_marginal, query_marginals, JunctionTree,
};
pub use self::k2::{k2_score, k2_search, k2_search_traced, K2Options, K2Trace};
pub use self::structure::NetworkStructure;

pub const DEFAULT_ALPHA: f64 = 1.0;
/// Parent budget per feature node, not counting the class.
pub const DEFAULT_MAX_PARENTS: usize = 2;
