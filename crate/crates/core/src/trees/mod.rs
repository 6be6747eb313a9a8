//! Random trees and random forests.

mod forest;
mod split;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::forest::{predict_forest, train_random_forest, ForestConfig, ForestModel};
pub use self::split::{best_split, Split, SplitRule};
pub use self::tree::{predict_tree, train_random_tree, RandomTree, TreeConfig, TreeNode};

pub const DEFAULT_TREE_COUNT: usize = 100;
pub const DEFAULT_BAG_FRACTION: f64 = 0.66;

/// Number of features examined at each node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureCount {
    /// floor(log2(F)) + 1
    #[default]
    Auto,
    Fixed(usize),
}

impl FeatureCount {
    pub fn resolve(self, feature_count: usize) -> Result<usize> {
        match self {
            FeatureCount::Auto => Ok(feature_count.max(1).ilog2() as usize + 1),
            FeatureCount::Fixed(k) if k >= 1 && k <= feature_count => Ok(k),
            FeatureCount::Fixed(k) => Err(Error::InvalidArgument(format!(
                "k_features must be in 1..={feature_count}, got {k}"
            ))),
        }
    }
}
