use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::Columns;
use super::tree::{grow, RandomTree, TreeConfig};
use super::{FeatureCount, DEFAULT_BAG_FRACTION, DEFAULT_TREE_COUNT};
use crate::dataset::{check_arity, Dataset, FeatureSchema, Record};
use crate::distribution::{argmax, ClassDistribution};
use crate::error::{Error, Result};
use crate::learner::Classifier;
use crate::rng::{derive_seed, seeded};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub tree_count: usize,
    /// Bag size as a fraction of the training set.
    pub bag_fraction: f64,
    pub r_features: FeatureCount,
    /// Draw bags with replacement instead of without.
    pub with_replacement: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            tree_count: DEFAULT_TREE_COUNT,
            bag_fraction: DEFAULT_BAG_FRACTION,
            r_features: FeatureCount::Auto,
            with_replacement: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    schema: FeatureSchema,
    config: ForestConfig,
    trees: Vec<RandomTree>,
}

impl ForestModel {
    pub fn trees(&self) -> &[RandomTree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Votes per class, one per tree.
    pub fn votes(&self, record: &Record) -> Result<Vec<usize>> {
        check_arity(&self.schema, record)?;
        let mut votes = vec![0; self.schema.class_count()];
        for tree in &self.trees {
            let counts: Vec<f64> = tree.leaf_counts(record)?.iter().map(|&c| f64::from(c)).collect();
            votes[argmax(&counts)] += 1;
        }
        Ok(votes)
    }
}

/// Trains `tree_count` trees, tree `i` on a bag drawn with seed
/// `derive_seed(seed, i)` and grown with that same seed.
pub fn train_random_forest(ds: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    ds.ensure_non_empty()?;
    if cfg.tree_count == 0 {
        return Err(Error::InvalidArgument("tree_count must be at least 1".into()));
    }
    if !(cfg.bag_fraction > 0.0 && cfg.bag_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bag_fraction must be in (0, 1], got {}",
            cfg.bag_fraction
        )));
    }
    cfg.r_features.resolve(ds.feature_count())?;
    let n = ds.len();
    let bag_size = ((cfg.bag_fraction * n as f64).round() as usize).clamp(1, n);
    let columns = Columns::new(ds);
    let trees = (0..cfg.tree_count)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, i as u64);
            let mut rng = seeded(seed);
            let mut bag: Vec<usize> = if cfg.with_replacement {
                (0..bag_size).map(|_| rng.gen_range(0..n)).collect()
            } else {
                index::sample(&mut rng, n, bag_size).into_vec()
            };
            bag.sort_unstable();
            let tree_cfg = TreeConfig {
                k_features: cfg.r_features,
                min_leaf: 1,
                max_depth: None,
                seed,
            };
            grow(&columns, bag, &tree_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        schema: ds.schema().clone(),
        config: *cfg,
        trees,
    })
}

/// Vote fractions; each tree votes for its leaf's majority class.
pub fn predict_forest(model: &ForestModel, record: &Record) -> Result<ClassDistribution> {
    let votes = model.votes(record)?;
    let total = model.trees.len() as f64;
    ClassDistribution::new(votes.iter().map(|&v| v as f64 / total).collect())
}

impl Classifier for ForestModel {
    fn class_count(&self) -> usize {
        self.schema.class_count()
    }

    fn predict(&self, record: &Record) -> Result<ClassDistribution> {
        predict_forest(self, record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Feature;
    use crate::trees::{predict_tree, train_random_tree};

    fn dataset(n: usize) -> Dataset {
        let schema = FeatureSchema::new(
            vec![
                Feature::numeric("x"),
                Feature::numeric("y"),
                Feature::nominal("p", ["tcp", "udp", "icmp"]),
            ],
            vec!["normal".into(), "anomaly".into()],
        )
        .unwrap();
        let records = (0..n)
            .map(|i| {
                let x = (i * 37 % 101) as f64;
                let y = (i * 13 % 17) as f64;
                let p = i % 3;
                let label = usize::from(x + 3.0 * y > 70.0 || p == 2 && x > 30.0);
                Record::new(vec![x, y, p as f64], label)
            })
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn single_full_bag_tree_equals_random_tree() {
        let ds = dataset(120);
        let cfg = ForestConfig { tree_count: 1, bag_fraction: 1.0, seed: 9, ..ForestConfig::default() };
        let forest = train_random_forest(&ds, &cfg).unwrap();
        let tree = train_random_tree(
            &ds,
            &TreeConfig { seed: derive_seed(9, 0), ..TreeConfig::default() },
        )
        .unwrap();
        assert_eq!(forest.trees()[0], tree);
        for r in ds.records() {
            let f = predict_forest(&forest, r).unwrap();
            assert_eq!(f.argmax(), predict_tree(&tree, r).unwrap().argmax());
        }
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let ds = dataset(150);
        let cfg = ForestConfig { tree_count: 5, seed: 3, ..ForestConfig::default() };
        let a = train_random_forest(&ds, &cfg).unwrap();
        let b = train_random_forest(&ds, &cfg).unwrap();
        assert_eq!(a, b);
        let more = train_random_forest(&ds, &ForestConfig { tree_count: 8, ..cfg }).unwrap();
        assert_eq!(&more.trees()[..5], a.trees());
    }

    #[test]
    fn votes_are_exact_fractions_and_match_majority() {
        let ds = dataset(200);
        let cfg = ForestConfig { tree_count: 7, seed: 1, ..ForestConfig::default() };
        let forest = train_random_forest(&ds, &cfg).unwrap();
        for r in ds.records().iter().take(50) {
            let p = predict_forest(&forest, r).unwrap();
            let mut votes = [0usize; 2];
            for t in forest.trees() {
                votes[predict_tree(t, r).unwrap().argmax()] += 1;
            }
            for (c, &v) in votes.iter().enumerate() {
                assert_eq!(p.get(c), v as f64 / 7.0);
            }
            let majority = if votes[1] > votes[0] { 1 } else { 0 };
            assert_eq!(p.argmax(), majority);
        }
    }

    #[test]
    fn with_replacement_bags_and_config_errors() {
        let ds = dataset(60);
        let cfg = ForestConfig { tree_count: 3, with_replacement: true, ..ForestConfig::default() };
        assert_eq!(train_random_forest(&ds, &cfg).unwrap().trees().len(), 3);
        assert!(train_random_forest(&ds, &ForestConfig { tree_count: 0, ..cfg }).is_err());
        assert!(train_random_forest(&ds, &ForestConfig { bag_fraction: 0.0, ..cfg }).is_err());
        assert!(train_random_forest(&ds, &ForestConfig { bag_fraction: 1.5, ..cfg }).is_err());
    }
}
