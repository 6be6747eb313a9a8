use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::split::{better, Columns, Split, SplitRule, MIN_GAIN};
use super::FeatureCount;
use crate::dataset::{Dataset, Record};
use crate::distribution::ClassDistribution;
use crate::error::{Error, Result};
use crate::learner::Classifier;
use crate::rng::seeded;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub k_features: FeatureCount,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            k_features: FeatureCount::Auto,
            min_leaf: 1,
            max_depth: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        counts: Vec<u32>,
    },
    Numeric {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// `routes[v]` is the child for nominal value `v`; values with no
    /// training records route to the heaviest child.
    Nominal {
        feature: usize,
        routes: Vec<usize>,
        heaviest: usize,
    },
}

/// Nodes in preorder; the root is node 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomTree {
    nodes: Vec<TreeNode>,
    feature_count: usize,
    class_count: usize,
}

impl RandomTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Numeric { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                TreeNode::Nominal { routes, .. } => {
                    1 + routes.iter().map(|&c| go(nodes, c)).max().unwrap_or(0)
                }
            }
        }
        go(&self.nodes, 0)
    }

    /// Training class counts at the leaf `record` reaches.
    pub fn leaf_counts(&self, record: &Record) -> Result<&[u32]> {
        if record.values.len() != self.feature_count {
            return Err(Error::SchemaMismatch(format!(
                "record has {} features, tree expects {}",
                record.values.len(),
                self.feature_count
            )));
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { counts } => return Ok(counts),
                TreeNode::Numeric {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if record.values[*feature] <= *threshold { *left } else { *right },
                TreeNode::Nominal {
                    feature,
                    routes,
                    heaviest,
                } => {
                    let v = record.values[*feature];
                    at = if v >= 0.0 && v.fract() == 0.0 {
                        routes.get(v as usize).copied().unwrap_or(*heaviest)
                    } else {
                        *heaviest
                    };
                }
            }
        }
    }
}

enum Slot {
    Root,
    Left(usize),
    Right(usize),
    Values { node: usize, values: Vec<usize>, heaviest: bool },
}

struct Pending {
    indices: Vec<usize>,
    depth: usize,
    slot: Slot,
}

/// Grows an unpruned tree. Each node shuffles the features and examines
/// them in that order; after `k` features it stops as soon as some split has
/// positive gain, otherwise it keeps drawing until the features run out.
pub fn train_random_tree(ds: &Dataset, cfg: &TreeConfig) -> Result<RandomTree> {
    ds.ensure_non_empty()?;
    let columns = Columns::new(ds);
    let indices: Vec<usize> = (0..ds.len()).collect();
    grow(&columns, indices, cfg)
}

pub(crate) fn grow(columns: &Columns, indices: Vec<usize>, cfg: &TreeConfig) -> Result<RandomTree> {
    let feature_count = columns.values.len();
    let k = cfg.k_features.resolve(feature_count)?;
    if cfg.min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    if indices.is_empty() {
        return Err(Error::Training("cannot grow a tree on zero records".into()));
    }
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..feature_count).collect();
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut stack = vec![Pending {
        indices,
        depth: 0,
        slot: Slot::Root,
    }];

    while let Some(Pending { indices, depth, slot }) = stack.pop() {
        let id = nodes.len();
        match slot {
            Slot::Root => {}
            Slot::Left(p) => {
                if let TreeNode::Numeric { left, .. } = &mut nodes[p] {
                    *left = id;
                }
            }
            Slot::Right(p) => {
                if let TreeNode::Numeric { right, .. } = &mut nodes[p] {
                    *right = id;
                }
            }
            Slot::Values { node, values, heaviest: h } => {
                if let TreeNode::Nominal { routes, heaviest, .. } = &mut nodes[node] {
                    for v in values {
                        routes[v] = id;
                    }
                    if h {
                        *heaviest = id;
                    }
                }
            }
        }

        let counts = columns.class_counts(&indices);
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_capped = cfg.max_depth.is_some_and(|d| depth >= d);
        let split = if pure || depth_capped || indices.len() < 2 * cfg.min_leaf {
            None
        } else {
            order.shuffle(&mut rng);
            let mut best: Option<Split> = None;
            for (examined, &f) in order.iter().enumerate() {
                if examined >= k && best.is_some() {
                    break;
                }
                if let Some((gain, rule)) = columns.feature_split(&indices, f, &counts, cfg.min_leaf) {
                    if gain > MIN_GAIN && better(gain, f, best.as_ref()) {
                        best = Some(Split { feature: f, rule, gain });
                    }
                }
            }
            best
        };

        let Some(split) = split else {
            nodes.push(TreeNode::Leaf {
                counts: counts.iter().map(|&c| c as u32).collect(),
            });
            continue;
        };
        let column = &columns.values[split.feature];
        match split.rule {
            SplitRule::Threshold(threshold) => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    indices.iter().partition(|&&i| column[i] <= threshold);
                nodes.push(TreeNode::Numeric {
                    feature: split.feature,
                    threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                });
                stack.push(Pending { indices: right, depth: depth + 1, slot: Slot::Right(id) });
                stack.push(Pending { indices: left, depth: depth + 1, slot: Slot::Left(id) });
            }
            SplitRule::Multiway => {
                let card = columns.cards[split.feature].expect("multiway split on nominal feature");
                let mut groups = vec![Vec::new(); card];
                for &i in &indices {
                    groups[column[i] as usize].push(i);
                }
                // first value with the most records
                let heaviest = (0..card).fold(0, |b, v| if groups[v].len() > groups[b].len() { v } else { b });
                nodes.push(TreeNode::Nominal {
                    feature: split.feature,
                    routes: vec![usize::MAX; card],
                    heaviest: usize::MAX,
                });
                let empty: Vec<usize> = (0..card).filter(|&v| groups[v].is_empty()).collect();
                for v in (0..card).rev() {
                    if groups[v].is_empty() {
                        continue;
                    }
                    let mut values = vec![v];
                    if v == heaviest {
                        values.extend(&empty);
                    }
                    stack.push(Pending {
                        indices: std::mem::take(&mut groups[v]),
                        depth: depth + 1,
                        slot: Slot::Values { node: id, values, heaviest: v == heaviest },
                    });
                }
            }
        }
    }

    Ok(RandomTree {
        nodes,
        feature_count,
        class_count: columns.classes,
    })
}

/// Class distribution of the reached leaf's training records.
pub fn predict_tree(tree: &RandomTree, record: &Record) -> Result<ClassDistribution> {
    let counts: Vec<f64> = tree.leaf_counts(record)?.iter().map(|&c| f64::from(c)).collect();
    Ok(ClassDistribution::from_weights(&counts))
}

impl Classifier for RandomTree {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict(&self, record: &Record) -> Result<ClassDistribution> {
        predict_tree(self, record)
    }
}
