//! Information-gain ranking and wrapper subset search.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureSchema, Record};
use crate::discretize::{fit_discretizer, numeric_features, DiscretizeMethod, DEFAULT_BINS};
use crate::entropy::entropy;
use crate::error::{Error, Result};
use crate::eval::cross_validate;
use crate::learner::LearnerConfig;

pub const DEFAULT_WRAPPER_FOLDS: usize = 5;
/// Non-improving expansions tolerated by best-first search.
pub const DEFAULT_MAX_STALE: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub index: usize,
    pub name: String,
    pub score: f64,
}

/// Features by descending score, ties by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    entries: Vec<RankedFeature>,
}

impl FeatureRanking {
    pub fn entries(&self) -> &[RankedFeature] {
        &self.entries
    }

    /// Indices of the `n` best features, best first.
    pub fn top(&self, n: usize) -> Vec<usize> {
        self.entries.iter().take(n).map(|e| e.index).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "feature_index,feature_name,score")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.index, e.name, e.score)?;
        }
        Ok(())
    }
}

/// Scores every feature by H(class) - H(class | feature). Numeric features
/// are binned into ten equal-width intervals first.
pub fn info_gain_rank(ds: &Dataset) -> Result<FeatureRanking> {
    ds.ensure_non_empty()?;
    let schema = ds.schema();
    let numeric = numeric_features(schema);
    let disc = if numeric.is_empty() {
        None
    } else {
        Some(fit_discretizer(ds, &numeric, DiscretizeMethod::EqualWidth, DEFAULT_BINS)?)
    };
    let classes = schema.class_count();
    let class_counts: Vec<f64> = ds.class_counts().iter().map(|&c| c as f64).collect();
    let h_class = entropy(&class_counts);
    let n = ds.len() as f64;

    let mut entries: Vec<RankedFeature> = (0..schema.feature_count())
        .into_par_iter()
        .map(|f| {
            let (card, bin): (usize, Box<dyn Fn(f64) -> usize + Sync>) =
                match schema.feature(f).kind.cardinality() {
                    Some(c) => (c, Box::new(|v: f64| v as usize)),
                    None => {
                        let d = disc.as_ref().expect("numeric features were discretized");
                        let cuts = d.cuts(f).expect("numeric feature has cuts");
                        (cuts.len() + 1, Box::new(move |v: f64| crate::discretize::bin_of(cuts, v)))
                    }
                };
            let mut table = vec![vec![0.0; classes]; card];
            for r in ds.records() {
                table[bin(r.values[f])][r.label] += 1.0;
            }
            let conditional: f64 = table
                .iter()
                .map(|row| {
                    let m: f64 = row.iter().sum();
                    if m > 0.0 {
                        m / n * entropy(row)
                    } else {
                        0.0
                    }
                })
                .sum();
            RankedFeature {
                index: f,
                name: schema.feature(f).name.clone(),
                score: (h_class - conditional).clamp(0.0, h_class),
            }
        })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    Ok(FeatureRanking { entries })
}

/// Dataset restricted to `features`, in the given order.
pub fn project(ds: &Dataset, features: &[usize]) -> Result<Dataset> {
    if features.is_empty() {
        return Err(Error::InvalidArgument("feature selection is empty".into()));
    }
    let schema: FeatureSchema = ds.schema().project(features)?;
    let records = ds
        .records()
        .iter()
        .map(|r| Record::new(features.iter().map(|&f| r.values[f]).collect(), r.label))
        .collect();
    Ok(Dataset::from_parts(schema, records))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStrategy {
    GreedyForward,
    /// Forward best-first search that gives up after `max_stale` expansions
    /// in a row fail to beat the best subset.
    BestFirst { max_stale: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrapperOptions {
    pub evaluator: LearnerConfig,
    pub folds: usize,
    pub seed: u64,
    pub strategy: SearchStrategy,
    /// Upper bound on the subset size.
    pub max_features: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    /// Sorted.
    pub indices: Vec<usize>,
    /// Cross-validated accuracy of the evaluator on this subset.
    pub achieved_score: f64,
    /// Accuracy after each accepted forward step (greedy search only).
    pub trajectory: Vec<f64>,
}

impl FeatureSubset {
    pub fn write_csv<W: Write>(&self, schema: &FeatureSchema, mut out: W) -> std::io::Result<()> {
        writeln!(out, "feature_index,feature_name,score")?;
        for &i in &self.indices {
            writeln!(out, "{},{},{}", i, schema.feature(i).name, self.achieved_score)?;
        }
        Ok(())
    }
}

/// Cross-validated accuracy of `evaluator` restricted to `subset`.
pub fn subset_accuracy(
    ds: &Dataset,
    subset: &[usize],
    evaluator: &LearnerConfig,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let projected = project(ds, subset)?;
    Ok(cross_validate(evaluator, &projected, folds, seed)?.report.accuracy)
}

pub fn wrapper_search(ds: &Dataset, options: &WrapperOptions) -> Result<FeatureSubset> {
    ds.ensure_non_empty()?;
    if options.folds < 2 {
        return Err(Error::InvalidArgument("wrapper search needs at least 2 folds".into()));
    }
    let limit = options.max_features.unwrap_or(usize::MAX).min(ds.feature_count());
    if limit == 0 {
        return Err(Error::InvalidArgument("max_features must be at least 1".into()));
    }
    let evaluate_children = |base: &[usize]| -> Result<Vec<(Vec<usize>, f64)>> {
        (0..ds.feature_count())
            .filter(|f| !base.contains(f))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|f| {
                let mut s = base.to_vec();
                s.push(f);
                s.sort_unstable();
                let acc = subset_accuracy(ds, &s, &options.evaluator, options.folds, options.seed)?;
                Ok((s, acc))
            })
            .collect()
    };
    match options.strategy {
        SearchStrategy::GreedyForward => {
            let mut current: Vec<usize> = Vec::new();
            let mut score = f64::NEG_INFINITY;
            let mut trajectory = Vec::new();
            while current.len() < limit {
                // children come in increasing feature order, so strict `>`
                // keeps the lowest index on ties
                let best = evaluate_children(&current)?
                    .into_iter()
                    .fold(None, |b: Option<(Vec<usize>, f64)>, c| match b {
                        Some(b) if b.1 >= c.1 => Some(b),
                        _ => Some(c),
                    });
                match best {
                    Some((s, acc)) if acc > score => {
                        current = s;
                        score = acc;
                        trajectory.push(acc);
                    }
                    _ => break,
                }
            }
            Ok(FeatureSubset {
                indices: current,
                achieved_score: score,
                trajectory,
            })
        }
        SearchStrategy::BestFirst { max_stale } => {
            let mut open: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), f64::NEG_INFINITY)];
            let mut visited: HashSet<Vec<usize>> = HashSet::new();
            let mut best: (Vec<usize>, f64) = (Vec::new(), f64::NEG_INFINITY);
            let mut stale = 0;
            while !open.is_empty() && stale < max_stale.max(1) {
                // highest score first, then the lexicographically smallest subset
                let pick = (0..open.len())
                    .max_by(|&a, &b| {
                        open[a].1.total_cmp(&open[b].1).then_with(|| open[b].0.cmp(&open[a].0))
                    })
                    .expect("open list is non-empty");
                let (node, _) = open.swap_remove(pick);
                if node.len() >= limit {
                    continue;
                }
                let mut improved = false;
                for (child, acc) in evaluate_children(&node)? {
                    if !visited.insert(child.clone()) {
                        continue;
                    }
                    let smaller = (child.len(), &child) < (best.0.len(), &best.0);
                    if acc > best.1 || (acc == best.1 && smaller) {
                        improved |= acc > best.1;
                        best = (child.clone(), acc);
                    }
                    open.push((child, acc));
                }
                stale = if improved { 0 } else { stale + 1 };
            }
            if best.0.is_empty() {
                return Err(Error::Training("wrapper search evaluated no subset".into()));
            }
            Ok(FeatureSubset {
                indices: best.0,
                achieved_score: best.1,
                trajectory: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Feature;
    use crate::naive_bayes::NbOptions;

    fn h(p: &[f64]) -> f64 {
        let n: f64 = p.iter().sum();
        -p.iter().filter(|&&x| x > 0.0).map(|x| x / n * (x / n).log2()).sum::<f64>()
    }

    fn nominal_ds(cols: &[&[usize]], labels: &[usize]) -> Dataset {
        let features = (0..cols.len())
            .map(|i| Feature::nominal(format!("f{i}"), ["a", "b", "c"]))
            .collect();
        let schema = FeatureSchema::new(features, vec!["normal".into(), "anomaly".into()]).unwrap();
        let records = (0..labels.len())
            .map(|r| Record::new(cols.iter().map(|c| c[r] as f64).collect(), labels[r]))
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn ranking_hand_example() {
        let labels = [0, 0, 0, 0, 1, 1, 1, 1];
        let clean = [0, 0, 0, 0, 1, 1, 1, 1];
        let noisy = [0, 0, 0, 1, 1, 1, 0, 1];
        let constant = [2; 8];
        let ds = nominal_ds(&[&noisy, &constant, &clean], &labels);
        let ranking = info_gain_rank(&ds).unwrap();
        let hc = h(&[4.0, 4.0]);
        // noisy: value 0 holds (3 normal, 1 anomaly), value 1 holds (1, 3)
        let noisy_gain = hc - 0.5 * h(&[3.0, 1.0]) - 0.5 * h(&[1.0, 3.0]);
        assert_eq!(ranking.top(3), vec![2, 0, 1]);
        assert!((ranking.entries()[0].score - hc).abs() < 1e-12);
        assert!((ranking.entries()[1].score - noisy_gain).abs() < 1e-12);
        assert_eq!(ranking.entries()[2].score, 0.0);
    }

    #[test]
    fn numeric_features_are_binned_for_ranking() {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("x"), Feature::numeric("y")],
            vec!["normal".into(), "anomaly".into()],
        )
        .unwrap();
        let records = (0..20)
            .map(|i| Record::new(vec![(i % 3) as f64, i as f64], usize::from(i >= 10)))
            .collect();
        let ds = Dataset::new(schema, records).unwrap();
        let r = info_gain_rank(&ds).unwrap();
        assert_eq!(r.top(1), vec![1]);
        assert!((r.entries()[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_rules() {
        let ds = nominal_ds(&[&[0, 1], &[1, 2], &[2, 0]], &[0, 1]);
        assert_eq!(project(&ds, &[0, 1, 2]).unwrap(), ds);
        let twice = project(&project(&ds, &[0, 2]).unwrap(), &[1]).unwrap();
        assert_eq!(twice, project(&ds, &[2]).unwrap());
        assert!(project(&ds, &[]).is_err());
        assert!(project(&ds, &[3]).is_err());
    }

    fn options(strategy: SearchStrategy) -> WrapperOptions {
        WrapperOptions {
            evaluator: LearnerConfig::Nb(NbOptions::default()),
            folds: 2,
            seed: 1,
            strategy,
            max_features: None,
        }
    }

    #[test]
    fn perfect_single_feature_is_found_first() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let noise: Vec<usize> = (0..20).map(|i| (i / 3) % 3).collect();
        let ds = nominal_ds(&[&noise, &labels, &noise], &labels);
        for strategy in [SearchStrategy::GreedyForward, SearchStrategy::BestFirst { max_stale: 3 }] {
            let s = wrapper_search(&ds, &options(strategy)).unwrap();
            assert_eq!(s.indices, vec![1]);
            assert_eq!(s.achieved_score, 1.0);
        }
    }

    #[test]
    fn greedy_matches_exhaustive_search() {
        // class = (f0 + f2) mod 2 leaning; f1 is noise
        let mut cols = [Vec::new(), Vec::new(), Vec::new()];
        let mut labels = Vec::new();
        for i in 0..36usize {
            let a = i % 3;
            let b = (i / 3) % 3;
            let c = (i / 9) % 2;
            let label = usize::from(a == 2 || (a == 1 && c == 1));
            cols[0].push(a);
            cols[1].push(b);
            cols[2].push(c);
            labels.push(label);
        }
        let ds = nominal_ds(&[&cols[0], &cols[1], &cols[2]], &labels);
        let opts = options(SearchStrategy::GreedyForward);
        let found = wrapper_search(&ds, &opts).unwrap();
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        for mask in 1..8usize {
            let subset: Vec<usize> = (0..3).filter(|b| mask >> b & 1 == 1).collect();
            let acc = subset_accuracy(&ds, &subset, &opts.evaluator, 2, 1).unwrap();
            if acc > best.1 || (acc == best.1 && subset.len() < best.0.len()) {
                best = (subset, acc);
            }
        }
        assert_eq!(found.indices, vec![0, 2]);
        assert_eq!(found.indices, best.0);
        assert_eq!(found.achieved_score, best.1);
        assert!(found.trajectory.windows(2).all(|w| w[1] > w[0]));
        let rerun = subset_accuracy(&ds, &found.indices, &opts.evaluator, 2, 1).unwrap();
        assert_eq!(rerun, found.achieved_score);
    }

    #[test]
    fn subset_size_cap() {
        let labels: Vec<usize> = (0..24).map(|i| i % 2).collect();
        let a: Vec<usize> = (0..24).map(|i| (i % 4) / 2 + (i % 2)).collect();
        let b: Vec<usize> = (0..24).map(|i| (i / 2) % 3).collect();
        let ds = nominal_ds(&[&a, &b], &labels);
        let mut opts = options(SearchStrategy::GreedyForward);
        opts.max_features = Some(1);
        assert_eq!(wrapper_search(&ds, &opts).unwrap().indices.len(), 1);
        opts.folds = 1;
        assert!(wrapper_search(&ds, &opts).is_err());
    }
}
