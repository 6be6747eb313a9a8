use serde::{Deserialize, Serialize};

use super::cpt::{fit_cpts_discrete, BayesNetModel};
use super::data::DiscreteData;
use super::jtree::{build_junction_tree, predict_bn, JunctionTree};
use super::k2::{k2_search_traced, K2Options};
use super::structure::NetworkStructure;
use super::{DEFAULT_ALPHA, DEFAULT_MAX_PARENTS};
use crate::dataset::{check_arity, Dataset, FeatureSchema, Record};
use crate::discretize::{apply_discretizer, fit_discretizer, numeric_features, DiscretizeMethod, Discretizer, DEFAULT_BINS};
use crate::distribution::ClassDistribution;
use crate::error::{Error, Result};
use crate::learner::Classifier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K2Config {
    pub method: DiscretizeMethod,
    pub bins: usize,
    /// Parents per feature node besides the class.
    pub max_parents: usize,
    pub alpha: f64,
}

impl Default for K2Config {
    fn default() -> Self {
        K2Config {
            method: DiscretizeMethod::default(),
            bins: DEFAULT_BINS,
            max_parents: DEFAULT_MAX_PARENTS,
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Discretizer, K2-learned network and its junction tree, ready to classify
/// raw records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct K2Classifier {
    input_schema: FeatureSchema,
    discretizer: Option<Discretizer>,
    model: BayesNetModel,
    jtree: JunctionTree,
}

impl K2Classifier {
    pub fn input_schema(&self) -> &FeatureSchema {
        &self.input_schema
    }

    pub fn discretizer(&self) -> Option<&Discretizer> {
        self.discretizer.as_ref()
    }

    pub fn model(&self) -> &BayesNetModel {
        &self.model
    }

    pub fn junction_tree(&self) -> &JunctionTree {
        &self.jtree
    }

    pub fn structure(&self) -> &NetworkStructure {
        self.model.structure()
    }
}

/// Discretizes numeric features, runs K2 with the class first in the
/// ordering (and free as a parent), then fits CPTs and compiles the
/// junction tree.
pub fn train_k2_classifier(ds: &Dataset, config: &K2Config) -> Result<K2Classifier> {
    ds.ensure_non_empty()?;
    let numeric = numeric_features(ds.schema());
    let (discretizer, discrete) = if numeric.is_empty() {
        (None, ds.clone())
    } else {
        let d = fit_discretizer(ds, &numeric, config.method, config.bins)?;
        let out = apply_discretizer(&d, ds)?;
        (Some(d), out)
    };
    let data = DiscreteData::from_dataset(&discrete)?;
    let class = data.class_node();
    let ordering: Vec<usize> = std::iter::once(class).chain(0..class).collect();
    let options = K2Options {
        max_parents: config.max_parents,
        alpha: config.alpha,
        uncounted_parent: Some(class),
    };
    let (structure, _) = k2_search_traced(&data, &ordering, &options)?;
    let model = fit_cpts_discrete(&data, &structure, config.alpha)?;
    let jtree = build_junction_tree(&structure)?;
    Ok(K2Classifier {
        input_schema: ds.schema().clone(),
        discretizer,
        model,
        jtree,
    })
}

impl Classifier for K2Classifier {
    fn class_count(&self) -> usize {
        self.input_schema.class_count()
    }

    fn predict(&self, record: &Record) -> Result<ClassDistribution> {
        check_arity(&self.input_schema, record)?;
        let discrete = match &self.discretizer {
            Some(d) => d.transform_record(record),
            None => record.clone(),
        };
        for (f, feature) in self.input_schema.features().iter().enumerate() {
            if let Some(card) = feature.kind.cardinality() {
                let v = discrete.values[f];
                if v.is_nan() || v < 0.0 || v.fract() != 0.0 || v as usize >= card {
                    return Err(Error::InvalidArgument(format!(
                        "value {v} of feature `{}` is not a valid category",
                        feature.name
                    )));
                }
            }
        }
        predict_bn(&self.model, &self.jtree, &discrete)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes_net::fit_cpts;
    use crate::dataset::Feature;
    use crate::naive_bayes::{predict_nb, train_nb, NbOptions};
    use crate::rng::seeded;
    use rand::Rng;

    fn nominal_dataset(seed: u64, rows: usize) -> Dataset {
        let mut rng = seeded(seed);
        let schema = FeatureSchema::new(
            vec![
                Feature::nominal("a", ["x", "y", "z"]),
                Feature::nominal("b", ["x", "y"]),
                Feature::nominal("c", ["x", "y", "z", "w"]),
            ],
            vec!["normal".into(), "anomaly".into()],
        )
        .unwrap();
        let records = (0..rows)
            .map(|i| {
                let label = i % 2;
                let a = if rng.gen_bool(0.7) { label } else { rng.gen_range(0..3) };
                let b = rng.gen_range(0..2);
                let c = if rng.gen_bool(0.5) { a } else { rng.gen_range(0..4) };
                Record::new(vec![a as f64, b as f64, c as f64], label)
            })
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn naive_structure_matches_naive_bayes() {
        for seed in 0..5 {
            let ds = nominal_dataset(seed, 60);
            let nb = train_nb(&ds, NbOptions::default()).unwrap();
            let structure = NetworkStructure::naive(4, 3).unwrap();
            let model = fit_cpts(&ds, &structure, 1.0).unwrap();
            let jt = build_junction_tree(&structure).unwrap();
            for r in ds.records() {
                let p = predict_bn(&model, &jt, r).unwrap();
                let q = predict_nb(&nb, r).unwrap();
                for (x, y) in p.probabilities().iter().zip(q.probabilities()) {
                    assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn learns_dependencies_and_classifies() {
        let ds = nominal_dataset(7, 400);
        let clf = train_k2_classifier(&ds, &K2Config::default()).unwrap();
        let s = clf.structure();
        assert!(s.is_acyclic());
        assert!(s.parents(0).contains(&3), "a depends on the class");
        assert!(s.parents(3).is_empty());
        for node in 0..3 {
            assert!(s.parents(node).iter().filter(|&&p| p != 3).count() <= 2);
        }
        let correct = ds
            .records()
            .iter()
            .filter(|r| clf.predict(r).unwrap().argmax() == r.label)
            .count();
        assert!(correct as f64 / ds.len() as f64 > 0.75);
    }

    #[test]
    fn numeric_features_are_discretized_first() {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("x"), Feature::nominal("p", ["tcp", "udp"])],
            vec!["normal".into(), "anomaly".into()],
        )
        .unwrap();
        let records = (0..40)
            .map(|i| Record::new(vec![i as f64, (i % 2) as f64], usize::from(i >= 20)))
            .collect();
        let ds = Dataset::new(schema, records).unwrap();
        let clf = train_k2_classifier(&ds, &K2Config::default()).unwrap();
        assert!(clf.discretizer().is_some());
        assert_eq!(clf.predict(&Record::new(vec![1.0, 0.0], 0)).unwrap().argmax(), 0);
        assert_eq!(clf.predict(&Record::new(vec![38.0, 1.0], 0)).unwrap().argmax(), 1);
        // out-of-range numeric values clamp into the edge bins
        assert_eq!(clf.predict(&Record::new(vec![1e9, 0.0], 0)).unwrap().argmax(), 1);
        assert!(clf.predict(&Record::new(vec![1.0, 5.0], 0)).is_err());
        assert!(clf.predict(&Record::new(vec![1.0], 0)).is_err());
    }
}
