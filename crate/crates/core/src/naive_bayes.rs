//! Naive Bayes over mixed nominal and numeric features.
//!
//! Nominal features use Laplace-smoothed frequency tables, numeric features
//! a per-class Gaussian with a floored standard deviation. Scores are summed
//! in log space.

use serde::{Deserialize, Serialize};

use crate::dataset::{check_arity, Dataset, FeatureKind, FeatureSchema, Record};
use crate::distribution::ClassDistribution;
use crate::error::{Error, Result};
use crate::learner::Classifier;

pub const DEFAULT_SMOOTHING: f64 = 1.0;
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-3;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbOptions {
    /// Laplace constant for priors and nominal tables.
    pub smoothing: f64,
    /// Lower bound on Gaussian standard deviations, in feature units.
    pub sigma_floor: f64,
}

impl Default for NbOptions {
    fn default() -> Self {
        NbOptions {
            smoothing: DEFAULT_SMOOTHING,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeatureModel {
    /// `probs[class][value]`
    Nominal { probs: Vec<Vec<f64>> },
    /// Per-class mean and standard deviation.
    Gaussian { mean: Vec<f64>, std: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    schema: FeatureSchema,
    class_priors: Vec<f64>,
    features: Vec<FeatureModel>,
    options: NbOptions,
}

impl NbModel {
    /// Assembles a model from explicit parameters.
    pub fn from_parts(
        schema: FeatureSchema,
        class_priors: Vec<f64>,
        features: Vec<FeatureModel>,
        options: NbOptions,
    ) -> Result<Self> {
        if class_priors.len() != schema.class_count() || features.len() != schema.feature_count() {
            return Err(Error::InvalidArgument(
                "parameter shapes do not match the schema".into(),
            ));
        }
        Ok(NbModel {
            schema,
            class_priors,
            features,
            options,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn class_priors(&self) -> &[f64] {
        &self.class_priors
    }

    pub fn feature_model(&self, f: usize) -> &FeatureModel {
        &self.features[f]
    }

    pub fn options(&self) -> NbOptions {
        self.options
    }
}

pub fn train_nb(ds: &Dataset, options: NbOptions) -> Result<NbModel> {
    ds.ensure_non_empty()?;
    if options.smoothing.is_nan() || options.smoothing < 0.0 || options.sigma_floor.is_nan() || options.sigma_floor <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "smoothing must be >= 0 and the sigma floor > 0, got {:?}",
            options
        )));
    }
    let schema = ds.schema();
    let classes = schema.class_count();
    let alpha = options.smoothing;
    let class_counts: Vec<f64> = ds.class_counts().into_iter().map(|c| c as f64).collect();
    // Classes absent from the training data get no probability mass.
    let seen = class_counts.iter().filter(|&&c| c > 0.0).count() as f64;
    let n = ds.len() as f64;
    let class_priors: Vec<f64> = class_counts
        .iter()
        .map(|&c| if c > 0.0 { (c + alpha) / (n + alpha * seen) } else { 0.0 })
        .collect();

    let mut features = Vec::with_capacity(schema.feature_count());
    for (f, feature) in schema.features().iter().enumerate() {
        let model = match &feature.kind {
            FeatureKind::Nominal(values) => {
                let card = values.len();
                let mut counts = vec![vec![0.0; card]; classes];
                for r in ds.records() {
                    counts[r.label][r.nominal(f)] += 1.0;
                }
                let probs = counts
                    .into_iter()
                    .zip(&class_counts)
                    .map(|(row, &nc)| {
                        if nc > 0.0 {
                            let denom = nc + alpha * card as f64;
                            row.into_iter().map(|c| (c + alpha) / denom).collect()
                        } else {
                            vec![1.0 / card as f64; card]
                        }
                    })
                    .collect();
                FeatureModel::Nominal { probs }
            }
            FeatureKind::Numeric => {
                let mut sum = vec![0.0; classes];
                for r in ds.records() {
                    sum[r.label] += r.values[f];
                }
                let mean: Vec<f64> = sum
                    .iter()
                    .zip(&class_counts)
                    .map(|(s, &c)| if c > 0.0 { s / c } else { 0.0 })
                    .collect();
                let mut sq = vec![0.0; classes];
                for r in ds.records() {
                    let d = r.values[f] - mean[r.label];
                    sq[r.label] += d * d;
                }
                let std = sq
                    .iter()
                    .zip(&class_counts)
                    .map(|(s, &c)| {
                        let sd = if c > 0.0 { (s / c).sqrt() } else { 0.0 };
                        sd.max(options.sigma_floor)
                    })
                    .collect();
                FeatureModel::Gaussian { mean, std }
            }
        };
        features.push(model);
    }
    Ok(NbModel {
        schema: schema.clone(),
        class_priors,
        features,
        options,
    })
}

/// `log P(class) + sum_k log P(x_k | class)`, unnormalized.
pub fn log_posterior(model: &NbModel, record: &Record, class: usize) -> Result<f64> {
    check_arity(&model.schema, record)?;
    if class >= model.class_priors.len() {
        return Err(Error::InvalidArgument(format!("class index {class} out of range")));
    }
    let mut score = model.class_priors[class].ln();
    for (f, fm) in model.features.iter().enumerate() {
        let x = record.values[f];
        score += match fm {
            FeatureModel::Nominal { probs } => {
                let row = &probs[class];
                let p = row.get(x as usize).filter(|_| x >= 0.0).ok_or_else(|| {
                    Error::SchemaMismatch(format!("feature {f}: nominal index {x} out of range"))
                })?;
                p.ln()
            }
            FeatureModel::Gaussian { mean, std } => {
                let z = (x - mean[class]) / std[class];
                -LN_SQRT_2PI - std[class].ln() - 0.5 * z * z
            }
        };
    }
    Ok(score)
}

pub fn predict_nb(model: &NbModel, record: &Record) -> Result<ClassDistribution> {
    let scores = (0..model.class_priors.len())
        .map(|c| log_posterior(model, record, c))
        .collect::<Result<Vec<_>>>()?;
    if scores.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Ok(ClassDistribution::from_weights(&model.class_priors));
    }
    Ok(ClassDistribution::from_log_scores(&scores))
}

impl Classifier for NbModel {
    fn class_count(&self) -> usize {
        self.class_priors.len()
    }

    fn predict(&self, record: &Record) -> Result<ClassDistribution> {
        predict_nb(self, record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Feature, FeatureSchema};
    use proptest::prelude::*;

    fn toy() -> Dataset {
        let schema = FeatureSchema::new(
            vec![Feature::nominal("v", ["v1", "v2"])],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                Record::new(vec![0.0], 0),
                Record::new(vec![0.0], 0),
                Record::new(vec![1.0], 1),
            ],
        )
        .unwrap()
    }

    fn opts(alpha: f64) -> NbOptions {
        NbOptions {
            smoothing: alpha,
            ..NbOptions::default()
        }
    }

    #[test]
    fn symmetric_priors() {
        let schema = FeatureSchema::new(vec![Feature::numeric("x")], vec!["A".into(), "B".into()])
            .unwrap();
        let ds = Dataset::new(
            schema,
            vec![
                Record::new(vec![1.0], 0),
                Record::new(vec![2.0], 0),
                Record::new(vec![3.0], 1),
                Record::new(vec![4.0], 1),
            ],
        )
        .unwrap();
        let m = train_nb(&ds, opts(0.0)).unwrap();
        assert_eq!(m.class_priors(), &[0.5, 0.5]);
    }

    #[test]
    fn laplace_table_matches_hand_count() {
        let m = train_nb(&toy(), opts(1.0)).unwrap();
        match m.feature_model(0) {
            FeatureModel::Nominal { probs } => {
                assert_eq!(probs[0][0], 0.75); // (2+1)/(2+2)
                assert_eq!(probs[1][0], 1.0 / 3.0); // (0+1)/(1+2)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn log_posterior_and_prediction_on_toy() {
        let m = train_nb(&toy(), opts(1.0)).unwrap();
        let r = Record::new(vec![0.0], 0);
        let prior_a: f64 = 3.0 / 5.0; // (2+1)/(3+2)
        let prior_b: f64 = 2.0 / 5.0;
        let la = log_posterior(&m, &r, 0).unwrap();
        assert!((la - (prior_a.ln() + 0.75f64.ln())).abs() < 1e-12);
        let lb = log_posterior(&m, &r, 1).unwrap();
        assert!((lb - (prior_b.ln() + (1.0f64 / 3.0).ln())).abs() < 1e-12);
        let d = predict_nb(&m, &r).unwrap();
        let pa = prior_a * 0.75;
        let pb = prior_b / 3.0;
        assert!((d.get(0) - pa / (pa + pb)).abs() < 1e-12);
    }

    #[test]
    fn equal_priors_normalization() {
        // Equal priors, P(v1|A)=0.75, P(v1|B)=0.25 -> P(A|v1)=0.75.
        let m = NbModel::from_parts(
            toy().schema().clone(),
            vec![0.5, 0.5],
            vec![FeatureModel::Nominal {
                probs: vec![vec![0.75, 0.25], vec![0.25, 0.75]],
            }],
            opts(1.0),
        )
        .unwrap();
        let la = log_posterior(&m, &Record::new(vec![0.0], 0), 0).unwrap();
        assert!((la - (0.5f64.ln() + 0.75f64.ln())).abs() < 1e-15);
        let d = predict_nb(&m, &Record::new(vec![0.0], 0)).unwrap();
        assert!((d.get(0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uniform_model_is_symmetric() {
        let schema = FeatureSchema::new(
            vec![Feature::nominal("v", ["a", "b", "c"]), Feature::numeric("x")],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let m = NbModel::from_parts(
            schema,
            vec![0.5, 0.5],
            vec![
                FeatureModel::Nominal {
                    probs: vec![vec![1.0 / 3.0; 3]; 2],
                },
                FeatureModel::Gaussian {
                    mean: vec![0.0, 0.0],
                    std: vec![1.0, 1.0],
                },
            ],
            NbOptions::default(),
        )
        .unwrap();
        let r = Record::new(vec![2.0, 17.5], 0);
        assert_eq!(
            log_posterior(&m, &r, 0).unwrap(),
            log_posterior(&m, &r, 1).unwrap()
        );
        assert_eq!(predict_nb(&m, &r).unwrap().probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn single_class_training_set() {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("x"), Feature::nominal("v", ["a", "b"])],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let ds = Dataset::new(
            schema,
            vec![Record::new(vec![1.0, 0.0], 0), Record::new(vec![3.0, 1.0], 0)],
        )
        .unwrap();
        let m = train_nb(&ds, NbOptions::default()).unwrap();
        for x in [-100.0, 2.0, 1e6] {
            let d = predict_nb(&m, &Record::new(vec![x, 1.0], 1)).unwrap();
            assert_eq!(d.probabilities(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn sigma_floor_applies_to_constant_features() {
        let schema = FeatureSchema::new(vec![Feature::numeric("x")], vec!["A".into(), "B".into()])
            .unwrap();
        let ds = Dataset::new(
            schema,
            vec![Record::new(vec![5.0], 0), Record::new(vec![5.0], 0), Record::new(vec![1.0], 1)],
        )
        .unwrap();
        let m = train_nb(&ds, NbOptions::default()).unwrap();
        match m.feature_model(0) {
            FeatureModel::Gaussian { std, .. } => assert_eq!(std, &vec![1e-3, 1e-3]),
            other => panic!("{other:?}"),
        }
        let d = predict_nb(&m, &Record::new(vec![5.0], 0)).unwrap();
        assert!(d.get(0) > 0.99);
    }

    #[test]
    fn errors() {
        let schema = toy().schema().clone();
        assert!(train_nb(&Dataset::new(schema, vec![]).unwrap(), NbOptions::default()).is_err());
        let m = train_nb(&toy(), NbOptions::default()).unwrap();
        assert!(matches!(
            predict_nb(&m, &Record::new(vec![0.0, 1.0], 0)),
            Err(Error::SchemaMismatch(_))
        ));
        assert!(predict_nb(&m, &Record::new(vec![5.0], 0)).is_err());
    }

    fn mixed_dataset(rows: &[(u8, f64, usize)]) -> Dataset {
        let schema = FeatureSchema::new(
            vec![Feature::nominal("v", ["a", "b", "c"]), Feature::numeric("x")],
            vec!["A".into(), "B".into(), "C".into()],
        )
        .unwrap();
        let records = rows
            .iter()
            .map(|&(v, x, l)| Record::new(vec![f64::from(v), x], l))
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    proptest! {
        #[test]
        fn predictions_are_distributions(
            rows in prop::collection::vec((0u8..3, -10.0f64..10.0, 0usize..3), 1..40),
            probe in (0u8..3, -20.0f64..20.0),
        ) {
            let ds = mixed_dataset(&rows);
            let m = train_nb(&ds, NbOptions::default()).unwrap();
            let r = Record::new(vec![f64::from(probe.0), probe.1], 0);
            let d = predict_nb(&m, &r).unwrap();
            let sum: f64 = d.probabilities().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(d.probabilities().iter().all(|p| (0.0..=1.0).contains(p)));
            let scores: Vec<f64> = (0..3).map(|c| log_posterior(&m, &r, c).unwrap()).collect();
            prop_assert_eq!(d.argmax(), crate::distribution::argmax(&scores));
        }

        #[test]
        fn smoothing_keeps_seen_values_possible(
            rows in prop::collection::vec((0u8..3, 0usize..3), 3..30),
            probe in 0u8..3,
        ) {
            // Nominal-only model: with alpha > 0 no class with training data
            // is ever ruled out.
            let schema = FeatureSchema::new(
                vec![Feature::nominal("v", ["a", "b", "c"])],
                vec!["A".into(), "B".into(), "C".into()],
            ).unwrap();
            let records = rows.iter().map(|&(v, l)| Record::new(vec![f64::from(v)], l)).collect();
            let ds = Dataset::new(schema, records).unwrap();
            let m = train_nb(&ds, NbOptions::default()).unwrap();
            let d = predict_nb(&m, &Record::new(vec![f64::from(probe)], 0)).unwrap();
            for (c, &n) in ds.class_counts().iter().enumerate() {
                if n > 0 {
                    prop_assert!(d.get(c) > 0.0);
                }
            }
        }

        #[test]
        fn duplicating_the_training_set_changes_nothing(
            rows in prop::collection::vec((0u8..3, -10.0f64..10.0, 0usize..3), 1..30),
        ) {
            let ds = mixed_dataset(&rows);
            let doubled: Vec<_> = rows.iter().chain(rows.iter()).copied().collect();
            let ds2 = mixed_dataset(&doubled);
            let o = NbOptions { smoothing: 0.0, ..NbOptions::default() };
            let a = train_nb(&ds, o).unwrap();
            let b = train_nb(&ds2, o).unwrap();
            for (pa, pb) in a.class_priors().iter().zip(b.class_priors()) {
                prop_assert!((pa - pb).abs() < 1e-12);
            }
            for r in ds.records() {
                let da = predict_nb(&a, r).unwrap();
                let db = predict_nb(&b, r).unwrap();
                for (x, y) in da.probabilities().iter().zip(db.probabilities()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn uniform_extra_feature_shifts_scores_equally(
            rows in prop::collection::vec((0u8..3, -10.0f64..10.0, 0usize..3), 3..30),
            extra in 0u8..4,
        ) {
            let ds = mixed_dataset(&rows);
            let m = train_nb(&ds, NbOptions::default()).unwrap();
            let mut schema_features = m.schema().features().to_vec();
            schema_features.push(Feature::nominal("u", ["p", "q", "r", "s"]));
            let schema = FeatureSchema::new(schema_features, m.schema().class_values().to_vec()).unwrap();
            let mut fms: Vec<FeatureModel> = (0..2).map(|f| m.feature_model(f).clone()).collect();
            fms.push(FeatureModel::Nominal { probs: vec![vec![0.25; 4]; 3] });
            let m2 = NbModel::from_parts(schema, m.class_priors().to_vec(), fms, m.options()).unwrap();
            let r = &ds.records()[0];
            let mut r2 = r.clone();
            r2.values.push(f64::from(extra));
            for c in 0..3 {
                let a = log_posterior(&m, r, c).unwrap();
                let b = log_posterior(&m2, &r2, c).unwrap();
                if a.is_finite() {
                    prop_assert!((b - a - 0.25f64.ln()).abs() <= 1e-9 * a.abs().max(1.0));
                }
            }
            prop_assert_eq!(predict_nb(&m, r).unwrap().argmax(), predict_nb(&m2, &r2).unwrap().argmax());
        }
    }
}
