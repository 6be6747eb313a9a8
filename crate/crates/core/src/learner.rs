//! The common classifier interface and the algorithm-independent training
//! entry point used by cross-validation, feature selection and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bayes_net::{train_k2_classifier, K2Classifier, K2Config};
use crate::dataset::{check_arity, Dataset, FeatureSchema, Record};
use crate::discretize::{
    apply_discretizer, fit_discretizer, numeric_features, DiscretizeMethod, Discretizer,
    DEFAULT_BINS,
};
use crate::distribution::ClassDistribution;
use crate::ensemble::{train_combined, CombinedConfig, CombinedModel};
use crate::error::{Error, Result};
use crate::featsel::{info_gain_rank, project};
use crate::naive_bayes::{predict_nb, train_nb, NbModel, NbOptions};
use crate::trees::{
    train_random_forest, train_random_tree, ForestConfig, ForestModel, RandomTree, TreeConfig,
};

/// A trained model that scores single records.
pub trait Classifier: Send + Sync {
    fn class_count(&self) -> usize;

    fn predict(&self, record: &Record) -> Result<ClassDistribution>;

    /// Hard label together with the distribution. Defaults to the argmax.
    fn predict_labeled(&self, record: &Record) -> Result<(usize, ClassDistribution)> {
        let d = self.predict(record)?;
        Ok((d.argmax(), d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Nb,
    NbDisc,
    K2bn,
    Rtree,
    Rforest,
    Combined,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Nb,
        Algorithm::NbDisc,
        Algorithm::K2bn,
        Algorithm::Rtree,
        Algorithm::Rforest,
        Algorithm::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nb => "nb",
            Algorithm::NbDisc => "nb-disc",
            Algorithm::K2bn => "k2bn",
            Algorithm::Rtree => "rtree",
            Algorithm::Rforest => "rforest",
            Algorithm::Combined => "combined",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown algorithm `{s}` (expected nb, nb-disc, k2bn, rtree, rforest or combined)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscNbConfig {
    pub nb: NbOptions,
    pub method: DiscretizeMethod,
    pub bins: usize,
}

impl Default for DiscNbConfig {
    fn default() -> Self {
        DiscNbConfig {
            nb: NbOptions::default(),
            method: DiscretizeMethod::default(),
            bins: DEFAULT_BINS,
        }
    }
}

/// Everything needed to train one model. Fitted preprocessing (discretizers,
/// feature rankings) happens inside `train`, so cross-validation refits it
/// per fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerConfig {
    Nb(NbOptions),
    NbDisc(DiscNbConfig),
    K2bn(K2Config),
    Rtree(TreeConfig),
    Rforest(ForestConfig),
    Combined { config: CombinedConfig, seed: u64 },
    /// Rank features by information gain, keep the best `top_n`, train `inner`.
    TopRanked { top_n: usize, inner: Box<LearnerConfig> },
    /// Train `inner` on a fixed feature subset.
    Subset { features: Vec<usize>, inner: Box<LearnerConfig> },
}

impl LearnerConfig {
    /// Default configuration of `algorithm` with its seeds set to `seed`.
    pub fn defaults(algorithm: Algorithm, seed: u64) -> Self {
        match algorithm {
            Algorithm::Nb => LearnerConfig::Nb(NbOptions::default()),
            Algorithm::NbDisc => LearnerConfig::NbDisc(DiscNbConfig::default()),
            Algorithm::K2bn => LearnerConfig::K2bn(K2Config::default()),
            Algorithm::Rtree => LearnerConfig::Rtree(TreeConfig { seed, ..TreeConfig::default() }),
            Algorithm::Rforest => {
                LearnerConfig::Rforest(ForestConfig { seed, ..ForestConfig::default() })
            }
            Algorithm::Combined => LearnerConfig::Combined {
                config: CombinedConfig::default(),
                seed,
            },
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            LearnerConfig::Nb(_) => Algorithm::Nb,
            LearnerConfig::NbDisc(_) => Algorithm::NbDisc,
            LearnerConfig::K2bn(_) => Algorithm::K2bn,
            LearnerConfig::Rtree(_) => Algorithm::Rtree,
            LearnerConfig::Rforest(_) => Algorithm::Rforest,
            LearnerConfig::Combined { .. } => Algorithm::Combined,
            LearnerConfig::TopRanked { inner, .. } | LearnerConfig::Subset { inner, .. } => {
                inner.algorithm()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainedModel {
    Nb(NbModel),
    NbDisc { discretizer: Option<Discretizer>, nb: NbModel },
    K2bn(K2Classifier),
    Rtree(RandomTree),
    Rforest(ForestModel),
    Combined(Box<CombinedModel>),
    /// Inner model sees only `features` of the input schema.
    Projected {
        input: FeatureSchema,
        features: Vec<usize>,
        inner: Box<TrainedModel>,
    },
}

pub fn train(config: &LearnerConfig, ds: &Dataset) -> Result<TrainedModel> {
    ds.ensure_non_empty()?;
    Ok(match config {
        LearnerConfig::Nb(opts) => TrainedModel::Nb(train_nb(ds, *opts)?),
        LearnerConfig::NbDisc(cfg) => {
            let numeric = numeric_features(ds.schema());
            if numeric.is_empty() {
                TrainedModel::NbDisc {
                    discretizer: None,
                    nb: train_nb(ds, cfg.nb)?,
                }
            } else {
                let d = fit_discretizer(ds, &numeric, cfg.method, cfg.bins)?;
                let nb = train_nb(&apply_discretizer(&d, ds)?, cfg.nb)?;
                TrainedModel::NbDisc {
                    discretizer: Some(d),
                    nb,
                }
            }
        }
        LearnerConfig::K2bn(cfg) => TrainedModel::K2bn(train_k2_classifier(ds, cfg)?),
        LearnerConfig::Rtree(cfg) => TrainedModel::Rtree(train_random_tree(ds, cfg)?),
        LearnerConfig::Rforest(cfg) => TrainedModel::Rforest(train_random_forest(ds, cfg)?),
        LearnerConfig::Combined { config, seed } => {
            TrainedModel::Combined(Box::new(train_combined(ds, config, *seed)?))
        }
        LearnerConfig::TopRanked { top_n, inner } => {
            let ranking = info_gain_rank(ds)?;
            let mut features = ranking.top(*top_n);
            features.sort_unstable();
            train_projected(ds, features, inner)?
        }
        LearnerConfig::Subset { features, inner } => train_projected(ds, features.clone(), inner)?,
    })
}

fn train_projected(ds: &Dataset, features: Vec<usize>, inner: &LearnerConfig) -> Result<TrainedModel> {
    let projected = project(ds, &features)?;
    Ok(TrainedModel::Projected {
        input: ds.schema().clone(),
        features,
        inner: Box::new(train(inner, &projected)?),
    })
}

impl Classifier for TrainedModel {
    fn class_count(&self) -> usize {
        match self {
            TrainedModel::Nb(m) => m.class_count(),
            TrainedModel::NbDisc { nb, .. } => nb.class_count(),
            TrainedModel::K2bn(m) => m.class_count(),
            TrainedModel::Rtree(m) => m.class_count(),
            TrainedModel::Rforest(m) => m.class_count(),
            TrainedModel::Combined(m) => m.class_count(),
            TrainedModel::Projected { inner, .. } => inner.class_count(),
        }
    }

    fn predict(&self, record: &Record) -> Result<ClassDistribution> {
        self.predict_labeled(record).map(|(_, d)| d)
    }

    fn predict_labeled(&self, record: &Record) -> Result<(usize, ClassDistribution)> {
        let argmax = |d: ClassDistribution| (d.argmax(), d);
        match self {
            TrainedModel::Nb(m) => predict_nb(m, record).map(argmax),
            TrainedModel::NbDisc { discretizer, nb } => {
                check_arity(nb.schema(), record)?;
                match discretizer {
                    Some(d) => predict_nb(nb, &d.transform_record(record)),
                    None => predict_nb(nb, record),
                }
                .map(argmax)
            }
            TrainedModel::K2bn(m) => m.predict_labeled(record),
            TrainedModel::Rtree(m) => m.predict_labeled(record),
            TrainedModel::Rforest(m) => m.predict_labeled(record),
            TrainedModel::Combined(m) => m.predict_labeled(record),
            TrainedModel::Projected { input, features, inner } => {
                check_arity(input, record)?;
                let values = features.iter().map(|&f| record.values[f]).collect();
                inner.predict_labeled(&Record::new(values, record.label))
            }
        }
    }
}
