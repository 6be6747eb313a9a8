//! The three-member combined detector: a K2 Bayesian network over
//! discretized features, a random tree and a random forest on raw features.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bayes_net::{train_k2_classifier, K2Classifier, K2Config};
use crate::dataset::{check_arity, Dataset, FeatureSchema, Record};
use crate::distribution::{argmax, ClassDistribution};
use crate::error::{Error, Result};
use crate::eval::{evaluate_predictions, roc_points, EvalReport, Prediction, RocCurve};
use crate::learner::Classifier;
use crate::trees::{
    predict_forest, predict_tree, train_random_forest, train_random_tree, ForestConfig,
    ForestModel, RandomTree, TreeConfig,
};

pub const MEMBER_NAMES: [&str; 3] = ["k2bn", "rtree", "rforest"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionRule {
    /// Anomaly as soon as any member says anomaly.
    #[default]
    AnomalyUnion,
    /// Modal member label, ties to anomaly.
    MajorityVote,
    /// Argmax of the mean member distribution.
    AverageProbability,
}

impl FusionRule {
    pub fn name(self) -> &'static str {
        match self {
            FusionRule::AnomalyUnion => "union",
            FusionRule::MajorityVote => "majority",
            FusionRule::AverageProbability => "average",
        }
    }
}

impl fmt::Display for FusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" | "anomaly-union" => Ok(FusionRule::AnomalyUnion),
            "majority" | "majority-vote" => Ok(FusionRule::MajorityVote),
            "average" | "average-probability" => Ok(FusionRule::AverageProbability),
            other => Err(Error::InvalidArgument(format!(
                "unknown fusion rule `{other}` (expected union, majority or average)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CombinedConfig {
    pub k2: K2Config,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
    pub fusion: FusionRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedModel {
    schema: FeatureSchema,
    normal: usize,
    anomaly: usize,
    bn: K2Classifier,
    rtree: RandomTree,
    rforest: ForestModel,
    fusion: FusionRule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombinedPrediction {
    pub label: usize,
    pub distribution: ClassDistribution,
    /// Member outputs in `MEMBER_NAMES` order.
    pub members: [ClassDistribution; 3],
    pub votes: [usize; 3],
}

impl CombinedModel {
    pub fn fusion(&self) -> FusionRule {
        self.fusion
    }

    /// Same members, different fusion rule.
    pub fn with_fusion(mut self, fusion: FusionRule) -> Self {
        self.fusion = fusion;
        self
    }

    pub fn anomaly_class(&self) -> usize {
        self.anomaly
    }

    pub fn normal_class(&self) -> usize {
        self.normal
    }

    pub fn bayes_net(&self) -> &K2Classifier {
        &self.bn
    }

    pub fn random_tree(&self) -> &RandomTree {
        &self.rtree
    }

    pub fn random_forest(&self) -> &ForestModel {
        &self.rforest
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }
}

/// Index of the anomaly class in a two-class schema: the class named
/// `anomaly`, else index 1.
fn binary_classes(schema: &FeatureSchema) -> Result<(usize, usize)> {
    if schema.class_count() != 2 {
        return Err(Error::InvalidArgument(format!(
            "the combined detector needs binary labels, got {} classes",
            schema.class_count()
        )));
    }
    let anomaly = schema.class_index("anomaly").unwrap_or(1);
    Ok((1 - anomaly, anomaly))
}

/// Trains the network stage on discretized data, then the tree and forest
/// on the raw data. `seed` seeds both tree members.
pub fn train_combined(ds: &Dataset, config: &CombinedConfig, seed: u64) -> Result<CombinedModel> {
    let (normal, anomaly) = binary_classes(ds.schema())?;
    ds.ensure_non_empty()?;
    let bn = train_k2_classifier(ds, &config.k2)?;
    let rtree = train_random_tree(ds, &TreeConfig { seed, ..config.tree })?;
    let rforest = train_random_forest(ds, &ForestConfig { seed, ..config.forest })?;
    Ok(CombinedModel {
        schema: ds.schema().clone(),
        normal,
        anomaly,
        bn,
        rtree,
        rforest,
        fusion: config.fusion,
    })
}

/// Fuses three member distributions into a label and a distribution.
///
/// Union reports the largest member anomaly probability, majority the vote
/// fractions, average the mean distribution.
pub fn fuse(
    rule: FusionRule,
    members: &[ClassDistribution; 3],
    normal: usize,
    anomaly: usize,
) -> (usize, ClassDistribution) {
    let votes: Vec<usize> = members.iter().map(ClassDistribution::argmax).collect();
    let pair = |p_anomaly: f64| {
        let mut p = vec![0.0; 2];
        p[anomaly] = p_anomaly;
        p[normal] = 1.0 - p_anomaly;
        ClassDistribution::new(p).expect("two complementary probabilities")
    };
    match rule {
        FusionRule::AnomalyUnion => {
            let label = if votes.contains(&anomaly) { anomaly } else { normal };
            let p = members.iter().map(|m| m.get(anomaly)).fold(0.0, f64::max);
            (label, pair(p))
        }
        FusionRule::MajorityVote => {
            let n_anomaly = votes.iter().filter(|&&v| v == anomaly).count();
            let n_normal = votes.len() - n_anomaly;
            let label = if n_anomaly >= n_normal { anomaly } else { normal };
            (label, pair(n_anomaly as f64 / votes.len() as f64))
        }
        FusionRule::AverageProbability => {
            let mut mean = vec![0.0; 2];
            for m in members {
                for (c, slot) in mean.iter_mut().enumerate() {
                    *slot += m.get(c) / 3.0;
                }
            }
            let label = argmax(&mean);
            (label, ClassDistribution::from_weights(&mean))
        }
    }
}

pub fn predict_combined(model: &CombinedModel, record: &Record) -> Result<CombinedPrediction> {
    check_arity(&model.schema, record)?;
    let members = [
        model.bn.predict(record)?,
        predict_tree(&model.rtree, record)?,
        predict_forest(&model.rforest, record)?,
    ];
    let votes = [members[0].argmax(), members[1].argmax(), members[2].argmax()];
    let (label, distribution) = fuse(model.fusion, &members, model.normal, model.anomaly);
    Ok(CombinedPrediction {
        label,
        distribution,
        members,
        votes,
    })
}

impl Classifier for CombinedModel {
    fn class_count(&self) -> usize {
        2
    }

    fn predict(&self, record: &Record) -> Result<ClassDistribution> {
        predict_combined(self, record).map(|p| p.distribution)
    }

    fn predict_labeled(&self, record: &Record) -> Result<(usize, ClassDistribution)> {
        predict_combined(self, record).map(|p| (p.label, p.distribution))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombinedEvaluation {
    pub report: EvalReport,
    /// Built from the mean member anomaly probability, whatever the fusion rule.
    pub roc: RocCurve,
    pub member_reports: [EvalReport; 3],
    pub predictions: Vec<CombinedPrediction>,
}

impl CombinedEvaluation {
    /// Anomalies flagged correctly by the fused detector and by each member.
    pub fn detections(&self) -> (u64, [u64; 3]) {
        let a = self.anomaly_index();
        (
            self.report.confusion.count(a, a),
            std::array::from_fn(|m| self.member_reports[m].confusion.count(a, a)),
        )
    }

    /// Normal records flagged as anomalies, fused and per member.
    pub fn false_positives(&self) -> (u64, [u64; 3]) {
        let a = self.anomaly_index();
        let n = 1 - a;
        (
            self.report.confusion.count(n, a),
            std::array::from_fn(|m| self.member_reports[m].confusion.count(n, a)),
        )
    }

    fn anomaly_index(&self) -> usize {
        self.report
            .confusion
            .labels()
            .iter()
            .position(|l| l == "anomaly")
            .unwrap_or(1)
    }
}

pub fn evaluate_combined(model: &CombinedModel, test: &Dataset) -> Result<CombinedEvaluation> {
    if test.schema().fingerprint() != model.schema.fingerprint() {
        return Err(Error::SchemaMismatch(
            "test data schema differs from the training schema".into(),
        ));
    }
    test.ensure_non_empty()?;
    use rayon::prelude::*;
    let predictions: Vec<CombinedPrediction> = test
        .records()
        .par_iter()
        .map(|r| predict_combined(model, r))
        .collect::<Result<_>>()?;
    let labels = model.schema.class_values();
    let fused: Vec<Prediction> = predictions
        .iter()
        .zip(test.records())
        .map(|(p, r)| Prediction {
            actual: r.label,
            predicted: p.label,
            distribution: p.distribution.clone(),
        })
        .collect();
    let report = evaluate_predictions(&fused, labels)?;
    let member_reports = [0, 1, 2].map(|m| {
        let preds: Vec<Prediction> = predictions
            .iter()
            .zip(test.records())
            .map(|(p, r)| Prediction {
                actual: r.label,
                predicted: p.votes[m],
                distribution: p.members[m].clone(),
            })
            .collect();
        evaluate_predictions(&preds, labels)
    });
    let [a, b, c] = member_reports;
    let member_reports = [a?, b?, c?];
    let scored: Vec<(f64, bool)> = predictions
        .iter()
        .zip(test.records())
        .map(|(p, r)| {
            let mean = p.members.iter().map(|m| m.get(model.anomaly)).sum::<f64>() / 3.0;
            (mean, r.label == model.anomaly)
        })
        .collect();
    let roc = roc_points(&scored)?;
    Ok(CombinedEvaluation {
        report,
        roc,
        member_reports,
        predictions,
    })
}
