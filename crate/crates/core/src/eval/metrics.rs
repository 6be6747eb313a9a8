use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distribution::ClassDistribution;
use crate::error::{Error, Result};
use crate::learner::Classifier;

/// Rows are actual classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn count(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual][predicted]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|c| self.counts[c][c]).sum()
    }

    pub fn class_count(&self) -> usize {
        self.labels.len()
    }
}

pub fn confusion(pairs: &[(usize, usize)], labels: &[String]) -> Result<ConfusionMatrix> {
    let n = labels.len();
    let mut counts = vec![vec![0u64; n]; n];
    for &(actual, predicted) in pairs {
        if actual >= n || predicted >= n {
            return Err(Error::InvalidArgument(format!(
                "class index out of range in ({actual}, {predicted}) for {n} classes"
            )));
        }
        counts[actual][predicted] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labels.to_vec(),
        counts,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub actual: usize,
    pub predicted: usize,
    pub distribution: ClassDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub support: u64,
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub weighted_tp_rate: f64,
    pub weighted_fp_rate: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f_measure: f64,
    pub rmse: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Wall-clock training time; not reproducible between runs.
    pub build_time_seconds: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class rates weighted by class support, plus RMSE over probability
/// vectors against one-hot truth.
pub fn metrics(cm: &ConfusionMatrix, predictions: &[Prediction]) -> Result<EvalReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("cannot compute metrics on zero predictions".into()));
    }
    let k = cm.class_count();
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let tp = cm.counts[c][c];
        let support: u64 = cm.counts[c].iter().sum();
        let predicted: u64 = (0..k).map(|a| cm.counts[a][c]).sum();
        let fp = predicted - tp;
        let negatives = total - support;
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics {
            support,
            tp_rate: recall,
            fp_rate: ratio(fp, negatives),
            precision,
            recall,
            f_measure,
        });
    }
    let weighted = |get: fn(&ClassMetrics) -> f64| {
        per_class.iter().map(|m| m.support as f64 * get(m)).sum::<f64>() / total as f64
    };
    let mut sq = 0.0;
    for p in predictions {
        if p.distribution.len() != k {
            return Err(Error::InvalidArgument("distribution width differs from class count".into()));
        }
        for (c, &q) in p.distribution.probabilities().iter().enumerate() {
            let y = if c == p.actual { 1.0 } else { 0.0 };
            sq += (q - y) * (q - y);
        }
    }
    let rmse = if predictions.is_empty() {
        0.0
    } else {
        (sq / (predictions.len() * k) as f64).sqrt()
    };
    Ok(EvalReport {
        accuracy: ratio(cm.correct(), total),
        weighted_tp_rate: weighted(|m| m.tp_rate),
        weighted_fp_rate: weighted(|m| m.fp_rate),
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f_measure: weighted(|m| m.f_measure),
        rmse,
        per_class,
        confusion: cm.clone(),
        build_time_seconds: 0.0,
    })
}

pub fn evaluate_predictions(predictions: &[Prediction], labels: &[String]) -> Result<EvalReport> {
    let pairs: Vec<(usize, usize)> = predictions.iter().map(|p| (p.actual, p.predicted)).collect();
    metrics(&confusion(&pairs, labels)?, predictions)
}

/// Predictions for every record, in record order.
pub fn predict_dataset<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<Vec<Prediction>> {
    ds.records()
        .par_iter()
        .map(|r| {
            let (predicted, distribution) = model.predict_labeled(r)?;
            Ok(Prediction {
                actual: r.label,
                predicted,
                distribution,
            })
        })
        .collect()
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<EvalReport> {
    let preds = predict_dataset(model, ds)?;
    evaluate_predictions(&preds, ds.schema().class_values())
}
