use std::time::Instant;

use crate::dataset::{stratified_folds, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::eval::{evaluate_predictions, predict_dataset, EvalReport, Prediction};
use crate::learner::{train, LearnerConfig};

#[derive(Clone, Debug)]
pub struct CrossValidation {
    /// Pooled over all folds; `build_time_seconds` is the per-fold mean.
    pub report: EvalReport,
    /// Out-of-fold prediction for every record, in record order.
    pub predictions: Vec<Prediction>,
    pub folds: FoldPlan,
    pub fold_build_seconds: Vec<f64>,
}

/// Stratified k-fold cross-validation. Each fold trains from scratch on the
/// other folds, so fitted preprocessing never sees the held-out records.
pub fn cross_validate(
    learner: &LearnerConfig,
    ds: &Dataset,
    k: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("cross-validation needs k >= 2, got {k}")));
    }
    let folds = stratified_folds(ds, k, seed)?;
    let mut slots: Vec<Option<Prediction>> = vec![None; ds.len()];
    let mut fold_build_seconds = Vec::with_capacity(k);
    for fold in 0..k {
        let test_idx = folds.test_indices(fold);
        if test_idx.is_empty() {
            fold_build_seconds.push(0.0);
            continue;
        }
        let train_set = ds.subset(&folds.train_indices(fold));
        let test_set = ds.subset(&test_idx);
        let start = Instant::now();
        let model = train(learner, &train_set)?;
        fold_build_seconds.push(start.elapsed().as_secs_f64());
        for (i, p) in test_idx.into_iter().zip(predict_dataset(&model, &test_set)?) {
            slots[i] = Some(p);
        }
    }
    let predictions: Vec<Prediction> = slots
        .into_iter()
        .map(|p| p.expect("every record belongs to exactly one fold"))
        .collect();
    let mut report = evaluate_predictions(&predictions, ds.schema().class_values())?;
    report.build_time_seconds = fold_build_seconds.iter().sum::<f64>() / k as f64;
    Ok(CrossValidation {
        report,
        predictions,
        folds,
        fold_build_seconds,
    })
}
