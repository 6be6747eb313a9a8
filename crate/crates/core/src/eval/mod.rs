//! Confusion matrices, the weighted metric suite, ROC curves and
//! cross-validation.

mod cv;
mod metrics;
mod report;
mod roc;

pub use self::cv::{cross_validate, CrossValidation};
pub use self::metrics::{
    confusion, evaluate, evaluate_predictions, metrics, predict_dataset, ClassMetrics,
    ConfusionMatrix, EvalReport, Prediction,
};
pub use self::report::{format_report, write_report_csv, ReportRow, REPORT_CSV_HEADER};
pub use self::roc::{detection_scores, pair_count_auc, roc_points, RocCurve, RocPoint};
