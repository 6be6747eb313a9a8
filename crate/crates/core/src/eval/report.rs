use std::fmt::Write as _;
use std::io::Write;

use crate::eval::EvalReport;

pub const REPORT_CSV_HEADER: &str = "algorithm,mode,instances,correct,incorrect,accuracy,tp_rate,fp_rate,precision,recall,f_measure,rmse,auc,build_time_seconds_nondeterministic";

/// One line of a comparison table.
#[derive(Clone, Debug)]
pub struct ReportRow<'a> {
    pub algorithm: String,
    /// How the numbers were obtained, e.g. `cv10` or `resubstitution`.
    pub mode: String,
    pub report: &'a EvalReport,
    pub auc: Option<f64>,
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow<'_>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{REPORT_CSV_HEADER}")?;
    for row in rows {
        let r = row.report;
        let total = r.confusion.total();
        let correct = r.confusion.correct();
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.3}",
            row.algorithm,
            row.mode,
            total,
            correct,
            total - correct,
            r.accuracy,
            r.weighted_tp_rate,
            r.weighted_fp_rate,
            r.weighted_precision,
            r.weighted_recall,
            r.weighted_f_measure,
            r.rmse,
            row.auc.map_or(String::new(), |a| format!("{a:.6}")),
            r.build_time_seconds,
        )?;
    }
    Ok(())
}

/// Human-readable block: instance counts, weighted rates, RMSE, build time
/// and the confusion matrix.
pub fn format_report(title: &str, report: &EvalReport, auc: Option<f64>) -> String {
    let total = report.confusion.total();
    let correct = report.confusion.correct();
    let pct = |n: u64| 100.0 * n as f64 / total.max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(s, "=== {title} ===");
    let _ = writeln!(s, "{:<36}{:>10} ({:.2}%)", "Correctly Classified Instances", correct, pct(correct));
    let _ = writeln!(
        s,
        "{:<36}{:>10} ({:.2}%)",
        "Incorrectly Classified Instances",
        total - correct,
        pct(total - correct)
    );
    let _ = writeln!(s, "{:<36}{:>10}", "Total Number of Instances", total);
    for (name, v) in [
        ("TP Rate", report.weighted_tp_rate),
        ("FP Rate", report.weighted_fp_rate),
        ("Precision", report.weighted_precision),
        ("Recall", report.weighted_recall),
        ("F-Measure", report.weighted_f_measure),
    ] {
        let _ = writeln!(s, "{name:<36}{v:>10.3}");
    }
    let _ = writeln!(s, "{:<36}{:>10.4}", "Root mean squared error", report.rmse);
    if let Some(a) = auc {
        let _ = writeln!(s, "{:<36}{:>10.4}", "ROC area", a);
    }
    let _ = writeln!(
        s,
        "{:<36}{:>10.2} seconds (wall clock, varies between runs)",
        "Time taken to build model", report.build_time_seconds
    );
    let labels = report.confusion.labels();
    let width = labels.iter().map(String::len).max().unwrap_or(0).max(8) + 2;
    let _ = writeln!(s, "Confusion matrix (rows actual, columns predicted):");
    let _ = write!(s, "{:width$}", "");
    for l in labels {
        let _ = write!(s, "{l:>width$}");
    }
    let _ = writeln!(s);
    for (l, row) in labels.iter().zip(report.confusion.rows()) {
        let _ = write!(s, "{l:<width$}");
        for c in row {
            let _ = write!(s, "{c:>width$}");
        }
        let _ = writeln!(s);
    }
    s
}
