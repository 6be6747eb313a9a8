use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nids_core::dataset::{load_dataset, sample_fraction, Dataset, LabelMode};
use nids_core::discretize::DiscretizeMethod;
use nids_core::ensemble::{evaluate_combined, CombinedModel};
use nids_core::eval::{
    cross_validate, detection_scores, evaluate_predictions, format_report, predict_dataset,
    roc_points, write_report_csv, EvalReport, Prediction, ReportRow, RocCurve,
};
use nids_core::featsel::{
    info_gain_rank, subset_accuracy, wrapper_search, SearchStrategy, WrapperOptions,
    DEFAULT_MAX_STALE, DEFAULT_WRAPPER_FOLDS,
};
use nids_core::learner::{self, Algorithm, LearnerConfig, TrainedModel};
use nids_core::model_file::ModelFile;
use nids_core::trees::FeatureCount;
use nids_core::{Error, Result};

use crate::args::{Opts, StrategyArg};
use crate::output::{emit, write_atomic};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_FOLDS: usize = 10;
/// Fraction of the data used for the reduced-sample resubstitution run.
const SAMPLE_FRACTION: f64 = 0.2;

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| usage(format!("--{flag} is required")))
}

impl Opts {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn folds(&self) -> usize {
        self.folds.unwrap_or(DEFAULT_FOLDS)
    }

    fn label_mode(&self) -> LabelMode {
        self.labels.map(Into::into).unwrap_or_default()
    }

    fn algorithm(&self) -> Result<Algorithm> {
        self.algo.map(Into::into).ok_or_else(|| usage("--algo is required"))
    }
}

fn parse_feature_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| usage(format!("--features: `{s}` is not a feature index")))
        })
        .collect()
}

fn parse_k(raw: &str) -> Result<FeatureCount> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(FeatureCount::Auto);
    }
    raw.parse()
        .map(FeatureCount::Fixed)
        .map_err(|_| usage(format!("--k-features must be a number or `auto`, got `{raw}`")))
}

/// Default configuration of `algorithm` with the per-algorithm flags applied.
pub fn learner_config(opts: &Opts, algorithm: Algorithm) -> Result<LearnerConfig> {
    let seed = opts.seed();
    let mut cfg = LearnerConfig::defaults(algorithm, seed);
    let k = opts.k_features.as_deref().map(parse_k).transpose()?;
    match &mut cfg {
        LearnerConfig::NbDisc(c) => {
            if let Some(m) = opts.disc_method {
                c.method = m.into();
            }
            if let Some(b) = opts.bins {
                c.bins = b;
            }
        }
        LearnerConfig::K2bn(c) => {
            if let Some(m) = opts.disc_method {
                c.method = m.into();
            }
            if let Some(b) = opts.bins {
                c.bins = b;
            }
            if let Some(p) = opts.max_parents {
                c.max_parents = p;
            }
        }
        LearnerConfig::Rtree(c) => {
            if let Some(k) = k {
                c.k_features = k;
            }
        }
        LearnerConfig::Rforest(c) => {
            if let Some(k) = k {
                c.r_features = k;
            }
            if let Some(t) = opts.trees {
                c.tree_count = t;
            }
            if let Some(f) = opts.bag_fraction {
                c.bag_fraction = f;
            }
            c.with_replacement = opts.with_replacement;
        }
        LearnerConfig::Combined { config: c, .. } => {
            if let Some(m) = opts.disc_method {
                c.k2.method = m.into();
            }
            if let Some(b) = opts.bins {
                c.k2.bins = b;
            }
            if let Some(p) = opts.max_parents {
                c.k2.max_parents = p;
            }
            if let Some(k) = k {
                c.tree.k_features = k;
                c.forest.r_features = k;
            }
            if let Some(t) = opts.trees {
                c.forest.tree_count = t;
            }
            if let Some(f) = opts.bag_fraction {
                c.forest.bag_fraction = f;
            }
            c.forest.with_replacement = opts.with_replacement;
            if let Some(f) = opts.fusion {
                c.fusion = f.into();
            }
        }
        _ => {}
    }
    if let Some(raw) = &opts.features {
        cfg = LearnerConfig::Subset {
            features: parse_feature_list(raw)?,
            inner: Box::new(cfg),
        };
    } else if let Some(n) = opts.top_n {
        if n == 0 {
            return Err(usage("--top-n must be at least 1"));
        }
        cfg = LearnerConfig::TopRanked {
            top_n: n,
            inner: Box::new(cfg),
        };
    }
    Ok(cfg)
}

fn normal_index(ds: &Dataset) -> usize {
    ds.schema().class_index("normal").unwrap_or(0)
}

fn roc_of(predictions: &[Prediction], normal: usize) -> Option<RocCurve> {
    roc_points(&detection_scores(predictions, normal)).ok()
}

fn csv_bytes(rows: &[ReportRow<'_>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_report_csv(rows, &mut buf).map_err(|e| Error::io(Path::new("<buffer>"), e))?;
    Ok(buf)
}

pub fn train(opts: &Opts) -> Result<()> {
    let algorithm = opts.algorithm()?;
    let data = required(&opts.data, "data")?;
    let model_path = required(&opts.model, "model")?;
    let config = learner_config(opts, algorithm)?;
    let ds = load_dataset(data, opts.label_mode())?;
    let start = Instant::now();
    let model = learner::train(&config, &ds)?;
    let seconds = start.elapsed().as_secs_f64();
    let file = ModelFile::new(config, model, ds.schema(), opts.seed());
    write_atomic(model_path, file.to_text()?.as_bytes())?;
    println!("Trained {algorithm} on {} records (seed {})", ds.len(), opts.seed());
    println!("Time taken to build model: {seconds:.2} seconds");
    println!("Model written to {}", model_path.display());
    Ok(())
}

fn load_model_and_test(opts: &Opts) -> Result<(ModelFile, Dataset, PathBuf)> {
    let model_path = required(&opts.model, "model")?;
    let test = opts
        .test
        .as_deref()
        .or(opts.data.as_deref())
        .ok_or_else(|| usage("--test (or --data) is required"))?
        .to_path_buf();
    let file = ModelFile::load(model_path)?;
    let ds = load_dataset(&test, opts.label_mode())?;
    file.check_schema(ds.schema())?;
    Ok((file, ds, test))
}

pub fn eval(opts: &Opts) -> Result<()> {
    let (file, ds, test) = load_model_and_test(opts)?;
    let title = format!("{} on {}", file.algorithm, test.display());
    let (report, auc) = match &file.model {
        TrainedModel::Combined(m) => {
            let ev = evaluate_combined(m, &ds)?;
            print_members(m, &ev.member_reports);
            (ev.report, Some(ev.roc.auc))
        }
        model => {
            let preds = predict_dataset(model, &ds)?;
            let auc = roc_of(&preds, normal_index(&ds)).map(|r| r.auc);
            (evaluate_predictions(&preds, ds.schema().class_values())?, auc)
        }
    };
    print!("{}", format_report(&title, &report, auc));
    if let Some(out) = &opts.out {
        let row = ReportRow {
            algorithm: file.algorithm.to_string(),
            mode: "test-set".into(),
            report: &report,
            auc,
        };
        write_atomic(out, &csv_bytes(&[row])?)?;
    }
    Ok(())
}

fn print_members(model: &CombinedModel, reports: &[EvalReport; 3]) {
    println!("Fusion rule: {}", model.fusion());
    for (name, r) in nids_core::ensemble::MEMBER_NAMES.iter().zip(reports) {
        println!("  member {name:<8} accuracy {:.4}%", 100.0 * r.accuracy);
    }
}

pub fn crossval(opts: &Opts) -> Result<()> {
    let algorithm = opts.algorithm()?;
    let data = required(&opts.data, "data")?;
    let config = learner_config(opts, algorithm)?;
    let ds = load_dataset(data, opts.label_mode())?;
    let k = opts.folds();
    let cv = cross_validate(&config, &ds, k, opts.seed())?;
    let auc = roc_of(&cv.predictions, normal_index(&ds)).map(|r| r.auc);
    let title = format!("{algorithm}, {k}-fold cross-validation, seed {}", opts.seed());
    print!("{}", format_report(&title, &cv.report, auc));
    if let Some(out) = &opts.out {
        let row = ReportRow {
            algorithm: algorithm.to_string(),
            mode: format!("cv{k}"),
            report: &cv.report,
            auc,
        };
        write_atomic(out, &csv_bytes(&[row])?)?;
    }
    Ok(())
}

pub fn roc(opts: &Opts) -> Result<()> {
    let (curve, label) = if opts.model.is_some() {
        let (file, ds, _) = load_model_and_test(opts)?;
        let curve = match &file.model {
            TrainedModel::Combined(m) => evaluate_combined(m, &ds)?.roc,
            model => roc_points(&detection_scores(&predict_dataset(model, &ds)?, normal_index(&ds)))?,
        };
        (curve, file.algorithm.to_string())
    } else {
        let algorithm = opts.algorithm()?;
        let data = required(&opts.data, "data")?;
        let ds = load_dataset(data, opts.label_mode())?;
        let cv = cross_validate(&learner_config(opts, algorithm)?, &ds, opts.folds(), opts.seed())?;
        (roc_points(&detection_scores(&cv.predictions, normal_index(&ds)))?, algorithm.to_string())
    };
    let mut buf = Vec::new();
    curve
        .write_csv(&mut buf)
        .map_err(|e| Error::io(Path::new("<buffer>"), e))?;
    emit(opts.out.as_deref(), &buf)?;
    eprintln!("{label}: AUC {:.6} over {} points", curve.auc, curve.points.len());
    Ok(())
}

pub fn rank(opts: &Opts) -> Result<()> {
    let data = required(&opts.data, "data")?;
    let ds = load_dataset(data, opts.label_mode())?;
    let ranking = info_gain_rank(&ds)?;
    let mut buf = Vec::new();
    ranking
        .write_csv(&mut buf)
        .map_err(|e| Error::io(Path::new("<buffer>"), e))?;
    emit(opts.out.as_deref(), &buf)
}

pub fn wrapper(opts: &Opts) -> Result<()> {
    let data = required(&opts.data, "data")?;
    let algorithm = opts.algo.map(Into::into).unwrap_or(Algorithm::Nb);
    let evaluator = learner_config(opts, algorithm)?;
    let ds = load_dataset(data, opts.label_mode())?;
    let strategy = match opts.strategy.unwrap_or(StrategyArg::Greedy) {
        StrategyArg::Greedy => SearchStrategy::GreedyForward,
        StrategyArg::BestFirst => SearchStrategy::BestFirst {
            max_stale: DEFAULT_MAX_STALE,
        },
    };
    let options = WrapperOptions {
        evaluator: evaluator.clone(),
        folds: opts.folds.unwrap_or(DEFAULT_WRAPPER_FOLDS),
        seed: opts.seed(),
        strategy,
        max_features: opts.max_features,
    };
    let subset = wrapper_search(&ds, &options)?;
    let final_folds = opts.final_folds.unwrap_or(DEFAULT_FOLDS);
    let rescored = subset_accuracy(&ds, &subset.indices, &evaluator, final_folds, opts.seed())?;
    let names: Vec<&str> = subset
        .indices
        .iter()
        .map(|&i| ds.schema().feature(i).name.as_str())
        .collect();
    let indices: Vec<String> = subset.indices.iter().map(ToString::to_string).collect();
    println!("Selected features: {} ({})", indices.join(","), names.join(", "));
    println!(
        "Accuracy with {}-fold search CV: {:.4}%",
        options.folds,
        100.0 * subset.achieved_score
    );
    println!("Accuracy with {final_folds}-fold CV: {:.4}%", 100.0 * rescored);
    if let Some(out) = &opts.out {
        let mut buf = Vec::new();
        subset
            .write_csv(ds.schema(), &mut buf)
            .map_err(|e| Error::io(Path::new("<buffer>"), e))?;
        write_atomic(out, &buf)?;
    }
    Ok(())
}

struct Run {
    algorithm: String,
    mode: String,
    report: EvalReport,
    auc: Option<f64>,
}

pub fn report(opts: &Opts) -> Result<()> {
    let data = required(&opts.data, "data")?;
    let ds = load_dataset(data, opts.label_mode())?;
    let k = opts.folds();
    let seed = opts.seed();
    let normal = normal_index(&ds);
    let binary = ds.class_count() == 2;
    let mut runs: Vec<Run> = Vec::new();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "# data={} records={} folds={k} seed={seed} threads={} platform={}/{}",
        data.display(),
        ds.len(),
        rayon::current_num_threads(),
        std::env::consts::OS,
        std::env::consts::ARCH
    );

    let mut cv_run = |name: String, config: &LearnerConfig, text: &mut String| -> Result<()> {
        let cv = cross_validate(config, &ds, k, seed)?;
        let auc = roc_of(&cv.predictions, normal).map(|r| r.auc);
        text.push_str(&format_report(&format!("{name}, {k}-fold cross-validation"), &cv.report, auc));
        runs.push(Run {
            algorithm: name,
            mode: format!("cv{k}"),
            report: cv.report,
            auc,
        });
        Ok(())
    };

    for algorithm in Algorithm::ALL {
        if algorithm == Algorithm::Combined && !binary {
            continue;
        }
        let base = learner_config(opts, algorithm)?;
        if algorithm == Algorithm::NbDisc && opts.disc_method.is_none() {
            for method in DiscretizeMethod::ALL {
                let mut cfg = base.clone();
                if let LearnerConfig::NbDisc(c) = &mut cfg {
                    c.method = method;
                }
                cv_run(format!("nb-disc[{method}]"), &cfg, &mut text)?;
            }
        } else {
            cv_run(algorithm.to_string(), &base, &mut text)?;
        }
    }

    let best_disc = runs
        .iter()
        .filter(|r| r.algorithm.starts_with("nb-disc["))
        .max_by(|a, b| a.report.accuracy.total_cmp(&b.report.accuracy));
    if let Some(best) = best_disc {
        let _ = writeln!(
            text,
            "Best discretization for nb-disc: {} ({:.2}%)",
            best.algorithm,
            100.0 * best.report.accuracy
        );
    }

    if binary {
        let config = learner_config(opts, Algorithm::Combined)?;
        let sample = sample_fraction(&ds, SAMPLE_FRACTION, seed, true)?;
        for (mode, set) in [("resubstitution", &ds), ("resubstitution-20pct", &sample)] {
            let start = Instant::now();
            let model = learner::train(&config, set)?;
            let build = start.elapsed().as_secs_f64();
            let TrainedModel::Combined(m) = &model else {
                unreachable!("combined config trains a combined model")
            };
            let mut ev = evaluate_combined(m, set)?;
            ev.report.build_time_seconds = build;
            text.push_str(&format_report(
                &format!("combined, {mode} ({} records)", set.len()),
                &ev.report,
                Some(ev.roc.auc),
            ));
            runs.push(Run {
                algorithm: "combined".into(),
                mode: mode.into(),
                report: ev.report,
                auc: Some(ev.roc.auc),
            });
        }
    }

    let _ = writeln!(text, "\n{:<24}{:<22}{:>10}{:>9}{:>9}", "algorithm", "mode", "accuracy%", "rmse", "auc");
    for r in &runs {
        let _ = writeln!(
            text,
            "{:<24}{:<22}{:>10.2}{:>9.4}{:>9}",
            r.algorithm,
            r.mode,
            100.0 * r.report.accuracy,
            r.report.rmse,
            r.auc.map_or("-".into(), |a| format!("{a:.4}"))
        );
    }
    print!("{text}");
    if let Some(out) = &opts.out {
        let rows: Vec<ReportRow<'_>> = runs
            .iter()
            .map(|r| ReportRow {
                algorithm: r.algorithm.clone(),
                mode: r.mode.clone(),
                report: &r.report,
                auc: r.auc,
            })
            .collect();
        write_atomic(out, &csv_bytes(&rows)?)?;
    }
    Ok(())
}
