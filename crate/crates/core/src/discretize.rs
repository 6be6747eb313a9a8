//! Numeric-to-interval discretization.
//!
//! Bin convention: a value's bin is the number of cut points `<= value`, so
//! cuts are left-inclusive lower boundaries and values outside the fitted
//! range fall into the first or last bin.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Feature, FeatureKind, FeatureSchema, Record};
use crate::entropy::{distinct_classes, entropy};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiscretizeMethod {
    #[default]
    EqualWidth,
    EqualFrequency,
    /// Supervised recursive entropy splitting with the Fayyad-Irani MDL stop.
    EntropyMdl,
}

impl DiscretizeMethod {
    pub const ALL: [DiscretizeMethod; 3] = [
        DiscretizeMethod::EqualWidth,
        DiscretizeMethod::EqualFrequency,
        DiscretizeMethod::EntropyMdl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiscretizeMethod::EqualWidth => "equal-width",
            DiscretizeMethod::EqualFrequency => "equal-frequency",
            DiscretizeMethod::EntropyMdl => "mdl",
        }
    }
}

impl fmt::Display for DiscretizeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiscretizeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-width" | "width" => Ok(DiscretizeMethod::EqualWidth),
            "equal-frequency" | "frequency" => Ok(DiscretizeMethod::EqualFrequency),
            "mdl" | "entropy-mdl" => Ok(DiscretizeMethod::EntropyMdl),
            other => Err(Error::InvalidArgument(format!(
                "unknown discretization method `{other}` (expected equal-width, equal-frequency or mdl)"
            ))),
        }
    }
}

pub const DEFAULT_BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    method: DiscretizeMethod,
    bin_count: usize,
    /// One entry per input feature; `Some` for the features this discretizer
    /// rewrites.
    cuts: Vec<Option<Vec<f64>>>,
    input_fingerprint: String,
    output_schema: FeatureSchema,
}

impl Discretizer {
    pub fn method(&self) -> DiscretizeMethod {
        self.method
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn cuts(&self, feature: usize) -> Option<&[f64]> {
        self.cuts.get(feature)?.as_deref()
    }

    pub fn output_schema(&self) -> &FeatureSchema {
        &self.output_schema
    }

    pub fn input_fingerprint(&self) -> &str {
        &self.input_fingerprint
    }

    /// Bin of `value` for a discretized feature.
    pub fn bin(&self, feature: usize, value: f64) -> usize {
        match &self.cuts[feature] {
            Some(cuts) => bin_of(cuts, value),
            None => panic!("feature {feature} is not discretized"),
        }
    }

    pub fn transform_record(&self, record: &Record) -> Record {
        let values = record
            .values
            .iter()
            .zip(&self.cuts)
            .map(|(&v, cuts)| match cuts {
                Some(cuts) => bin_of(cuts, v) as f64,
                None => v,
            })
            .collect();
        Record::new(values, record.label)
    }
}

#[inline]
pub fn bin_of(cuts: &[f64], value: f64) -> usize {
    cuts.partition_point(|&c| c <= value)
}

/// Fits cut points for the numeric features in `feature_indices`.
pub fn fit_discretizer(
    ds: &Dataset,
    feature_indices: &[usize],
    method: DiscretizeMethod,
    bin_count: usize,
) -> Result<Discretizer> {
    ds.ensure_non_empty()?;
    let schema = ds.schema();
    if method != DiscretizeMethod::EntropyMdl && bin_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "bin count must be >= 2, got {bin_count}"
        )));
    }
    let mut cuts: Vec<Option<Vec<f64>>> = vec![None; schema.feature_count()];
    for &f in feature_indices {
        let feature = schema.features().get(f).ok_or_else(|| {
            Error::InvalidArgument(format!("feature index {f} out of range"))
        })?;
        if feature.kind.is_nominal() {
            return Err(Error::InvalidArgument(format!(
                "feature {f} (`{}`) is nominal and cannot be discretized",
                feature.name
            )));
        }
        let column: Vec<f64> = ds.records().iter().map(|r| r.values[f]).collect();
        let c = match method {
            DiscretizeMethod::EqualWidth => equal_width_cuts(&column, bin_count),
            DiscretizeMethod::EqualFrequency => equal_frequency_cuts(&column, bin_count),
            DiscretizeMethod::EntropyMdl => {
                let labels: Vec<usize> = ds.records().iter().map(|r| r.label).collect();
                mdl_cuts(&column, &labels, ds.class_count())
            }
        };
        debug_assert!(c.windows(2).all(|w| w[0] < w[1]));
        cuts[f] = Some(c);
    }
    let output_schema = discretized_schema(schema, &cuts)?;
    Ok(Discretizer {
        method,
        bin_count,
        cuts,
        input_fingerprint: schema.fingerprint(),
        output_schema,
    })
}

/// Indices of every numeric feature in `schema`.
pub fn numeric_features(schema: &FeatureSchema) -> Vec<usize> {
    (0..schema.feature_count())
        .filter(|&f| !schema.feature(f).kind.is_nominal())
        .collect()
}

fn discretized_schema(schema: &FeatureSchema, cuts: &[Option<Vec<f64>>]) -> Result<FeatureSchema> {
    let features = schema
        .features()
        .iter()
        .zip(cuts)
        .map(|(f, c)| match c {
            Some(c) => Feature {
                name: f.name.clone(),
                kind: FeatureKind::Nominal((0..=c.len()).map(|b| format!("bin_{b}")).collect()),
            },
            None => f.clone(),
        })
        .collect();
    Ok(FeatureSchema::new(features, schema.class_values().to_vec())?
        .with_difficulty_column(schema.has_difficulty_column()))
}

pub fn apply_discretizer(disc: &Discretizer, ds: &Dataset) -> Result<Dataset> {
    if ds.schema().fingerprint() != disc.input_fingerprint {
        return Err(Error::SchemaMismatch(
            "dataset schema differs from the one the discretizer was fitted on".into(),
        ));
    }
    let records = ds.records().iter().map(|r| disc.transform_record(r)).collect();
    Ok(Dataset::from_parts(disc.output_schema.clone(), records))
}

fn equal_width_cuts(column: &[f64], bins: usize) -> Vec<f64> {
    let (min, max) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max.is_nan() || min.is_nan() || max <= min {
        return Vec::new();
    }
    let width = (max - min) / bins as f64;
    let mut cuts: Vec<f64> = (1..bins).map(|i| min + i as f64 * width).collect();
    cuts.dedup();
    cuts.retain(|&c| c > min && c <= max);
    cuts
}

fn equal_frequency_cuts(column: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = column.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::new();
    for i in 1..bins {
        let pos = ((i * n) as f64 / bins as f64).round() as usize;
        if pos == 0 || pos >= n {
            continue;
        }
        let (a, b) = (sorted[pos - 1], sorted[pos]);
        if a < b {
            let cut = a + (b - a) / 2.0;
            if cuts.last().is_none_or(|&last| cut > last) {
                cuts.push(cut);
            }
        }
    }
    cuts
}

/// Fayyad-Irani acceptance test for splitting `parent` into `left`/`right`
/// (class count vectors).
pub fn mdl_accepts(parent: &[f64], left: &[f64], right: &[f64]) -> bool {
    let n: f64 = parent.iter().sum();
    if n < 2.0 {
        return false;
    }
    let nl: f64 = left.iter().sum();
    let nr: f64 = right.iter().sum();
    let (h, hl, hr) = (entropy(parent), entropy(left), entropy(right));
    let gain = h - (nl / n) * hl - (nr / n) * hr;
    let k = distinct_classes(parent) as f64;
    let kl = distinct_classes(left) as f64;
    let kr = distinct_classes(right) as f64;
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h - kl * hl - kr * hr);
    gain > ((n - 1.0).log2() + delta) / n
}

fn mdl_cuts(column: &[f64], labels: &[usize], classes: usize) -> Vec<f64> {
    let mut pairs: Vec<(f64, usize)> = column.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts = Vec::new();
    let mut stack = vec![(0usize, pairs.len())];
    while let Some((lo, hi)) = stack.pop() {
        if let Some((cut, split)) = best_mdl_split(&pairs[lo..hi], classes) {
            cuts.push(cut);
            stack.push((lo, lo + split));
            stack.push((lo + split, hi));
        }
    }
    cuts.sort_unstable_by(f64::total_cmp);
    cuts
}

/// Lowest-entropy boundary of a sorted slice, if it passes the MDL test.
/// Returns the cut value and the slice position it splits at.
fn best_mdl_split(pairs: &[(f64, usize)], classes: usize) -> Option<(f64, usize)> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let mut total = vec![0.0; classes];
    for &(_, c) in pairs {
        total[c] += 1.0;
    }
    if distinct_classes(&total) < 2 {
        return None;
    }
    let mut left = vec![0.0; classes];
    let mut right = vec![0.0; classes];
    let mut best: Option<usize> = None;
    let mut best_e = f64::INFINITY;
    for i in 0..n - 1 {
        left[pairs[i].1] += 1.0;
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        for c in 0..classes {
            right[c] = total[c] - left[c];
        }
        let nl = (i + 1) as f64;
        let e = (nl * entropy(&left) + (n as f64 - nl) * entropy(&right)) / n as f64;
        if e < best_e {
            best_e = e;
            best = Some(i + 1);
        }
    }
    let split = best?;
    let mut left = vec![0.0; classes];
    for &(_, c) in &pairs[..split] {
        left[c] += 1.0;
    }
    let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
    if !mdl_accepts(&total, &left, &right) {
        return None;
    }
    let (a, b) = (pairs[split - 1].0, pairs[split].0);
    Some((a + (b - a) / 2.0, split))
}
