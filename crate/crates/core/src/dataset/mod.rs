//! NSL-KDD records: schema, loading, label taxonomy and partitioning.

mod arff;
mod csv;
mod schema;
mod split;
mod taxonomy;

pub use self::arff::{load_arff, parse_arff};
pub use self::csv::{load_csv, parse_csv, write_csv};
pub use self::schema::{
    nsl_kdd_schema, Feature, FeatureKind, FeatureSchema, LabelMode, FEATURE_NAMES, FLAGS,
    PROTOCOL_TYPES, SERVICES,
};
pub use self::split::{sample_fraction, stratified_folds, FoldPlan};
pub use self::taxonomy::{
    map_attack_category, AttackCategory, DOS, NSL_KDD_EXTRA, PROBE, R2L, U2R,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loads `.arff` files with their own header; anything else is read as
/// header-less NSL-KDD CSV with classes from `labels`.
pub fn load_dataset(path: impl AsRef<Path>, labels: LabelMode) -> Result<Dataset> {
    let path = path.as_ref();
    let is_arff = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
    if is_arff {
        load_arff(path)
    } else {
        load_csv(path, &nsl_kdd_schema(labels))
    }
}

/// One connection record. Nominal values are stored as value-set indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub values: Vec<f64>,
    pub label: usize,
}

impl Record {
    pub fn new(values: Vec<f64>, label: usize) -> Self {
        Record { values, label }
    }

    /// Nominal value index of feature `f`.
    #[inline]
    pub fn nominal(&self, f: usize) -> usize {
        self.values[f] as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, records: Vec<Record>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            validate_record(&schema, r).map_err(|e| Error::Data(format!("record {i}: {e}")))?;
        }
        Ok(Dataset { schema, records })
    }

    /// Skips validation; callers guarantee every record fits `schema`.
    pub(crate) fn from_parts(schema: FeatureSchema, records: Vec<Record>) -> Self {
        Dataset { schema, records }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Record> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.schema.feature_count()
    }

    pub fn class_count(&self) -> usize {
        self.schema.class_count()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for r in &self.records {
            counts[r.label] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.records.is_empty() {
            Err(Error::Training("dataset has no records".into()))
        } else {
            Ok(())
        }
    }
}

pub fn validate_record(schema: &FeatureSchema, record: &Record) -> Result<()> {
    if record.values.len() != schema.feature_count() {
        return Err(Error::SchemaMismatch(format!(
            "record has {} values, schema has {} features",
            record.values.len(),
            schema.feature_count()
        )));
    }
    if record.label >= schema.class_count() {
        return Err(Error::SchemaMismatch(format!(
            "label index {} out of range for {} classes",
            record.label,
            schema.class_count()
        )));
    }
    for (f, (&v, feat)) in record.values.iter().zip(schema.features()).enumerate() {
        match feat.kind.cardinality() {
            Some(card) => {
                if !(v >= 0.0 && v.fract() == 0.0 && (v as usize) < card) {
                    return Err(Error::SchemaMismatch(format!(
                        "feature {f} (`{}`): nominal index {v} outside 0..{card}",
                        feat.name
                    )));
                }
            }
            None => {
                if !v.is_finite() {
                    return Err(Error::SchemaMismatch(format!(
                        "feature {f} (`{}`): non-finite value",
                        feat.name
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Length check used on the prediction paths.
#[inline]
pub(crate) fn check_arity(schema: &FeatureSchema, record: &Record) -> Result<()> {
    if record.values.len() != schema.feature_count() {
        return Err(Error::SchemaMismatch(format!(
            "record has {} values, model expects {}",
            record.values.len(),
            schema.feature_count()
        )));
    }
    Ok(())
}

/// Class index for a raw label. Exact class names match first; otherwise
/// attack names are folded through the taxonomy for the binary and
/// five-category class sets.
pub fn resolve_label(schema: &FeatureSchema, raw: &str) -> Result<usize> {
    if let Some(i) = schema.class_index(raw) {
        return Ok(i);
    }
    let classes = schema.class_values();
    if classes == LabelMode::Binary.class_values().as_slice() {
        let category = map_attack_category(raw)?;
        let name = if category == AttackCategory::Normal {
            "normal"
        } else {
            "anomaly"
        };
        return Ok(schema.class_index(name).expect("binary class set"));
    }
    if classes == LabelMode::Category5.class_values().as_slice() {
        let category = map_attack_category(raw)?;
        return Ok(schema.class_index(category.label()).expect("category class set"));
    }
    Err(Error::UnknownLabel(raw.to_string()))
}
