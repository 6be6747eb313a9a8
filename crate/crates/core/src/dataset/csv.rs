use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{resolve_label, Dataset, FeatureKind, FeatureSchema, Record};
use crate::error::{Error, Result};

/// Loads a header-less comma-separated file against `schema`.
///
/// Rows carry the features, then the label, then optionally the NSL-KDD
/// difficulty score, which is parsed and dropped.
pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema)
}

pub fn parse_csv(text: &str, schema: &FeatureSchema) -> Result<Dataset> {
    let n = schema.feature_count();
    let mut records = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 && fields.len() != n + 2 {
            return Err(Error::parse(
                line_no,
                format!(
                    "expected {} or {} fields, found {}",
                    n + 1,
                    n + 2,
                    fields.len()
                ),
            ));
        }
        let mut values = Vec::with_capacity(n);
        for (col, (&token, feature)) in fields.iter().zip(schema.features()).enumerate() {
            let v = match &feature.kind {
                FeatureKind::Numeric => parse_number(token).ok_or_else(|| {
                    Error::parse(
                        line_no,
                        format!(
                            "column {} (`{}`): `{token}` is not a number",
                            col + 1,
                            feature.name
                        ),
                    )
                })?,
                FeatureKind::Nominal(_) => {
                    schema.nominal_index(col, token).ok_or_else(|| {
                        Error::parse(
                            line_no,
                            format!(
                                "column {} (`{}`): unknown value `{token}`",
                                col + 1,
                                feature.name
                            ),
                        )
                    })? as f64
                }
            };
            values.push(v);
        }
        let label = resolve_label(schema, fields[n])
            .map_err(|e| Error::parse(line_no, format!("column {}: {e}", n + 1)))?;
        if let Some(&difficulty) = fields.get(n + 1) {
            if parse_number(difficulty).is_none() {
                return Err(Error::parse(
                    line_no,
                    format!("column {}: difficulty `{difficulty}` is not a number", n + 2),
                ));
            }
        }
        records.push(Record { values, label });
    }
    if records.is_empty() {
        return Err(Error::Data("file contains no records".into()));
    }
    Ok(Dataset::from_parts(schema.clone(), records))
}

fn parse_number(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes `ds` in the format [`load_csv`] reads, without a difficulty column.
pub fn write_csv<W: Write>(ds: &Dataset, mut out: W) -> std::io::Result<()> {
    let schema = ds.schema();
    let mut line = String::new();
    for r in ds.records() {
        line.clear();
        for (v, feature) in r.values.iter().zip(schema.features()) {
            match &feature.kind {
                FeatureKind::Numeric => write!(line, "{v},").unwrap(),
                FeatureKind::Nominal(names) => {
                    line.push_str(&names[*v as usize]);
                    line.push(',');
                }
            }
        }
        line.push_str(&schema.class_values()[r.label]);
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}
