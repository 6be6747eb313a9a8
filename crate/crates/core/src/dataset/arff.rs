//! Dense ARFF reader: `@relation`, `@attribute` (numeric/real/integer or a
//! nominal brace list), `@data`. The last attribute is the class.

use std::path::Path;

use super::{Dataset, Feature, FeatureKind, FeatureSchema, Record};
use crate::error::{Error, Result};

pub fn load_arff(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_arff(&text)
}

pub fn parse_arff(text: &str) -> Result<Dataset> {
    let mut relation_seen = false;
    let mut attributes: Vec<(String, FeatureKind, usize)> = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut data_started = false;

    for (i, raw) in lines.by_ref() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (keyword, rest) = split_keyword(line);
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => relation_seen = true,
            "@attribute" => {
                let (name, kind_spec) = split_name(rest)
                    .ok_or_else(|| Error::parse(line_no, "attribute declaration without a type"))?;
                let kind = parse_kind(kind_spec, line_no)?;
                attributes.push((name, kind, line_no));
            }
            "@data" => {
                data_started = true;
                break;
            }
            _ => {
                return Err(Error::parse(line_no, format!("unexpected header line `{line}`")));
            }
        }
    }
    if !relation_seen {
        return Err(Error::Data("ARFF header has no @relation".into()));
    }
    if !data_started {
        return Err(Error::Data("ARFF file has no @data section".into()));
    }
    if attributes.len() < 2 {
        return Err(Error::Data(
            "ARFF header needs at least one feature and a class attribute".into(),
        ));
    }
    let (class_name, class_kind, class_line) = attributes.pop().expect("non-empty");
    let class_values = match class_kind {
        FeatureKind::Nominal(values) => values,
        FeatureKind::Numeric => {
            return Err(Error::parse(
                class_line,
                format!("class attribute `{class_name}` must be nominal"),
            ))
        }
    };
    let features: Vec<Feature> = attributes
        .into_iter()
        .map(|(name, kind, _)| Feature { name, kind })
        .collect();
    let schema = FeatureSchema::new(features, class_values)?;
    let n = schema.feature_count();

    let mut records = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('{') {
            return Err(Error::parse(line_no, "sparse ARFF rows are not supported"));
        }
        let fields: Vec<&str> = line.split(',').map(|f| unquote(f.trim())).collect();
        if fields.len() != n + 1 {
            return Err(Error::parse(
                line_no,
                format!("expected {} values, found {}", n + 1, fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(n);
        for (col, (&token, feature)) in fields.iter().zip(schema.features()).enumerate() {
            if token == "?" {
                return Err(Error::parse(
                    line_no,
                    format!("column {}: missing values are not supported", col + 1),
                ));
            }
            let v = match &feature.kind {
                FeatureKind::Numeric => token
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::parse(
                            line_no,
                            format!(
                                "column {} (`{}`): `{token}` is not a number",
                                col + 1,
                                feature.name
                            ),
                        )
                    })?,
                FeatureKind::Nominal(_) => schema.nominal_index(col, token).ok_or_else(|| {
                    Error::parse(
                        line_no,
                        format!(
                            "column {} (`{}`): unknown value `{token}`",
                            col + 1,
                            feature.name
                        ),
                    )
                })? as f64,
            };
            values.push(v);
        }
        let label = schema.class_index(fields[n]).ok_or_else(|| {
            Error::parse(
                line_no,
                format!("column {}: unknown class `{}`", n + 1, fields[n]),
            )
        })?;
        records.push(Record { values, label });
    }
    if records.is_empty() {
        return Err(Error::Data("ARFF @data section is empty".into()));
    }
    Ok(Dataset::from_parts(schema, records))
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(p) => (&line[..p], line[p..].trim_start()),
        None => (line, ""),
    }
}

/// Splits `name type...`, where the name may be quoted.
fn split_name(rest: &str) -> Option<(String, &str)> {
    let rest = rest.trim_start();
    let first = rest.chars().next()?;
    if first == '\'' || first == '"' {
        let end = rest[1..].find(first)? + 1;
        let name = rest[1..end].to_string();
        let tail = rest[end + 1..].trim();
        (!tail.is_empty()).then_some((name, tail))
    } else {
        let p = rest.find(char::is_whitespace)?;
        let tail = rest[p..].trim();
        (!tail.is_empty()).then(|| (rest[..p].to_string(), tail))
    }
}

fn parse_kind(spec: &str, line_no: usize) -> Result<FeatureKind> {
    if let Some(inner) = spec.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| Error::parse(line_no, "unterminated nominal value list"))?;
        let values: Vec<String> = inner
            .split(',')
            .map(|v| unquote(v.trim()).to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::parse(line_no, "empty nominal value list"));
        }
        return Ok(FeatureKind::Nominal(values));
    }
    let word = spec
        .split_whitespace()
        .next()
        .unwrap_or_default()
        .to_ascii_lowercase();
    match word.as_str() {
        "numeric" | "real" | "integer" => Ok(FeatureKind::Numeric),
        other => Err(Error::parse(
            line_no,
            format!("unsupported attribute kind `{other}`"),
        )),
    }
}

fn unquote(s: &str) -> &str {
    let b = s.as_bytes();
    if b.len() >= 2 && (b[0] == b'\'' || b[0] == b'"') && b[b.len() - 1] == b[0] {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
% toy file
@RELATION toy

@attribute a numeric
@attribute 'b value' REAL
@attribute class {normal,anomaly}

@data
1,2,normal
3,4.5,anomaly
% comment inside data
5,6,anomaly
7,8,'normal'
";

    #[test]
    fn minimal_file() {
        let ds = parse_arff(MINIMAL).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.feature_count(), 2);
        assert_eq!(ds.schema().feature(1).name, "b value");
        assert_eq!(ds.schema().class_values(), ["normal", "anomaly"]);
        assert_eq!(ds.labels(), vec![0, 1, 1, 0]);
        assert_eq!(ds.records()[1].values, vec![3.0, 4.5]);
    }

    #[test]
    fn quoted_nominals_like_the_nsl_kdd_header() {
        let text = "@relation 'KDDTrain'\n\
            @attribute 'duration' real\n\
            @attribute 'protocol_type' {'tcp','udp', 'icmp'}\n\
            @attribute 'class' {'normal', 'anomaly'}\n\
            @data\n\
            0,udp,normal\n\
            2,'icmp',anomaly\n";
        let ds = parse_arff(text).unwrap();
        assert_eq!(
            ds.schema().feature(1).kind,
            FeatureKind::Nominal(vec!["tcp".into(), "udp".into(), "icmp".into()])
        );
        assert_eq!(ds.records()[1].values, vec![2.0, 2.0]);
    }

    #[test]
    fn string_attribute_is_unsupported() {
        let text = "@relation r\n@attribute s string\n@attribute class {a,b}\n@data\nx,a\n";
        match parse_arff(text) {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("string")),
            other => panic!("unexpected {other:?}"),
        }
        let date = "@relation r\n@attribute d date 'yyyy'\n@attribute class {a,b}\n@data\n";
        assert!(parse_arff(date).is_err());
    }

    #[test]
    fn header_and_row_errors() {
        assert!(parse_arff("@attribute a numeric\n@attribute c {x,y}\n@data\n1,x\n").is_err());
        assert!(parse_arff("@relation r\n@attribute a numeric\n@attribute c {x,y}\n").is_err());
        assert!(parse_arff("@relation r\n@attribute a numeric\n@attribute c numeric\n@data\n1,2\n").is_err());
        let arity = "@relation r\n@attribute a numeric\n@attribute c {x,y}\n@data\n1,x\n1,2,x\n";
        assert!(matches!(parse_arff(arity), Err(Error::Parse { line: 6, .. })));
        let empty = "@relation r\n@attribute a numeric\n@attribute c {x,y}\n@data\n";
        assert!(matches!(parse_arff(empty), Err(Error::Data(_))));
        let missing = "@relation r\n@attribute a numeric\n@attribute c {x,y}\n@data\n?,x\n";
        assert!(parse_arff(missing).is_err());
    }
}
