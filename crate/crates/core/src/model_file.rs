//! Versioned text envelope for trained models.
//!
//! ```text
//! nids-model
//! format_version=1
//! algorithm=rforest
//! schema_fingerprint=<sha-256 hex>
//! seed=42
//! config=<json>
//! payload:
//! <json>
//! ```
//!
//! Floats are written in shortest round-trip decimal form, so a loaded model
//! predicts exactly like the one that was saved.

use std::path::Path;

use crate::dataset::FeatureSchema;
use crate::error::{Error, Result};
use crate::learner::{Algorithm, LearnerConfig, TrainedModel};

pub const MAGIC: &str = "nids-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub schema_fingerprint: String,
    pub seed: u64,
    pub config: LearnerConfig,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(config: LearnerConfig, model: TrainedModel, schema: &FeatureSchema, seed: u64) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            algorithm: config.algorithm(),
            schema_fingerprint: schema.fingerprint(),
            seed,
            config,
            model,
        }
    }

    pub fn to_text(&self) -> Result<String> {
        Ok(format!(
            "{MAGIC}\nformat_version={}\nalgorithm={}\nschema_fingerprint={}\nseed={}\nconfig={}\npayload:\n{}\n",
            self.format_version,
            self.algorithm,
            self.schema_fingerprint,
            self.seed,
            to_json(&self.config)?,
            to_json(&self.model)?,
        ))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split_inclusive('\n');
        let mut next_line = |what: &str| -> Result<&str> {
            lines
                .next()
                .map(|l| l.trim_end_matches(['\n', '\r']))
                .ok_or_else(|| Error::Model(format!("model file ends before {what}")))
        };
        if next_line("the header")? != MAGIC {
            return Err(Error::Model("not a model file (missing `nids-model` header)".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = next_line(key)?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::Model(format!("expected `{key}=` in model header, found `{line}`")))
        };
        let version: u32 = field("format_version")?
            .parse()
            .map_err(|_| Error::Model("format_version is not an integer".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "model format version {version} is not supported (expected {FORMAT_VERSION})"
            )));
        }
        let algorithm: Algorithm = field("algorithm")?
            .parse()
            .map_err(|e: Error| Error::Model(e.to_string()))?;
        let schema_fingerprint = field("schema_fingerprint")?;
        let seed: u64 = field("seed")?
            .parse()
            .map_err(|_| Error::Model("seed is not an unsigned integer".into()))?;
        let config: LearnerConfig = serde_json::from_str(&field("config")?)
            .map_err(|e| Error::Model(format!("bad config section: {e}")))?;
        if next_line("the payload")? != "payload:" {
            return Err(Error::Model("expected `payload:` after the header".into()));
        }
        let rest: String = lines.collect();
        let model: TrainedModel = serde_json::from_str(&rest)
            .map_err(|e| Error::Model(format!("bad payload: {e}")))?;
        if config.algorithm() != algorithm {
            return Err(Error::Model("header algorithm disagrees with the config".into()));
        }
        Ok(ModelFile {
            format_version: version,
            algorithm,
            schema_fingerprint,
            seed,
            config,
            model,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Fails unless `schema` is the schema the model was trained on.
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        let got = schema.fingerprint();
        if got == self.schema_fingerprint {
            Ok(())
        } else {
            Err(Error::SchemaMismatch(format!(
                "data schema fingerprint {got} does not match the model's {}",
                self.schema_fingerprint
            )))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Model(format!("cannot serialize model: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, Feature, Record};
    use crate::learner::{train, Classifier};

    fn toy() -> Dataset {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("bytes"), Feature::nominal("proto", ["tcp", "udp", "icmp"])],
            vec!["normal".into(), "anomaly".into()],
        )
        .unwrap();
        let records = (0..40)
            .map(|i| {
                let x = f64::from(i) * 0.37 + 1.0 / 3.0;
                Record::new(vec![x, f64::from(i % 3)], usize::from(i % 5 < 2))
            })
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn every_algorithm_round_trips_exactly() {
        let ds = toy();
        for algo in Algorithm::ALL {
            let mut config = LearnerConfig::defaults(algo, 7);
            if let LearnerConfig::Combined { config: c, .. } = &mut config {
                c.forest.tree_count = 4;
            }
            if let LearnerConfig::Rforest(c) = &mut config {
                c.tree_count = 4;
            }
            let model = train(&config, &ds).unwrap();
            let file = ModelFile::new(config, model.clone(), ds.schema(), 7);
            let text = file.to_text().unwrap();
            let back = ModelFile::parse(&text).unwrap();
            assert_eq!(back, file, "{algo}");
            back.check_schema(ds.schema()).unwrap();
            for r in ds.records() {
                assert_eq!(back.model.predict(r).unwrap(), model.predict(r).unwrap());
            }
            assert_eq!(back.to_text().unwrap(), text);
        }
    }

    #[test]
    fn rejects_bad_headers() {
        let ds = toy();
        let config = LearnerConfig::defaults(Algorithm::Nb, 0);
        let model = train(&config, &ds).unwrap();
        let text = ModelFile::new(config, model, ds.schema(), 0).to_text().unwrap();
        let bumped = text.replace("format_version=1", "format_version=2");
        assert!(matches!(ModelFile::parse(&bumped), Err(Error::Model(_))));
        assert!(ModelFile::parse("hello\n").is_err());
        assert!(ModelFile::parse(&text.replace("payload:", "body:")).is_err());
        let other = ds.schema().project(&[0]).unwrap();
        let file = ModelFile::parse(&text).unwrap();
        assert!(matches!(file.check_schema(&other), Err(Error::SchemaMismatch(_))));
    }
}
