use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Nominal(Vec<String>),
}

impl FeatureKind {
    pub fn is_nominal(&self) -> bool {
        matches!(self, FeatureKind::Nominal(_))
    }

    /// Number of nominal values, `None` for numeric features.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            FeatureKind::Numeric => None,
            FeatureKind::Nominal(values) => Some(values.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn numeric(name: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Nominal(values.into_iter().map(Into::into).collect()),
        }
    }
}

/// Ordered feature list plus the class value set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SchemaRepr", try_from = "SchemaRepr")]
pub struct FeatureSchema {
    features: Vec<Feature>,
    class_values: Vec<String>,
    has_difficulty_column: bool,
    lookup: Vec<HashMap<String, usize>>,
    class_lookup: HashMap<String, usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SchemaRepr {
    features: Vec<Feature>,
    class_values: Vec<String>,
    has_difficulty_column: bool,
}

impl From<FeatureSchema> for SchemaRepr {
    fn from(s: FeatureSchema) -> Self {
        SchemaRepr {
            features: s.features,
            class_values: s.class_values,
            has_difficulty_column: s.has_difficulty_column,
        }
    }
}

impl TryFrom<SchemaRepr> for FeatureSchema {
    type Error = Error;

    fn try_from(r: SchemaRepr) -> Result<Self> {
        Ok(FeatureSchema::new(r.features, r.class_values)?
            .with_difficulty_column(r.has_difficulty_column))
    }
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>, class_values: Vec<String>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("schema has no features".into()));
        }
        if class_values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "schema needs at least two class values, got {}",
                class_values.len()
            )));
        }
        check_value_set("class", &class_values)?;
        for f in &features {
            if let FeatureKind::Nominal(values) = &f.kind {
                check_value_set(&f.name, values)?;
            }
        }
        let mut schema = FeatureSchema {
            features,
            class_values,
            has_difficulty_column: false,
            lookup: Vec::new(),
            class_lookup: HashMap::new(),
        };
        schema.build_lookup();
        Ok(schema)
    }

    pub fn with_difficulty_column(mut self, present: bool) -> Self {
        self.has_difficulty_column = present;
        self
    }

    fn build_lookup(&mut self) {
        self.lookup = self
            .features
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Numeric => HashMap::new(),
                FeatureKind::Nominal(values) => values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), i))
                    .collect(),
            })
            .collect();
        self.class_lookup = self
            .class_values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &Feature {
        &self.features[index]
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn class_values(&self) -> &[String] {
        &self.class_values
    }

    pub fn class_count(&self) -> usize {
        self.class_values.len()
    }

    pub fn has_difficulty_column(&self) -> bool {
        self.has_difficulty_column
    }

    pub fn nominal_index(&self, feature: usize, value: &str) -> Option<usize> {
        self.lookup[feature].get(value).copied()
    }

    pub fn class_index(&self, value: &str) -> Option<usize> {
        self.class_lookup.get(value).copied()
    }

    /// Index of the feature called `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn all_nominal(&self) -> bool {
        self.features.iter().all(|f| f.kind.is_nominal())
    }

    /// Schema restricted to `indices` (in the given order), same class set.
    pub fn project(&self, indices: &[usize]) -> Result<Self> {
        let features = indices
            .iter()
            .map(|&i| {
                self.features.get(i).cloned().ok_or_else(|| {
                    Error::InvalidArgument(format!("feature index {i} out of range"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureSchema::new(features, self.class_values.clone())?
            .with_difficulty_column(self.has_difficulty_column))
    }

    /// Copy of this schema with feature `index` replaced.
    pub fn with_feature(&self, index: usize, feature: Feature) -> Result<Self> {
        let mut features = self.features.clone();
        features[index] = feature;
        Ok(FeatureSchema::new(features, self.class_values.clone())?
            .with_difficulty_column(self.has_difficulty_column))
    }

    /// SHA-256 over feature names, kinds, nominal value sets and class values.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for f in &self.features {
            h.update(f.name.as_bytes());
            h.update([0u8]);
            match &f.kind {
                FeatureKind::Numeric => h.update(b"numeric"),
                FeatureKind::Nominal(values) => {
                    h.update(b"nominal{");
                    for v in values {
                        h.update(v.as_bytes());
                        h.update([0u8]);
                    }
                    h.update(b"}");
                }
            }
            h.update([1u8]);
        }
        h.update(b"class{");
        for v in &self.class_values {
            h.update(v.as_bytes());
            h.update([0u8]);
        }
        h.update(b"}");
        hex::encode(h.finalize())
    }
}

impl fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} features, classes {{{}}}",
            self.features.len(),
            self.class_values.join(",")
        )
    }
}

fn check_value_set(name: &str, values: &[String]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("`{name}` has an empty value set")));
    }
    let mut seen = std::collections::HashSet::new();
    for v in values {
        if !seen.insert(v.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "`{name}` lists value `{v}` twice"
            )));
        }
    }
    Ok(())
}

/// How raw NSL-KDD labels are turned into classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelMode {
    /// `normal` vs `anomaly`.
    #[default]
    Binary,
    /// `normal`, `dos`, `probe`, `r2l`, `u2r`.
    Category5,
}

impl LabelMode {
    pub fn class_values(self) -> Vec<String> {
        match self {
            LabelMode::Binary => vec!["normal".into(), "anomaly".into()],
            LabelMode::Category5 => ["normal", "dos", "probe", "r2l", "u2r"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

pub const PROTOCOL_TYPES: [&str; 3] = ["tcp", "udp", "icmp"];

pub const SERVICES: [&str; 70] = [
    "aol", "auth", "bgp", "courier", "csnet_ns", "ctf", "daytime", "discard", "domain",
    "domain_u", "echo", "eco_i", "ecr_i", "efs", "exec", "finger", "ftp", "ftp_data", "gopher",
    "harvest", "hostnames", "http", "http_2784", "http_443", "http_8001", "imap4", "IRC",
    "iso_tsap", "klogin", "kshell", "ldap", "link", "login", "mtp", "name", "netbios_dgm",
    "netbios_ns", "netbios_ssn", "netstat", "nnsp", "nntp", "ntp_u", "other", "pm_dump", "pop_2",
    "pop_3", "printer", "private", "red_i", "remote_job", "rje", "shell", "smtp", "sql_net", "ssh",
    "sunrpc", "supdup", "systat", "telnet", "tftp_u", "tim_i", "time", "urh_i", "urp_i", "uucp",
    "uucp_path", "vmnet", "whois", "X11", "Z39_50",
];

pub const FLAGS: [&str; 11] = [
    "OTH", "REJ", "RSTO", "RSTOS0", "RSTR", "S0", "S1", "S2", "S3", "SF", "SH",
];

pub const FEATURE_NAMES: [&str; 41] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// The canonical 41-feature NSL-KDD schema: `protocol_type`, `service` and
/// `flag` are nominal, everything else numeric.
pub fn nsl_kdd_schema(labels: LabelMode) -> FeatureSchema {
    let features = FEATURE_NAMES
        .iter()
        .map(|&name| match name {
            "protocol_type" => Feature::nominal(name, PROTOCOL_TYPES),
            "service" => Feature::nominal(name, SERVICES),
            "flag" => Feature::nominal(name, FLAGS),
            _ => Feature::numeric(name),
        })
        .collect();
    FeatureSchema::new(features, labels.class_values())
        .expect("canonical schema is valid")
        .with_difficulty_column(true)
}
