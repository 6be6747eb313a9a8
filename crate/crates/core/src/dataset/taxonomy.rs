//! Attack-name to attack-category mapping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackCategory {
    Normal,
    DoS,
    Probe,
    R2L,
    U2R,
}

impl AttackCategory {
    pub const ALL: [AttackCategory; 5] = [
        AttackCategory::Normal,
        AttackCategory::DoS,
        AttackCategory::Probe,
        AttackCategory::R2L,
        AttackCategory::U2R,
    ];

    /// Class label used in five-way datasets.
    pub fn label(self) -> &'static str {
        match self {
            AttackCategory::Normal => "normal",
            AttackCategory::DoS => "dos",
            AttackCategory::Probe => "probe",
            AttackCategory::R2L => "r2l",
            AttackCategory::U2R => "u2r",
        }
    }
}

impl fmt::Display for AttackCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub const DOS: &[&str] = &[
    "apache2", "smurf", "neptune", "dosnuke", "land", "pod", "back", "teardrop", "tcprset",
    "syslogd", "crashiis", "arppoison", "mailbomb", "selfping", "processtable", "udpstorm",
    "warezclient",
];

pub const PROBE: &[&str] = &[
    "portsweep", "ipsweep", "queso", "satan", "msscan", "ntinfoscan", "lsdomain",
    "illegal-sniffer",
];

pub const R2L: &[&str] = &[
    "dict", "netcat", "sendmail", "imap", "ncftp", "xlock", "xsnoop", "sshotrojan",
    "framespooof", "pppmacro", "guest", "netbus", "snmpget", "ftpwrite", "httptunnel", "phf",
    "named",
];

/// `pppmacro` is also listed here in the source table; the R2L entry wins.
pub const U2R: &[&str] = &[
    "sechole", "xterm", "eject", "ps", "nukewp", "secret", "perl", "yaga", "fdformat",
    "ffbconfig", "casesen", "ntfdsdos", "pppmacro", "loadmodule", "sqlattack",
];

/// Spellings used in the NSL-KDD files that the table above does not carry.
pub const NSL_KDD_EXTRA: &[(&str, AttackCategory)] = &[
    ("nmap", AttackCategory::Probe),
    ("mscan", AttackCategory::Probe),
    ("saint", AttackCategory::Probe),
    ("guess_passwd", AttackCategory::R2L),
    ("ftp_write", AttackCategory::R2L),
    ("multihop", AttackCategory::R2L),
    ("warezmaster", AttackCategory::R2L),
    ("spy", AttackCategory::R2L),
    ("snmpgetattack", AttackCategory::R2L),
    ("snmpguess", AttackCategory::R2L),
    ("worm", AttackCategory::R2L),
    ("buffer_overflow", AttackCategory::U2R),
    ("rootkit", AttackCategory::U2R),
];

/// Category of a raw NSL-KDD label. Unknown names are an error.
pub fn map_attack_category(raw_label: &str) -> Result<AttackCategory> {
    let label = raw_label.trim();
    if label == "normal" {
        return Ok(AttackCategory::Normal);
    }
    let tables = [
        (DOS, AttackCategory::DoS),
        (PROBE, AttackCategory::Probe),
        (R2L, AttackCategory::R2L),
        (U2R, AttackCategory::U2R),
    ];
    for (names, category) in tables {
        if names.contains(&label) {
            return Ok(category);
        }
    }
    NSL_KDD_EXTRA
        .iter()
        .find(|(name, _)| *name == label)
        .map(|&(_, c)| c)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
}
