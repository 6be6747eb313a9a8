//! Checks of the classifiers against the published NSL-KDD figures:
//! dataset discovery, synthetic NSL-KDD-shaped data and independent oracles.

pub mod oracles;
pub mod synthetic;

use std::path::{Path, PathBuf};

pub use self::synthetic::synthetic_csv;

/// Environment variable naming the NSL-KDD training file.
pub const DATASET_ENV: &str = "NSL_KDD_TRAIN";
/// Fallback location, relative to the workspace root.
pub const DEFAULT_DATASET: &str = "data/KDDTrain+.txt";

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("crate sits two levels below the workspace root")
        .to_path_buf()
}

/// The training file from `NSL_KDD_TRAIN`, else `data/KDDTrain+.txt` under
/// the workspace root, if it exists.
pub fn dataset_path() -> Option<PathBuf> {
    let candidate = match std::env::var_os(DATASET_ENV) {
        Some(p) => PathBuf::from(p),
        None => workspace_root().join(DEFAULT_DATASET),
    };
    candidate.is_file().then_some(candidate)
}
