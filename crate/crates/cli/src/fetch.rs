use std::path::Path;

use nids_core::{Error, Result};
use sha2::{Digest, Sha256};

use crate::args::FetchOpts;
use crate::output::write_atomic;

fn download(url: &str) -> Result<Vec<u8>> {
    if let Some(path) = url.strip_prefix("file://") {
        return std::fs::read(path).map_err(|e| Error::io(Path::new(path), e));
    }
    let response = reqwest::blocking::get(url)
        .and_then(|r| r.error_for_status())
        .map_err(|e| Error::Data(format!("download of {url} failed: {e}")))?;
    let bytes = response
        .bytes()
        .map_err(|e| Error::Data(format!("download of {url} failed: {e}")))?;
    Ok(bytes.to_vec())
}

/// Downloads `opts.url`, checks the digest and only then writes `opts.out`.
pub fn fetch_dataset(opts: &FetchOpts) -> Result<()> {
    let expected = opts.sha256.trim().to_ascii_lowercase();
    if expected.len() != 64 || !expected.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::InvalidArgument("--sha256 must be 64 hex digits".into()));
    }
    let bytes = download(&opts.url)?;
    let actual = hex::encode(Sha256::digest(&bytes));
    if actual != expected {
        return Err(Error::Data(format!(
            "checksum mismatch for {}: expected {expected}, got {actual}",
            opts.url
        )));
    }
    write_atomic(&opts.out, &bytes)?;
    println!("Wrote {} bytes to {} (sha256 {actual})", bytes.len(), opts.out.display());
    Ok(())
}
