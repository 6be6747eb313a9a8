//! Shared helpers: synthetic data files and a handle on the binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub use nids_reproduction::synthetic_csv;

pub fn write_synthetic(dir: &Path, name: &str, rows: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, synthetic_csv(rows, seed)).unwrap();
    path
}

pub fn nids() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nids"));
    cmd.env_remove("NIDS_THREADS");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    nids().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// CSV text without its last column, which holds wall-clock timings.
pub fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}
