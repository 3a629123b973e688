#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use hbt_core::surface_io::{read_table, Table};

pub fn hbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbt")).args(args).output().expect("failed to launch hbt")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of a `key = value` line, first whitespace-separated token.
pub fn field(text: &str, key: &str) -> Option<f64> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.trim_start().strip_prefix('=').map(str::trim))
        .and_then(|v| v.split_whitespace().next()?.parse().ok())
}

pub fn table(path: &Path) -> Table {
    read_table(BufReader::new(File::open(path).expect("missing table"))).expect("unreadable table")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("non-UTF-8 temp path")
}
