pub mod bench;
pub mod decompose;
pub mod eval;
pub mod generate;
pub mod gradcheck;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Stringifies an optional flag for [`crate::config::RunConfig::resolve`].
pub fn flag<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// `<file>.<suffix>` next to `file`.
pub fn sibling(file: &Path, suffix: &str) -> PathBuf {
    let mut s = file.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}
