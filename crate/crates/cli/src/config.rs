//! Flat `key=value` run configuration.
//!
//! Values are resolved in order: command defaults, the config file (global
//! keys, then the selected `[section]`), `RRCNN_SEED`, command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

pub const SEED_ENV: &str = "RRCNN_SEED";

/// Bad flags, config keys or values. Exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    command: &'static str,
    values: BTreeMap<String, String>,
}

/// Parses config text into global and per-section maps.
fn parse_file(text: &str, origin: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut section = String::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{origin}:{}: expected key=value, got {line:?}", no + 1)))?;
        out.entry(section.clone())
            .or_default()
            .insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// `defaults` lists every accepted key; anything else is rejected.
    pub fn resolve(
        command: &'static str,
        defaults: &[(&str, &str)],
        file: Option<&Path>,
        section: Option<&str>,
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut apply = |k: &str, v: String, origin: &str| -> Result<()> {
            match values.get_mut(k) {
                Some(slot) => {
                    *slot = v;
                    Ok(())
                }
                None => Err(usage(format!("{origin}: unknown key {k:?} for {command}"))),
            }
        };
        if let Some(path) = file {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let origin = path.display().to_string();
            let mut parsed = parse_file(&text, &origin)?;
            if let Some(global) = parsed.remove("") {
                for (k, v) in global {
                    apply(&k, v, &origin)?;
                }
            }
            if let Some(name) = section {
                let sec = parsed
                    .remove(name)
                    .ok_or_else(|| usage(format!("{origin}: no section [{name}]")))?;
                for (k, v) in sec {
                    apply(&k, v, &origin)?;
                }
            }
        } else if section.is_some() {
            return Err(usage("--section needs --config"));
        }
        if let Ok(seed) = std::env::var(SEED_ENV) {
            if defaults.iter().any(|(k, _)| *k == "seed") {
                apply("seed", seed, SEED_ENV)?;
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                apply(k, v, "command line")?;
            }
        }
        Ok(RunConfig { command, values })
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// `None` for an empty value.
    pub fn opt(&self, key: &str) -> Option<&str> {
        Some(self.str(key)).filter(|s| !s.is_empty())
    }

    pub fn required(&self, key: &str) -> Result<&str> {
        self.opt(key)
            .ok_or_else(|| usage(format!("{}: missing required value {key:?}", self.command)))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.required(key)?;
        raw.parse()
            .map_err(|e| usage(format!("bad value {raw:?} for {key}: {e}")))
    }

    /// Fills `key` when it is still empty.
    pub fn default_to(&mut self, key: &str, value: impl ToString) {
        if let Some(slot) = self.values.get_mut(key) {
            if slot.is_empty() {
                *slot = value.to_string();
            }
        }
    }

    pub fn snapshot(&self) -> String {
        let mut s = format!("# resolved configuration for `rrcnn {}`\n", self.command);
        for (k, v) in &self.values {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        fs::write(path, self.snapshot()).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let text = "# top\nlr = 0.5\n[fast]\nlr=0.9 # inline\nepochs=3\n";
        let p = parse_file(text, "cfg").unwrap();
        assert_eq!(p[""]["lr"], "0.5");
        assert_eq!(p["fast"]["lr"], "0.9");
        assert_eq!(p["fast"]["epochs"], "3");
        assert!(parse_file("oops\n", "cfg").is_err());
    }

    #[test]
    fn flags_beat_file_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "lr=0.5\nepochs=4\n").unwrap();
        let cfg = RunConfig::resolve(
            "train",
            &[("lr", "1"), ("epochs", "1")],
            Some(&path),
            None,
            vec![("lr", Some("0.25".into())), ("epochs", None)],
        )
        .unwrap();
        assert_eq!(cfg.get::<f64>("lr").unwrap(), 0.25);
        assert_eq!(cfg.get::<usize>("epochs").unwrap(), 4);
        fs::write(&path, "bogus=1\n").unwrap();
        let err = RunConfig::resolve("train", &[("lr", "1")], Some(&path), None, vec![]).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }
}
