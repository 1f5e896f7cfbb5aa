//! Flat `key=value` run configurations.
//!
//! A file names the subcommand, the common options and every subcommand flag
//! by its long name. Blank lines and lines starting with `#` are ignored.
//! Flags given on the command line take precedence over the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::report::Format;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("config key `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("value of `{0}` cannot be written to a config file (newline or surrounding whitespace)")]
    Unrepresentable(String),
}

/// Keys that are positional arguments rather than `--flags`.
pub const POSITIONAL_KEYS: &[&str] = &["op"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<String>,
    /// Subcommand flags by long name, plus `threads` when set.
    pub flags: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (k, v) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line, text: raw.to_string() });
            }
            if seen.insert(k.to_string(), line).is_some() {
                return Err(ConfigError::Duplicate { line, key: k.to_string() });
            }
            let value_err = |msg: String| ConfigError::Value { key: k.to_string(), msg };
            match k {
                "subcommand" => cfg.subcommand = Some(v.to_string()),
                "seed" => cfg.seed = v.parse().map_err(|e| value_err(format!("{e}")))?,
                "format" => cfg.format = v.parse().map_err(value_err)?,
                "out" => cfg.out = Some(v.to_string()),
                _ => {
                    cfg.flags.insert(k.to_string(), v.to_string());
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> Result<String, ConfigError> {
        let mut s = String::new();
        let mut put = |k: &str, v: &str| -> Result<(), ConfigError> {
            if v.contains(['\n', '\r']) || v.trim() != v {
                return Err(ConfigError::Unrepresentable(k.to_string()));
            }
            writeln!(s, "{k}={v}").expect("writing to a String cannot fail");
            Ok(())
        };
        if let Some(sub) = &self.subcommand {
            put("subcommand", sub)?;
        }
        put("seed", &self.seed.to_string())?;
        put("format", &self.format.to_string())?;
        if let Some(out) = &self.out {
            put("out", out)?;
        }
        for (k, v) in &self.flags {
            put(k, v)?;
        }
        Ok(s)
    }

    /// Folds this file's settings into `argv` (which includes the program
    /// name) wherever the command line does not already set them.
    pub fn merge_into(&self, argv: &[String], valued_globals: &[&str], subcommands: &[&str]) -> Vec<String> {
        let given = |key: &str| {
            let flag = format!("--{key}");
            let prefix = format!("--{key}=");
            argv.iter().any(|a| *a == flag || a.starts_with(&prefix))
        };
        let mut out: Vec<String> = argv.to_vec();
        if subcommand_position(argv, valued_globals, subcommands).is_none() {
            if let Some(sub) = &self.subcommand {
                let mut head = vec![sub.clone()];
                for key in POSITIONAL_KEYS {
                    if let Some(v) = self.flags.get(*key) {
                        head.push(v.clone());
                    }
                }
                let at = 1.min(out.len());
                out.splice(at..at, head);
            }
        }
        let mut extra = Vec::new();
        if !given("seed") {
            extra.push(format!("--seed={}", self.seed));
        }
        if !given("format") {
            extra.push(format!("--format={}", self.format));
        }
        if let Some(o) = &self.out {
            if !given("out") {
                extra.push(format!("--out={o}"));
            }
        }
        for (k, v) in &self.flags {
            if !POSITIONAL_KEYS.contains(&k.as_str()) && !given(k) {
                extra.push(format!("--{k}={v}"));
            }
        }
        out.extend(extra);
        out
    }
}

/// Index of the subcommand token in `argv`, skipping values of global flags.
pub fn subcommand_position(argv: &[String], valued_globals: &[&str], subcommands: &[&str]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(name) = a.strip_prefix("--") {
            if !name.contains('=') && valued_globals.contains(&name) {
                i += 1;
            }
        } else if subcommands.contains(&a.as_str()) {
            return Some(i);
        }
        i += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_and_prints() {
        let text = "# sweep\nsubcommand = disc-mc\nseed=7\n\nformat=json\nn=3\nlaw=box:a=0,L=50\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.subcommand.as_deref(), Some("disc-mc"));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.flags["law"], "box:a=0,L=50");
        assert_eq!(RunConfig::parse(&cfg.to_text().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(RunConfig::parse("n 3"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse("n=3\nn=4"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(RunConfig::parse("seed=x"), Err(ConfigError::Value { .. })));
        assert!(matches!(RunConfig::parse("format=xml"), Err(ConfigError::Value { .. })));
        let mut cfg = RunConfig::default();
        cfg.flags.insert("poly".into(), " T".into());
        assert!(cfg.to_text().is_err());
    }

    #[test]
    fn command_line_wins() {
        let cfg = RunConfig::parse("subcommand=ff\nop=mu\np=2\npoly=T^2+T\nseed=3").unwrap();
        let subs = ["ff", "window"];
        let merged = cfg.merge_into(&args(&["boxgal", "--config", "c.txt", "--p", "3"]), &["config"], &subs);
        assert_eq!(
            merged,
            args(&["boxgal", "ff", "mu", "--config", "c.txt", "--p", "3", "--seed=3", "--format=text", "--poly=T^2+T"])
        );
        let merged = cfg.merge_into(&args(&["boxgal", "window", "--seed=1"]), &[], &subs);
        assert_eq!(merged[1], "window");
        assert!(merged.contains(&"--seed=1".to_string()));
        assert!(!merged.contains(&"--seed=3".to_string()));
    }

    #[test]
    fn finds_subcommand_after_valued_globals() {
        let v = args(&["b", "--seed", "4", "--format=json", "disc-mc"]);
        assert_eq!(subcommand_position(&v, &["seed"], &["disc-mc"]), Some(4));
        assert_eq!(subcommand_position(&args(&["b", "--config", "x"]), &["config"], &["x"]), None);
        assert_eq!(subcommand_position(&args(&["b", "--p", "3"]), &[], &["ff"]), None);
    }
}
