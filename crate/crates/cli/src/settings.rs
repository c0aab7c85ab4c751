//! `key = value` config files and their merge with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::Failure;

/// Keys a config file may set; they mirror the long flag names.
pub const KEYS: [&str; 20] = [
    "weights",
    "q",
    "delta",
    "deltas",
    "order",
    "orders",
    "seed",
    "paths",
    "samples",
    "c-target",
    "out",
    "threads",
    "problem",
    "t-end",
    "x0",
    "alpha",
    "beta",
    "m",
    "suite",
    "min-order",
];

#[derive(Debug, Default)]
pub struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Failure::usage(format!(
                    "config line {}: expected key = value",
                    no + 1
                )));
            };
            let key = k.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(Failure::usage(format!(
                    "config line {}: unknown key {key:?}",
                    no + 1
                )));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    /// The flag value if given, else the file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Failure::usage(format!("config key {key}: {e}"))),
        }
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| Failure::usage(format!("missing required setting --{key}")))
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// Resolved settings of a run, written back out as a config file.
#[derive(Debug, Default)]
pub struct Echo {
    command: String,
    entries: Vec<(String, String)>,
}

impl Echo {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = format!("# stratsim {}\n", self.command);
        for (k, v) in &self.entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Comma-separated list.
pub fn parse_list<T>(s: &str) -> Result<Vec<T>, Failure>
where
    T: FromStr,
    T::Err: Display,
{
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|e| Failure::usage(format!("bad list entry {p:?}: {e}")))
        })
        .collect()
}

/// `N`, `a..b` (inclusive) or `a,b,c`.
pub fn parse_q_range(s: &str) -> Result<Vec<usize>, Failure> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: usize = a
            .trim()
            .parse()
            .map_err(|e| Failure::usage(format!("bad q range {s:?}: {e}")))?;
        let hi: usize = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|e| Failure::usage(format!("bad q range {s:?}: {e}")))?;
        if hi < lo {
            return Err(Failure::usage(format!("empty q range {s:?}")));
        }
        return Ok((lo..=hi).collect());
    }
    parse_list(s)
}
