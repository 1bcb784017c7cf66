//! Option resolution (flag, then config file, then environment, then default) and run manifests.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SEED_ENV: &str = "CLUSTERFID_SEED";
pub const DEFAULT_SEED: u64 = 1;

/// Values from a flat JSON config object, plus the record of what was resolved.
#[derive(Default)]
pub struct Resolver {
    file: Map<String, Value>,
    resolved: Map<String, Value>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Resolver::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let Value::Object(file) = value else { bail!("config {} must hold a JSON object", path.display()) };
        Ok(Resolver { file, resolved: Map::new() })
    }

    fn file_value<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).with_context(|| format!("config key '{key}'")),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        self.resolved.insert(key.into(), serde_json::to_value(value).expect("serializable option"));
    }

    /// Flag, else config file, without echoing the value into the resolved config.
    pub fn unrecorded<T: DeserializeOwned>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file_value(key),
        }
    }

    /// Flag, else config file, else `None`.
    pub fn opt<T: Serialize + DeserializeOwned + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    pub fn get<T: Serialize + DeserializeOwned + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn require<T: Serialize + DeserializeOwned + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<T> {
        match self.opt(key, flag)? {
            Some(v) => Ok(v),
            None => bail!("missing required option --{}", key.replace('_', "-")),
        }
    }

    /// Seed from flag, config file, `CLUSTERFID_SEED`, then the built-in default.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let seed = match self.opt("seed", flag)? {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(s) => s.trim().parse().with_context(|| format!("{SEED_ENV}='{s}' is not a u64"))?,
                Err(_) => DEFAULT_SEED,
            },
        };
        self.record("seed", &seed);
        Ok(seed)
    }

    pub fn resolved(&self) -> Value {
        Value::Object(self.resolved.clone())
    }
}

/// Full record of one run, written next to the primary output.
#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<PathBuf>,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
