use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "fermi-ee/v1";
pub const WORKERS_ENV: &str = "FERMI_EE_WORKERS";

/// Parsed `--config` file: an object with an optional top-level `workers`
/// and one section per subcommand.
#[derive(Debug, Default)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(root)) => Ok(Self { root }),
            Ok(_) => Err(CliError::Usage(format!("config {}: expected a JSON object", path.display()))),
            Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
        }
    }

    pub fn section(&self, name: &str) -> Option<&Value> {
        self.root.get(name)
    }

    pub fn workers(&self) -> Result<Option<usize>, CliError> {
        match self.root.get("workers") {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| CliError::Usage(format!("config: workers must be a positive integer, got {v}"))),
        }
    }
}

/// Overlays the flags that were given on top of a config section.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, section: Option<&Value>, name: &str) -> Result<T, CliError> {
    let mut base = match section {
        None => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(CliError::Usage(format!("config section '{name}' must be an object"))),
    };
    if let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? {
        for (k, v) in given {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("config section '{name}': {e}")))
}

/// Flag, then config file, then `FERMI_EE_WORKERS`.
pub fn resolve_workers(flag: Option<usize>, config: &ConfigFile) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag.or(config.workers()?) {
        return Ok(Some(n));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{s}'"))),
        _ => Ok(None),
    }
}

pub fn install_pool(workers: Option<usize>) -> Result<(), CliError> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("workers must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))
}
