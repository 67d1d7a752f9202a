//! Flag and config-file handling: `--key value` pairs on the command line,
//! optionally layered over a `key = value` file given by `--config`; flags
//! win. Boolean flags accept `--key` alone as `true`.

use std::collections::HashMap;

#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn parse(args: &[String]) -> Result<Config, String> {
        let mut flags: HashMap<String, String> = HashMap::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| format!("expected --flag, got `{arg}`"))?
                .to_string();
            if key.is_empty() {
                return Err("empty flag name".into());
            }
            let value = if i + 1 < args.len() && !args[i + 1].starts_with("--") {
                i += 1;
                args[i].clone()
            } else {
                "true".to_string()
            };
            flags.insert(key, value);
            i += 1;
        }

        let mut values = HashMap::new();
        if let Some(path) = flags.get("config") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {path}: {e}"))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("{path}:{}: expected key = value", lineno + 1))?;
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        values.extend(flags);
        Ok(Config { values })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn require(&self, key: &str) -> Result<String, super::CliError> {
        self.get(key)
            .ok_or_else(|| super::CliError::Config(format!("missing required --{key}")))
    }

    pub fn require_u64(&self, key: &str) -> Result<u64, super::CliError> {
        self.require(key)?
            .parse()
            .map_err(|e| super::CliError::Config(format!("--{key}: {e}")))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64, super::CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| super::CliError::Config(format!("--{key}: {e}"))),
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64, super::CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| super::CliError::Config(format!("--{key}: {e}"))),
        }
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool, super::CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| super::CliError::Config(format!("--{key}: {e}"))),
        }
    }

    /// The only supported output format is CSV (plus the plain-text params
    /// block); anything else is a config error.
    pub fn check_format(&self) -> Result<(), super::CliError> {
        match self.get("format").as_deref() {
            None | Some("csv") => Ok(()),
            Some(other) => Err(super::CliError::Config(format!(
                "unsupported format `{other}`"
            ))),
        }
    }
}
