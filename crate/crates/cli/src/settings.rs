//! Layered option lookup: command-line flags win over the `--config` file,
//! which wins over `CABINFARE_*` environment variables.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Keys accepted in the `--config` file. The environment variable for a key
/// is `CABINFARE_` followed by the key in upper case.
pub const KEYS: [&str; 11] = [
    "maps",
    "format",
    "spec",
    "seed",
    "max_rejected_share",
    "adv_log",
    "lasso_c",
    "lasso_gamma",
    "lasso_refresh",
    "threads",
    "out",
];

const ENV_PREFIX: &str = "CABINFARE_";

#[derive(Debug, Clone, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    env: BTreeMap<String, String>,
}

impl Settings {
    /// Reads the optional config file and the process environment.
    pub fn load(config: Option<&Path>) -> Result<Self> {
        let text = match config {
            Some(path) => {
                Some(std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?)
            }
            None => None,
        };
        Settings::from_parts(text.as_deref(), std::env::vars())
    }

    pub fn from_parts(file_text: Option<&str>, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(text) = file_text {
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) =
                    line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected `key = value`", i + 1))?;
                let key = key.trim();
                if !KEYS.contains(&key) {
                    bail!("config line {}: unknown key `{key}` (known: {})", i + 1, KEYS.join(", "));
                }
                file.insert(key.to_string(), value.trim().to_string());
            }
        }
        let env = env
            .into_iter()
            .filter_map(|(k, v)| {
                let key = k.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
                KEYS.contains(&key.as_str()).then_some((key, v))
            })
            .collect();
        Ok(Settings { file, env })
    }

    /// Raw value from the file, else the environment.
    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        self.file.get(key).or_else(|| self.env.get(key)).map(String::as_str)
    }

    /// The flag value when given, otherwise the parsed file or environment value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| anyhow!("setting `{key}` = `{v}`: {e}")),
        }
    }

    pub fn pick_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn flag_beats_file_beats_env() {
        let s =
            Settings::from_parts(Some("format = tsv\n"), env(&[("CABINFARE_FORMAT", "json"), ("CABINFARE_SPEC", "6")]))
                .unwrap();
        assert_eq!(s.pick(Some("text".to_string()), "format").unwrap().unwrap(), "text");
        assert_eq!(s.pick::<String>(None, "format").unwrap().unwrap(), "tsv");
        assert_eq!(s.pick::<String>(None, "spec").unwrap().unwrap(), "6");
        assert_eq!(s.pick::<String>(None, "maps").unwrap(), None);
    }

    #[test]
    fn comments_and_blank_lines() {
        let s = Settings::from_parts(Some("# run settings\n\nseed = 7 # fixed\n"), env(&[])).unwrap();
        assert_eq!(s.pick::<u64>(None, "seed").unwrap(), Some(7));
    }

    #[test]
    fn unknown_file_key_is_an_error() {
        let err = Settings::from_parts(Some("seed = 1\ncolour = red\n"), env(&[])).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unrelated_env_ignored() {
        let s = Settings::from_parts(None, env(&[("CABINFARE_LOG", "x"), ("PATH", "/bin")])).unwrap();
        assert_eq!(s.raw("maps"), None);
    }

    #[test]
    fn bad_value_names_the_key() {
        let s = Settings::from_parts(Some("seed = many\n"), env(&[])).unwrap();
        let err = s.pick::<u64>(None, "seed").unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }
}
