use std::path::Path;
use std::str::FromStr;

use diversample_core::kv::{self, KeyValues};
use diversample_core::{Error, NormalizerConfig, Result};

/// Keys accepted in a config file besides the normalizer ones.
const KEYS: &[&str] = &[
    "threads",
    "lenient",
    "target_tokens",
    "exhaustivity",
    "seed",
    "runs",
    "alphas",
    "alpha_max",
    "alpha_step",
    "pos_column",
    "block_size",
    "include_partial",
];

/// Values from the config file, consulted when a flag is absent.
#[derive(Debug, Default)]
pub struct Settings {
    kv: KeyValues,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let kv = match path {
            Some(p) => kv::read(p)?,
            None => KeyValues::new(),
        };
        for key in kv.keys() {
            if !KEYS.contains(&key.as_str()) && !NormalizerConfig::is_key(key) {
                return Err(Error::Config(format!("unknown config key `{key}`")));
            }
        }
        Ok(Settings { kv })
    }

    pub fn normalizer(&self) -> Result<NormalizerConfig> {
        NormalizerConfig::from_kv(&self.kv)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.kv
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.kv
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.kv.get(key) {
            Some(v) => kv::parse_bool(key, v),
            None => Ok(false),
        }
    }

    /// The flag when given, else the config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_list<T: FromStr + Clone>(
        &self,
        flag: Option<&Vec<T>>,
        key: &str,
    ) -> Result<Option<Vec<T>>> {
        match flag {
            Some(v) => Ok(Some(v.clone())),
            None => self.get_list(key),
        }
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick(flag, key)?
            .ok_or_else(|| Error::Config(format!("`--{}` is required", key.replace('_', "-"))))
    }
}
