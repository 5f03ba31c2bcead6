//! Flat `key = value` configuration files.
//!
//! One pair per line. Blank lines and lines starting with `#` are ignored.
//! Whitespace around keys and values is trimmed; a key may appear once.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub type KeyValues = BTreeMap<String, String>;

pub fn parse(text: &str, source: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = format!("{source}:{}", i + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(&loc, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::parse(&loc, "empty key"));
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::parse(&loc, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<KeyValues> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse(&text, &path.display().to_string())
}

pub fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}` expects a boolean, got `{value}`"
        ))),
    }
}
