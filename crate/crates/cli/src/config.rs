//! Key-value experiment configs.

use std::path::Path;

use metivier_core::kv::KeyValues;

use crate::Failure;

/// Reads `path` (or starts empty) and rejects keys outside `allowed`.
///
/// A file that exists but holds no assignments is a usage error. An optional
/// `command` key must name the running command.
pub fn load(path: Option<&Path>, command: &str, allowed: &[&str]) -> Result<KeyValues, Failure> {
    let Some(path) = path else {
        return Ok(KeyValues::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let kv = KeyValues::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if kv.is_empty() {
        return Err(Failure::Usage(format!("config {} has no assignments", path.display())));
    }
    if let Some(c) = kv.get_str("command") {
        if c != command {
            return Err(Failure::Usage(format!("config is for `{c}`, not `{command}`")));
        }
    }
    let unknown: Vec<&str> = kv.keys().filter(|k| *k != "command" && !allowed.contains(k)).collect();
    if !unknown.is_empty() {
        return Err(Failure::Usage(format!(
            "unknown keys for {command}: {} (allowed: {})",
            unknown.join(", "),
            allowed.join(", ")
        )));
    }
    Ok(kv)
}

pub fn get<T: std::str::FromStr>(kv: &KeyValues, key: &str, default: T) -> Result<T, Failure> {
    kv.get_or(key, default).map_err(|e| Failure::Usage(e.to_string()))
}

pub fn list<T: std::str::FromStr>(kv: &KeyValues, key: &str, default: Vec<T>) -> Result<Vec<T>, Failure> {
    Ok(kv.get_list(key).map_err(|e| Failure::Usage(e.to_string()))?.unwrap_or(default))
}
