//! Layered configuration: built-in defaults, then an optional JSON file,
//! then `--set a.b.c=value` overrides, then the dedicated command flags.

use std::path::{Path, PathBuf};

use flapwing::evolve::EvolutionConfig;
use serde_json::Value;

use crate::Failure;

/// Environment variable naming the default root for run and analysis output.
pub const OUT_ENV: &str = "FLAPWING_OUT";

pub fn load(file: Option<&Path>, sets: &[String]) -> Result<EvolutionConfig, Failure> {
    let defaults = serde_json::to_value(EvolutionConfig::default()).map_err(|e| Failure::Internal(e.to_string()))?;
    let mut merged = defaults.clone();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("config file {}: {e}", path.display())))?;
        let user: Value =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config file {}: {e}", path.display())))?;
        check_keys(&user, &defaults, "")
            .map_err(|k| Failure::Usage(format!("config file {}: unknown key {k}", path.display())))?;
        merge(&mut merged, user);
    }
    for s in sets {
        apply_set(&mut merged, &defaults, s)?;
    }
    serde_json::from_value(merged).map_err(|e| Failure::Usage(format!("config: {e}")))
}

fn check_keys(user: &Value, defaults: &Value, prefix: &str) -> Result<(), String> {
    let (Value::Object(u), Value::Object(d)) = (user, defaults) else { return Ok(()) };
    for (k, v) in u {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match d.get(k) {
            None => return Err(path),
            Some(dv) => check_keys(v, dv, &path)?,
        }
    }
    Ok(())
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Apply `a.b.c=value`. The value is read as JSON when it parses, otherwise
/// as a bare string.
fn apply_set(config: &mut Value, defaults: &Value, set: &str) -> Result<(), Failure> {
    let (key, raw) = set.split_once('=').ok_or_else(|| Failure::Usage(format!("--set {set:?}: expected key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = config;
    let mut known = Some(defaults);
    for part in key.split('.') {
        known = known.and_then(|d| d.get(part));
        // Keys under a null default (e.g. `bounds`) cannot be checked.
        if known.is_none() && !slot.is_null() && slot.get(part).is_none() {
            return Err(Failure::Usage(format!("--set {key}: unknown key")));
        }
        if slot.is_null() {
            *slot = Value::Object(Default::default());
        }
        let obj = slot.as_object_mut().ok_or_else(|| Failure::Usage(format!("--set {key}: {part} is not inside an object")))?;
        slot = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    *slot = value;
    Ok(())
}

/// `explicit`, else `$FLAPWING_OUT/<name>`, else `./<name>`.
pub fn output_dir(explicit: Option<&Path>, name: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(name),
        _ => PathBuf::from(name),
    }
}
