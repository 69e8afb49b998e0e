//! Default flag values from a JSON file. Flags already on the command line
//! win; the rest are appended after the subcommand.

use std::collections::HashSet;

use anyhow::Context;
use serde_json::Value;

use crate::UsageError;

fn flag_value(args: &[String], flag: &str) -> Option<String> {
    let eq = format!("{flag}=");
    args.iter().enumerate().find_map(|(i, a)| {
        if a == flag {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix(&eq).map(str::to_string)
        }
    })
}

fn present(args: &[String]) -> HashSet<String> {
    args.iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect()
}

/// Converts one JSON flag map into command-line arguments, skipping flags in
/// `skip`.
pub fn flags_to_args(
    map: &serde_json::Map<String, Value>,
    skip: &HashSet<String>,
) -> anyhow::Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, value) in map {
        if skip.contains(key) || key == "config" {
            continue;
        }
        let flag = format!("--{key}");
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag, s.clone()]),
            Value::Number(n) => out.extend([flag, n.to_string()]),
            Value::Array(items) => {
                for item in items {
                    let text = match item {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.extend([flag.clone(), text]);
                }
            }
            Value::Object(_) => {
                return Err(UsageError(format!("config flag {key} cannot be an object")).into())
            }
        }
    }
    Ok(out)
}

pub fn merge(mut args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(path) = flag_value(&args, "--config") else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| UsageError(format!("config {path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(UsageError(format!("config {path}: expected a JSON object")).into());
    };
    let extra = flags_to_args(&map, &present(&args))?;
    args.extend(extra);
    Ok(args)
}
