use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use plaus_core::SCHEMA_VERSION;
use serde_json::{json, Value};

use crate::Global;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// CSV with `#` metadata lines ahead of the header. The worker count is
/// never recorded, so bodies match across `--jobs` values.
pub fn csv_with_meta(command: &str, config: &Value, body: &str) -> String {
    format!("# schema_version: {SCHEMA_VERSION}\n# command: {command}\n# config: {config}\n{body}")
}

pub fn json_report(command: &str, config: &Value, report: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "report": report,
    })
}

pub fn write_to(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes either form according to `--format`.
pub fn emit(
    global: &Global,
    command: &str,
    config: &Value,
    csv_body: &str,
    report: Value,
) -> anyhow::Result<()> {
    let text = match global.format {
        Format::Csv => csv_with_meta(command, config, csv_body),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json_report(command, config, report))?;
            s.push('\n');
            s
        }
    };
    write_to(global.out.as_deref(), &text)
}
