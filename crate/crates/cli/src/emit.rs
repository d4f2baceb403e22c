//! Output envelope and CSV/JSON delivery.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::input::LoadedSpec;

/// Wraps a report with enough context to reproduce it.
pub fn envelope<R: Serialize>(
    command: &str,
    spec: Option<&LoadedSpec>,
    seed: u64,
    config: serde_json::Value,
    report: &R,
) -> serde_json::Value {
    let spec_block = spec.map(|s| {
        json!({
            "source": s.source,
            "sha256": s.sha256,
            "alphabet": s.alphabet_label(),
        })
    });
    json!({
        "schema": 1,
        "command": command,
        "spec": spec_block,
        "seed": seed,
        "config": config,
        "report": report,
    })
}

pub fn write_json(value: &serde_json::Value, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

/// CSV goes to `out` (or stdout); the JSON envelope rides along on
/// stdout (or stderr) so the context is never lost.
pub fn write_csv_with_summary(
    csv: &str,
    summary: &serde_json::Value,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    match out {
        Some(path) => {
            fs::write(path, csv)?;
            println!("{text}");
        }
        None => {
            print!("{csv}");
            writeln!(std::io::stderr(), "{text}")?;
        }
    }
    Ok(())
}

pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.12e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
