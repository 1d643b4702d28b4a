use std::fs;
use std::path::Path;

use aclr::evolution::ObservableSeries;
use aclr::io;
use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::args::SeriesFormat;

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes `<stem>.csv` or `<stem>.json`; returns the file name.
pub fn write_series(dir: &Path, stem: &str, series: &ObservableSeries, format: SeriesFormat) -> Result<String> {
    let (name, body) = match format {
        SeriesFormat::Csv => (format!("{stem}.csv"), io::series_csv(series)),
        SeriesFormat::Json => (format!("{stem}.json"), io::pretty_json(series)?),
    };
    write(dir, &name, &body)?;
    Ok(name)
}

/// `manifest.json`: everything needed to re-run the command. Keys are sorted,
/// and nothing depends on the clock or on the worker count.
pub fn write_manifest(dir: &Path, command: &str, parameters: Value, results: Value) -> Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": parameters,
        "results": results,
    });
    write(dir, "manifest.json", &io::pretty_json(&manifest)?)
}
