//! Deterministic JSON/CSV writers.

use crate::manifest::RunManifest;
use anosov_core::certify::SampleResult;
use anosov_core::words::FreeGroup;
use anyhow::{Context, Result};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Pretty JSON with a trailing newline; field order is fixed by the
/// payload structs, maps are sorted, so output is byte-stable.
pub fn json_string<T: Serialize>(payload: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(payload)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: Option<&Path>, payload: &T) -> Result<()> {
    let text = json_string(payload)?;
    match path {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Gap series CSV with columns `word, length, k, gap`; the manifest rides
/// along as `#` comment lines.
pub fn write_gap_series_csv(
    path: &Path,
    manifest: &RunManifest,
    group: &FreeGroup,
    series: &[SampleResult],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&manifest.csv_header());
    out.push_str("word,length,k,gap\n");
    for sample in series.iter().filter_map(|s| s.as_ref().ok()) {
        let word = csv_quote(&group.format_word(&sample.class.word));
        for (k, gap) in &sample.gaps {
            out.push_str(&format!("{word},{},{k},{gap}\n", sample.length));
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Polygon CSV with columns `x, y`, vertices in counterclockwise order.
pub fn write_polygon_csv(
    path: &Path,
    manifest: &RunManifest,
    vertices: &[Vec<f64>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&manifest.csv_header());
    out.push_str("x,y\n");
    for v in vertices {
        out.push_str(&format!("{},{}\n", v[0], v[1]));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
