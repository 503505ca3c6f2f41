use std::fmt::Display;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::error::Result;

use super::args::Format;

/// Everything needed to reproduce a report.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: &'static str,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn start(command: Vec<String>, config: serde_json::Value, seed: u64) -> Self {
        RunManifest {
            command,
            config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started_unix: now(),
            finished_unix: 0,
            outputs: Vec::new(),
        }
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// A finished command: pass flag, one-line summary, JSON report and CSV table.
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub report: serde_json::Value,
    pub csv: Csv,
}

impl Outcome {
    pub fn new<R: Serialize>(pass: bool, summary: impl Into<String>, report: &R, csv: Csv) -> Result<Self> {
        let report = serde_json::to_value(report).map_err(|e| crate::Error::Parse(e.to_string()))?;
        Ok(Outcome { pass, summary: summary.into(), report, csv })
    }
}

pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Csv { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: &[&dyn Display]) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.iter().map(|c| c.to_string()).collect());
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",") + "\n";
        for r in &self.rows {
            out += &r.join(",");
            out.push('\n');
        }
        out
    }
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Writes the report. With `--out` the files land in the directory and stdout gets the
/// summary; without it stdout gets the report and stderr the summary.
pub fn emit(outcome: &Outcome, mut manifest: RunManifest, format: Format, out: Option<&Path>) -> Result<()> {
    let body = |manifest: &RunManifest| match format {
        Format::Json => serde_json::to_string_pretty(&json!({ "manifest": manifest, "report": outcome.report }))
            .expect("json values serialize")
            + "\n",
        Format::Csv => outcome.csv.render(),
    };
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let ext = if format == Format::Json { "json" } else { "csv" };
            let report_path = dir.join(format!("report.{ext}"));
            let manifest_path = dir.join("manifest.json");
            manifest.outputs = vec![report_path.display().to_string(), manifest_path.display().to_string()];
            manifest.finished_unix = now();
            std::fs::write(&report_path, body(&manifest))?;
            let full = json!({ "manifest": manifest, "report": outcome.report });
            std::fs::write(&manifest_path, serde_json::to_string_pretty(&full).expect("json values serialize") + "\n")?;
            println!("{}", outcome.summary);
        }
        None => {
            manifest.finished_unix = now();
            print!("{}", body(&manifest));
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(())
}
