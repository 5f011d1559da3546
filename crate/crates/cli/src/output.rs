use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use tamperlab_core::experiments::ExperimentReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
        }
    }
}

pub fn render(report: &ExperimentReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(report.to_json()?.into_bytes()),
        Format::Csv => {
            let mut buf = Vec::new();
            for line in report.csv_stamp()? {
                writeln!(buf, "{line}")?;
            }
            let mut w = csv::Writer::from_writer(&mut buf);
            if report.rows.is_empty() {
                w.write_record(["seed", "trial", "s", "t", "value"])?;
            }
            for row in &report.rows {
                w.serialize(row)?;
            }
            w.flush()?;
            drop(w);
            Ok(buf)
        }
    }
}

/// Writes `<dir>/<command>.<ext>`, or to stdout without `--out`. Returns the
/// path written, if any.
pub fn emit(report: &ExperimentReport, out: Option<&Path>, format: Format) -> Result<Option<PathBuf>> {
    let bytes = render(report, format)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{}.{}", report.command, format.extension()));
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            Ok(Some(path))
        }
        None => {
            io::stdout().write_all(&bytes)?;
            Ok(None)
        }
    }
}
