use std::fs;
use std::path::{Path, PathBuf};

use super::runner::ExperimentReport;
use crate::error::{Error, Result};

/// Environment variable that overrides the default output root.
pub const OUT_ENV: &str = "RCLAB_OUT";
pub const DEFAULT_OUT: &str = "results";

/// Explicit directory, else `$RCLAB_OUT`, else `./results`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    }
}

/// Writes every artifact of `report` under `<root>/<id>/` and returns the
/// paths written.
pub fn write_report(report: &ExperimentReport, root: &Path) -> Result<Vec<PathBuf>> {
    let dir = root.join(&report.id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    for a in report.all_artifacts() {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Converts each CSV of a finished run into a whitespace-separated `.dat`
/// file under `<root>/<id>/plot/`, with the CSV header as a `#` comment.
pub fn emit_plot_data(root: &Path, id: &str) -> Result<Vec<PathBuf>> {
    let dir = root.join(id);
    let summary = dir.join("summary.csv");
    if !summary.is_file() {
        return Err(Error::MissingArtifact(summary));
    }
    let mut sources: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    sources.sort();
    let plot_dir = dir.join("plot");
    fs::create_dir_all(&plot_dir).map_err(|e| Error::io(&plot_dir, e))?;
    let mut written = Vec::new();
    for src in sources {
        let mut reader = csv::Reader::from_path(&src)?;
        let mut text = format!(
            "# {}\n",
            reader.headers()?.iter().collect::<Vec<_>>().join(" ")
        );
        for rec in reader.records() {
            text.push_str(&rec?.iter().collect::<Vec<_>>().join(" "));
            text.push('\n');
        }
        let out = plot_dir.join(
            src.with_extension("dat")
                .file_name()
                .expect("csv file name"),
        );
        fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
        written.push(out);
    }
    Ok(written)
}
