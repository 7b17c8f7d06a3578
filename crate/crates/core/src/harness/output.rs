//! Result rows and their CSV / plot-data / metadata files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "strategy,sweep_param,mean,stderr,trials,seconds";

/// One aggregated point of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub strategy: String,
    pub sweep_param: f64,
    pub mean: f64,
    /// Sample standard deviation over trials divided by `√trials`.
    pub stderr: f64,
    pub trials: usize,
    pub seconds: f64,
}

impl ResultRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.strategy, self.sweep_param, self.mean, self.stderr, self.trials, self.seconds
        )
    }
}

/// Renders rows under [`CSV_HEADER`]. Floats use Rust's shortest
/// round-trip formatting, so output is a pure function of the rows.
pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

fn check_rows(rows: &[ResultRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to write".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.strategy.contains([',', '\n', '"'])) {
        return Err(Error::InvalidParameter(format!(
            "strategy name {:?} cannot be written to CSV",
            r.strategy
        )));
    }
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    check_rows(rows)?;
    let path = path.as_ref();
    fs::write(path, render_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header {CSV_HEADER:?}"))),
    }
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(parse_err(i + 1, format!("expected 6 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(i + 1, format!("{s:?}: {e}")));
            Ok(ResultRow {
                strategy: f[0].to_string(),
                sweep_param: num(f[1])?,
                mean: num(f[2])?,
                stderr: num(f[3])?,
                trials: f[4].parse().map_err(|e| parse_err(i + 1, format!("{:?}: {e}", f[4])))?,
                seconds: num(f[5])?,
            })
        })
        .collect()
}

/// Characters of a series name kept in its file name.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Writes one `plot_<series>.csv` per strategy into `dir` with columns
/// `sweep_param,mean,stderr`, rows in their original order. Returns the paths.
pub fn emit_plotdata(rows: &[ResultRow], dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    check_rows(rows)?;
    let dir = dir.as_ref();
    let mut series: BTreeMap<&str, String> = BTreeMap::new();
    for r in rows {
        let body = series
            .entry(&r.strategy)
            .or_insert_with(|| String::from("sweep_param,mean,stderr\n"));
        writeln!(body, "{},{},{}", r.sweep_param, r.mean, r.stderr).expect("writing to a string");
    }
    let mut paths = Vec::new();
    for (name, body) in series {
        let path = dir.join(format!("plot_{}.csv", file_stem(name)));
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Provenance written next to the results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub config: serde_json::Value,
    pub git_hash: Option<String>,
    pub runtime_seconds: f64,
    pub crate_version: String,
}

/// Hash of the current git checkout, when run inside one.
pub fn git_hash() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

pub fn emit_meta(meta: &RunMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
