//! Dataset ingestion from dense CSV and sparse libsvm text files.
//!
//! Labels may be written as `1`/`+1`/`-1` or `0`/`1`; zero maps to `−1`.
//! Blank lines and lines starting with `#` are skipped. Every loaded dataset
//! is rescaled so that its largest feature vector has norm 1.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, Label, LabeledExample};

fn parse_label(token: &str, path: &Path, line: usize) -> Result<Label> {
    let v: f64 = token.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("invalid label {token:?}"),
    })?;
    if v == 1.0 {
        Ok(Label::Pos)
    } else if v == -1.0 || v == 0.0 {
        Ok(Label::Neg)
    } else {
        Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("label must be -1, 0 or 1, got {token:?}"),
        })
    }
}

fn parse_value(token: &str, path: &Path, line: usize) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("invalid feature value {token:?}"),
        })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads `label, x₁, …, x_d` rows.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut examples = Vec::new();
    let mut dim = None;
    for (line, row) in content_lines(&text) {
        let mut fields = row.split(',');
        let y = parse_label(fields.next().unwrap_or(""), path, line)?;
        let x = fields
            .map(|f| parse_value(f, path, line))
            .collect::<Result<Vec<_>>>()?;
        if x.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "row has no features".into(),
            });
        }
        match dim {
            None => dim = Some(x.len()),
            Some(d) if d != x.len() => {
                return Err(Error::InconsistentDimension {
                    path: path.to_path_buf(),
                    line,
                    expected: d,
                    found: x.len(),
                })
            }
            _ => {}
        }
        examples.push(LabeledExample::new(x, y));
    }
    let dim = dim.ok_or_else(|| Error::EmptyFile(path.to_path_buf()))?;
    Ok(Dataset::new(dim, examples)?.normalized())
}

/// Reads `label idx:value …` rows with 1-based feature indices. The
/// dimension is the largest index seen; absent features are zero.
pub fn ingest_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut dim = 0;
    for (line, row) in content_lines(&text) {
        let mut tokens = row.split_whitespace();
        let y = parse_label(tokens.next().unwrap_or(""), path, line)?;
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected index:value, got {tok:?}"),
            })?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("feature index must be a positive integer, got {idx:?}"),
                })?;
            dim = dim.max(idx);
            entries.push((idx - 1, parse_value(val, path, line)?));
        }
        rows.push((entries, y));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    if dim == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no features in file".into(),
        });
    }
    let examples = rows
        .into_iter()
        .map(|(entries, y)| {
            let mut x = vec![0.0; dim];
            for (i, v) in entries {
                x[i] = v;
            }
            LabeledExample::new(x, y)
        })
        .collect();
    Ok(Dataset::new(dim, examples)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_fixture() {
        let f = file("1, 0.5, 0.5\n-1, 0.1, 0.2\n0, 0.3, -0.4\n");
        let ds = ingest_csv(f.path()).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 2));
        assert_eq!(ds.examples()[2].y, Label::Neg);
        assert!((ds.max_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_errors_name_lines() {
        let f = file("1, 0.5, 0.5\n1, abc, 0.5\n");
        match ingest_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let f = file("1, 0.5, 0.5\n1, 0.5\n");
        assert!(matches!(
            ingest_csv(f.path()),
            Err(Error::InconsistentDimension { line: 2, expected: 2, found: 1, .. })
        ));
        let f = file("# nothing\n\n");
        assert!(matches!(ingest_csv(f.path()), Err(Error::EmptyFile(_))));
        let f = file("2, 0.5\n");
        assert!(matches!(ingest_csv(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn libsvm_fixture() {
        let f = file("+1 1:0.5 3:0.5\n-1 2:1\n0 1:0.25\n");
        let ds = ingest_libsvm(f.path()).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 3));
        assert_eq!(ds.examples()[0].x, vec![0.5, 0.0, 0.5]);
        assert_eq!(ds.examples()[2].y, Label::Neg);
        let f = file("1 0:1\n");
        assert!(matches!(ingest_libsvm(f.path()), Err(Error::Parse { line: 1, .. })));
        let f = file("1 1:1\n1 2\n");
        assert!(matches!(ingest_libsvm(f.path()), Err(Error::Parse { line: 2, .. })));
    }
}
