//! Minimal readers and writers for the numeric CSV artifacts.

use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsvError {
    #[error("io: {0}")]
    Io(String),
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl From<io::Error> for CsvError {
    fn from(e: io::Error) -> Self {
        CsvError::Io(e.to_string())
    }
}

/// Reads a CSV whose header must equal `header` exactly and whose cells are all numeric.
pub fn read_numeric<R: BufRead>(input: R, header: &str) -> Result<Vec<Vec<f64>>, CsvError> {
    let width = header.split(',').count();
    read_numeric_with(input, |found| {
        if found == header {
            Ok(width)
        } else {
            Err(CsvError::Header {
                expected: header.to_string(),
                found: found.to_string(),
            })
        }
    })
}

/// Like [`read_numeric`] but lets the caller validate the header and pick the row width.
pub fn read_numeric_with<R, F>(input: R, check_header: F) -> Result<Vec<Vec<f64>>, CsvError>
where
    R: BufRead,
    F: FnOnce(&str) -> Result<usize, CsvError>,
{
    let mut lines = input.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    let width = check_header(first.trim_end_matches('\r'))?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| CsvError::Parse {
                    line: i + 2,
                    msg: format!("`{cell}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != width {
            return Err(CsvError::Parse {
                line: i + 2,
                msg: format!("expected {width} cells, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_width_are_checked() {
        let ok = read_numeric("a,b\n1,2\n3.5,-4e-3\n".as_bytes(), "a,b").unwrap();
        assert_eq!(ok, vec![vec![1.0, 2.0], vec![3.5, -4e-3]]);
        assert!(matches!(
            read_numeric("a,c\n1,2\n".as_bytes(), "a,b"),
            Err(CsvError::Header { .. })
        ));
        assert!(matches!(
            read_numeric("a,b\n1\n".as_bytes(), "a,b"),
            Err(CsvError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_numeric("a,b\n1,x\n".as_bytes(), "a,b"),
            Err(CsvError::Parse { .. })
        ));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert!(!dir.path().join("sub/out.csv.tmp").exists());
    }
}
