//! Delimited text matrices: observations in rows, variables in columns.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rlrt_core::DataMatrix;

use crate::error::IoError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Header {
    /// A first row with any non-numeric field is a header.
    #[default]
    Detect,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Forced delimiter; sniffed from the first data line otherwise.
    pub delimiter: Option<u8>,
    pub header: Header,
    /// Input stores variables in rows.
    pub transpose: bool,
}

/// Tab if the line has one, else comma, else semicolon, else comma.
pub fn sniff_delimiter(line: &str) -> u8 {
    [b'\t', b',', b';']
        .into_iter()
        .find(|&d| line.as_bytes().contains(&d))
        .unwrap_or(b',')
}

pub fn read_matrix_file(path: &Path, opts: ReadOptions) -> Result<DataMatrix, IoError> {
    let file = File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut text = String::new();
    BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
    parse_matrix(&text, opts)
}

/// Parses delimited text. Lines starting with `#` and blank lines are skipped.
pub fn parse_matrix(text: &str, opts: ReadOptions) -> Result<DataMatrix, IoError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or(IoError::Empty)?;
    let delimiter = opts.delimiter.unwrap_or_else(|| sniff_delimiter(first));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut seen_first = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| IoError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if !seen_first {
            seen_first = true;
            let numeric = rec.iter().all(|f| f.parse::<f64>().is_ok());
            match opts.header {
                Header::Present => continue,
                Header::Detect if !numeric => continue,
                _ => {}
            }
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(IoError::Ragged {
                line,
                expected,
                found: rec.len(),
            });
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>().map_err(|_| IoError::Parse {
                    line,
                    column: j + 1,
                    field: f.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IoError::Empty);
    }
    let rows = if opts.transpose { transpose(&rows) } else { rows };
    Ok(DataMatrix::from_rows(&rows)?)
}

fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = rows[0].len();
    (0..cols)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect()
}

/// Shortest exponent form that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Writes `#`-prefixed `comments`, then one comma-separated row per observation.
pub fn write_matrix<W: Write>(mut w: W, data: &DataMatrix, comments: &[String]) -> Result<(), IoError> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    for i in 0..data.n() {
        let line: Vec<String> = data.row(i).iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
