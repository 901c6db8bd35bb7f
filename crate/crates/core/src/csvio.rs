//! Small CSV helpers shared by the file formats of every module.
//!
//! Numbers are written with Rust's shortest round-trip formatting, which is
//! locale independent, and rows end with `\n`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Numeric table read from CSV: an optional non-numeric header row, then
/// numeric records. Lines starting with `#` are comments and are returned
/// separately.
#[derive(Debug, Clone, Default)]
pub struct NumericTable {
    pub header: Option<Vec<String>>,
    pub comments: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_numeric_table<R: Read>(reader: R, origin: &Path) -> Result<NumericTable> {
    let mut text = String::new();
    let mut reader = reader;
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io(origin, e))?;
    let mut table = NumericTable::default();
    let mut data_lines = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(c) = trimmed.strip_prefix('#') {
            table.comments.push(c.trim().to_string());
        } else {
            data_lines.push(trimmed);
        }
    }
    let joined = data_lines.join("\n");
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(joined.as_bytes());
    for (line_no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => table.rows.push(values),
            Err(_) if line_no == 0 => {
                table.header = Some(rec.iter().map(str::to_string).collect());
            }
            Err(e) => {
                return Err(Error::parse(
                    origin,
                    format!("record {}: {}", line_no + 1, e),
                ))
            }
        }
    }
    Ok(table)
}

pub fn read_numeric_file(path: &Path) -> Result<NumericTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_numeric_table(file, path)
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn write_line<W: Write>(w: &mut W, fields: &[String], path: &Path) -> Result<()> {
    w.write_all(fields.join(",").as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn fmt_row(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v}")).collect()
}

pub(crate) fn finish<W: Write>(mut w: W, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}
