//! Delimited-text ingestion. Every selected cell must parse as a finite number.

use std::fs::File;
use std::io::{Read, Write};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// A column addressed by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

#[derive(Debug, Clone)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub has_header: bool,
    pub delimiter: u8,
    /// Feature columns to keep, in this order; all columns when `None`.
    pub column_filter: Option<Vec<ColumnRef>>,
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into(), has_header: true, delimiter: b',', column_filter: None }
    }
}

/// Reads the file named by `spec` into a matrix.
pub fn ingest_csv(spec: &IngestSpec) -> Result<DataMatrix> {
    read_delimited(File::open(&spec.path)?, spec)
}

/// As [`ingest_csv`], reading from any byte source; `spec.path` is ignored.
pub fn read_delimited<R: Read>(reader: R, spec: &IngestSpec) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(spec.has_header)
        .delimiter(spec.delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let header: Option<Vec<String>> =
        if spec.has_header { Some(reader.headers()?.iter().map(str::to_string).collect()) } else { None };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut selected: Option<Vec<usize>> = None;
    let mut width = header.as_ref().map(Vec::len);
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let expected = *width.get_or_insert(record.len());
        let picks = match &selected {
            Some(p) => p,
            None => {
                let p = resolve_columns(spec.column_filter.as_deref(), header.as_deref(), expected)?;
                columns = vec![Vec::new(); p.len()];
                selected.insert(p)
            }
        };
        for (out, &col) in columns.iter_mut().zip(picks.iter()) {
            let cell = match record.get(col) {
                Some(c) if !c.is_empty() => c,
                _ => return Err(Error::Missing { row, col }),
            };
            let value: f64 = cell.parse().map_err(|_| Error::Parse { row, col, value: cell.to_string() })?;
            if !value.is_finite() {
                return Err(Error::NonFinite { row, col, value });
            }
            out.push(value);
        }
    }

    let picks = match selected {
        Some(p) => p,
        None => resolve_columns(spec.column_filter.as_deref(), header.as_deref(), width.unwrap_or(0))?,
    };
    if picks.is_empty() {
        return Err(Error::NoFeatures);
    }
    let rows = columns.first().map_or(0, Vec::len);
    if rows < 2 {
        return Err(Error::TooFewRows(rows));
    }
    let names = picks.iter().map(|&c| header.as_ref().map_or_else(|| c.to_string(), |h| h[c].clone())).collect();
    DataMatrix::from_named_columns(columns, names)
}

fn resolve_columns(filter: Option<&[ColumnRef]>, header: Option<&[String]>, width: usize) -> Result<Vec<usize>> {
    let Some(filter) = filter else {
        return Ok((0..width).collect());
    };
    filter
        .iter()
        .map(|c| match c {
            ColumnRef::Index(i) if *i < width => Ok(*i),
            ColumnRef::Index(i) => Err(Error::UnknownColumn(i.to_string())),
            ColumnRef::Name(name) => {
                header.and_then(|h| h.iter().position(|n| n == name)).ok_or_else(|| Error::UnknownColumn(name.clone()))
            }
        })
        .collect()
}

/// Writes `matrix` with a header row. Values use the shortest representation that
/// parses back to the same float.
pub fn write_delimited<W: Write>(matrix: &DataMatrix, writer: W, delimiter: u8) -> Result<()> {
    let mut out = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    out.write_record(matrix.names())?;
    for row in 0..matrix.n() {
        out.write_record((0..matrix.d()).map(|col| matrix.value(row, col).to_string()))?;
    }
    out.flush()?;
    Ok(())
}
