//! CSV input and output. The header row holds item labels, each body row a
//! ranking; missing entries are written as `NA` (an empty field is also
//! accepted on input).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ranking::{PartialRanking, Ranking, RankingDataset};

pub const NA_TOKEN: &str = "NA";

fn csv_err(row: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Csv { row, col, msg: msg.into() }
}

/// Parses a ranking CSV. Error positions are 1-based file line and column.
pub fn read_csv<R: Read>(reader: R) -> Result<RankingDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_err(1, 1, e.to_string()))?,
        None => return Err(csv_err(1, 1, "missing header row")),
    };
    let labels: Vec<String> = header.iter().map(str::to_string).collect();
    let n = labels.len();
    if n == 0 || (n == 1 && labels[0].is_empty()) {
        return Err(csv_err(1, 1, "empty header"));
    }
    let mut rows = Vec::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| csv_err(line, 1, e.to_string()))?;
        if rec.len() != n {
            return Err(csv_err(line, rec.len().min(n) + 1, format!("expected {n} fields, found {}", rec.len())));
        }
        let mut seen = vec![false; n + 1];
        let mut entries = Vec::with_capacity(n);
        for (j, field) in rec.iter().enumerate() {
            if field.is_empty() || field == NA_TOKEN {
                entries.push(None);
                continue;
            }
            let v: usize = field.parse().map_err(|_| csv_err(line, j + 1, format!("not a rank: {field:?}")))?;
            if v == 0 || v > n {
                return Err(csv_err(line, j + 1, format!("rank {v} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(csv_err(line, j + 1, format!("duplicate rank {v}")));
            }
            entries.push(Some(v));
        }
        rows.push(PartialRanking::new(entries)?);
    }
    RankingDataset::new(rows, labels)
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<RankingDataset> {
    let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(std::io::BufReader::new(f))
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Writes partial rankings with `NA` for missing entries.
pub fn write_csv<W: Write>(writer: W, labels: &[String], rows: &[PartialRanking]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(labels).map_err(io_err)?;
    for r in rows {
        w.write_record(r.entries().iter().map(|x| x.map_or_else(|| NA_TOKEN.to_string(), |v| v.to_string())))
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_dataset<W: Write>(writer: W, data: &RankingDataset) -> Result<()> {
    write_csv(writer, data.item_labels(), data.rows())
}

pub fn write_rankings<W: Write>(writer: W, labels: &[String], rows: &[Ranking]) -> Result<()> {
    let rows: Vec<PartialRanking> = rows.iter().map(PartialRanking::from).collect();
    write_csv(writer, labels, &rows)
}

/// Writes a numeric matrix with a header row of column labels and a first
/// column of row labels.
pub fn write_matrix<W: Write, T: std::fmt::Display>(
    writer: W,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    matrix: &[Vec<T>],
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(std::iter::once(corner).chain(col_labels.iter().map(String::as_str))).map_err(io_err)?;
    for (label, row) in row_labels.iter().zip(matrix) {
        w.write_record(std::iter::once(label.clone()).chain(row.iter().map(|x| x.to_string()))).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
