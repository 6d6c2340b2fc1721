//! The results CSV: one row per matrix size, times with four decimals,
//! speedups with two decimals and an `x` suffix, `NA` for absent cells.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::speedup::{SpeedupRow, SpeedupTable};

pub const CSV_HEADER: &str = "Matrix_Size,Sequential_CPU_ms,Parallel_CPU_ms,Parallel_GPU_ms,\
Speedup_CPU_vs_Seq,Speedup_GPU_vs_CPU,Speedup_GPU_vs_Seq";

const NA: &str = "NA";
const COLUMNS: usize = 7;

pub fn emit_csv(table: &SpeedupTable) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{n}x{n},{},{},{},{},{},{}",
            time_cell(row.seq_ms),
            time_cell(row.par_cpu_ms),
            time_cell(row.gpu_ms),
            speedup_cell(row.speedup_cpu_vs_seq),
            speedup_cell(row.speedup_gpu_vs_cpu),
            speedup_cell(row.speedup_gpu_vs_seq),
            n = row.n,
        );
    }
    Ok(out)
}

pub(crate) fn time_cell(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_owned(), |t| format!("{t:.4}"))
}

pub(crate) fn speedup_cell(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_owned(), |s| format!("{s:.2}x"))
}

/// Parses a results CSV produced by [`emit_csv`]. The header must match
/// [`CSV_HEADER`] byte for byte. Speedups are taken as written, not
/// recomputed.
pub fn parse_csv(text: &str) -> Result<SpeedupTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: format!("empty input, expected header `{CSV_HEADER}`"),
            })
        }
        Some(rec) => rec.map_err(csv_error)?,
    };
    let found = header.iter().collect::<Vec<_>>().join(",");
    if found != CSV_HEADER {
        return Err(Error::HeaderMismatch {
            expected: CSV_HEADER.to_owned(),
            found,
        });
    }

    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != COLUMNS {
            return Err(Error::Parse {
                line,
                message: format!("expected {COLUMNS} fields, found {}", rec.len()),
            });
        }
        let err = |message: String| Error::Parse { line, message };
        let n = parse_size(&rec[0]).map_err(err)?;
        let time = |i: usize| parse_time(&rec[i]).map_err(err);
        let speedup = |i: usize| parse_speedup(&rec[i]).map_err(err);
        rows.push(SpeedupRow {
            n,
            seq_ms: time(1)?,
            par_cpu_ms: time(2)?,
            gpu_ms: time(3)?,
            speedup_cpu_vs_seq: speedup(4)?,
            speedup_gpu_vs_cpu: speedup(5)?,
            speedup_gpu_vs_seq: speedup(6)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(SpeedupTable { rows })
}

/// The table as it reads back after a CSV round trip: times rounded to
/// four decimals and speedups to two.
pub fn quantize(table: &SpeedupTable) -> SpeedupTable {
    let time = |v: Option<f64>| v.and_then(|t| format!("{t:.4}").parse().ok());
    let speedup = |v: Option<f64>| v.and_then(|s| format!("{s:.2}").parse().ok());
    SpeedupTable {
        rows: table
            .rows
            .iter()
            .map(|r| SpeedupRow {
                n: r.n,
                seq_ms: time(r.seq_ms),
                par_cpu_ms: time(r.par_cpu_ms),
                gpu_ms: time(r.gpu_ms),
                speedup_cpu_vs_seq: speedup(r.speedup_cpu_vs_seq),
                speedup_gpu_vs_cpu: speedup(r.speedup_gpu_vs_cpu),
                speedup_gpu_vs_seq: speedup(r.speedup_gpu_vs_seq),
            })
            .collect(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn parse_size(cell: &str) -> std::result::Result<usize, String> {
    let (rows, cols) = cell
        .split_once('x')
        .ok_or_else(|| format!("matrix size `{cell}` is not of the form NxN"))?;
    let parse = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0 && s.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| format!("invalid dimension `{s}` in matrix size `{cell}`"))
    };
    let (rows, cols) = (parse(rows)?, parse(cols)?);
    if rows != cols {
        return Err(format!("matrix size `{cell}` is not square"));
    }
    Ok(rows)
}

fn parse_number(cell: &str, what: &str) -> std::result::Result<f64, String> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("invalid {what} `{cell}`")),
    }
}

fn parse_time(cell: &str) -> std::result::Result<Option<f64>, String> {
    if cell == NA {
        return Ok(None);
    }
    parse_number(cell, "time").map(Some)
}

fn parse_speedup(cell: &str) -> std::result::Result<Option<f64>, String> {
    if cell == NA {
        return Ok(None);
    }
    let num = cell
        .strip_suffix('x')
        .ok_or_else(|| format!("speedup `{cell}` lacks the `x` suffix"))?;
    parse_number(num, "speedup").map(Some)
}
