//! CSV ingestion and dumping of functional samples.
//!
//! Files are comma-separated with '.' decimals. Lines starting with '#' and
//! blank lines are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::funspace::{FunctionalSample, Grid};

fn reader<R: std::io::Read>(inner: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(inner)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads a numeric table, one row per record.
pub fn read_table<R: BufRead>(input: R, name: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (line, record) in reader(input).records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{name}: {e}")))?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "{name}: record {}, column {}: cannot parse {cell:?}",
                        line + 1,
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if row.len() != first {
                return Err(Error::Parse(format!(
                    "{name}: record {} has {} columns, expected {first}",
                    line + 1,
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{name}: no data")));
    }
    Ok(rows)
}

/// Reads a vector written either as one column or as one row.
pub fn read_vector<R: BufRead>(input: R, name: &str) -> Result<Vec<f64>> {
    let rows = read_table(input, name)?;
    if rows.len() == 1 {
        Ok(rows.into_iter().next().unwrap_or_default())
    } else if rows[0].len() == 1 {
        Ok(rows.into_iter().map(|r| r[0]).collect())
    } else {
        Err(Error::Parse(format!("{name}: expected a single column")))
    }
}

pub fn read_vector_file(path: &Path) -> Result<Vec<f64>> {
    read_vector(BufReader::new(open(path)?), &path.display().to_string())
}

/// Loads an n×G data file. The grid comes from `grid_file`, from the first
/// record when `grid_header` is set, or is equidistant on [0, 1].
pub fn read_sample(data: &Path, grid_file: Option<&Path>, grid_header: bool) -> Result<FunctionalSample> {
    if grid_file.is_some() && grid_header {
        return Err(Error::InvalidArgument(
            "use either a grid file or a grid header, not both".into(),
        ));
    }
    let mut rows = read_table(BufReader::new(open(data)?), &data.display().to_string())?;
    let grid = if grid_header {
        let header = rows.remove(0);
        if rows.is_empty() {
            return Err(Error::Parse(format!("{}: no curves after the grid row", data.display())));
        }
        Grid::new(header)?
    } else if let Some(path) = grid_file {
        Grid::new(read_vector_file(path)?)?
    } else {
        Grid::equidistant(rows[0].len())?
    };
    FunctionalSample::from_rows(grid, &rows)
}

/// Writes the grid as the first record followed by one record per curve.
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_sample<W: Write>(out: &mut W, sample: &FunctionalSample) -> Result<()> {
    write_record(out, sample.grid().points())?;
    for row in sample.rows() {
        write_record(out, row)?;
    }
    Ok(())
}

pub fn write_vector<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

fn write_record<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            out.write_all(b",")?;
        }
        write!(out, "{v}")?;
        first = false;
    }
    out.write_all(b"\n")?;
    Ok(())
}
