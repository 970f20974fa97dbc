//! CSV ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use blockmix::DataMatrix;

use crate::CliError;

/// Reads a rectangular numeric table: rows are individuals, columns variables.
///
/// Row and column numbers in errors are 1-based and count data rows only;
/// `line` is the physical line in the file.
pub fn load_csv(path: &Path, has_header: bool, delimiter: u8) -> Result<DataMatrix, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_csv(file, has_header, delimiter)
}

pub fn read_csv<R: Read>(
    reader: R,
    has_header: bool,
    delimiter: u8,
) -> Result<DataMatrix, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CliError::RaggedRow {
                    line,
                    expected: w,
                    found: record.len(),
                })
            }
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| CliError::NonNumeric {
                row: k + 1,
                col: c + 1,
                line,
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        n += 1;
    }
    let p = width.unwrap_or(0);
    if n == 0 || p == 0 {
        return Err(CliError::EmptyInput);
    }
    Ok(DataMatrix::new(n, p, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str, header: bool) -> Result<DataMatrix, CliError> {
        read_csv(s.as_bytes(), header, b',')
    }

    #[test]
    fn plain_and_header() {
        let x = read("1,2\n3,4", false).unwrap();
        assert_eq!((x.n(), x.p(), x.get(0, 0)), (2, 2, 1.0));
        let x = read("a,b\n1,2", true).unwrap();
        assert_eq!((x.n(), x.p()), (1, 2));
    }

    #[test]
    fn non_numeric_cell() {
        match read("1,x", false) {
            Err(CliError::NonNumeric { row: 1, col: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty() {
        assert!(matches!(
            read("1,2\n3,4\n5\n", false),
            Err(CliError::RaggedRow {
                line: 3,
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(read("", false), Err(CliError::EmptyInput)));
        assert!(matches!(read("a,b\n", true), Err(CliError::EmptyInput)));
    }

    #[test]
    fn other_delimiter() {
        let x = read_csv("1;2.5\n-3;4e1\n".as_bytes(), false, b';').unwrap();
        assert_eq!(x.get(1, 1), 40.0);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(read("1,inf", false), Err(CliError::Model(_))));
    }
}
