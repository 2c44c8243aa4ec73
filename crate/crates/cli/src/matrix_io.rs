//! Plain-text matrix files: a `rows cols` header followed by the entries in
//! row-major order, separated by any whitespace.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use expgram::DenseMatrix;

use crate::error::CliError;

/// Parses matrix text; `source` only labels error messages.
pub fn parse_matrix(text: &str, source: &str) -> Result<DenseMatrix, CliError> {
    let err = |line: usize, message: String| CliError::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| err(1, "missing `rows cols` header".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(err(header_line, format!("malformed header {:?}, expected `rows cols`", header.trim())));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| err(header_line, format!("malformed header: {s:?} is not a dimension")))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if rows == 0 || cols == 0 {
        return Err(err(header_line, "dimensions must be positive".into()));
    }

    let expected = rows * cols;
    let mut data = Vec::with_capacity(expected);
    let mut last_line = header_line;
    for (n, line) in lines {
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| err(n, format!("invalid number {tok:?}")))?;
            if !x.is_finite() {
                return Err(err(n, format!("non-finite value {tok:?}")));
            }
            data.push(x);
            last_line = n;
        }
    }
    if data.len() != expected {
        return Err(err(last_line, format!("expected {expected} values, found {}", data.len())));
    }
    Ok(DenseMatrix::from_row_major(rows, cols, data)?)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text, &path.display().to_string())
}

/// Formats with 17 significant digits, enough to round-trip every double.
pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn write_matrix(m: &DenseMatrix, path: &Path) -> Result<(), CliError> {
    fs::write(path, format_matrix(m)).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_matrix("1 1\n2.5", "t").unwrap(), DenseMatrix::from_rows(&[[2.5]]));
        assert_eq!(parse_matrix("2 2\n1 0\n0 1", "t").unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn wrong_count_reports_line() {
        let e = parse_matrix("2 2\n1 0 0", "a.txt").unwrap_err();
        assert_eq!(e.to_string(), "a.txt: line 2: expected 4 values, found 3");
    }

    #[test]
    fn bad_tokens() {
        let e = parse_matrix("1 2\n1 x", "t").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("invalid number"), "{e}");
        let e = parse_matrix("1 1\ninf", "t").unwrap_err().to_string();
        assert!(e.contains("non-finite"), "{e}");
        let e = parse_matrix("2\n1 2", "t").unwrap_err().to_string();
        assert!(e.contains("line 1") && e.contains("header"), "{e}");
        assert!(parse_matrix("", "t").is_err());
        assert!(parse_matrix("0 3\n", "t").is_err());
    }

    #[test]
    fn layout_is_free_form() {
        let m = parse_matrix("\n2 3\n1 2\n3 4 5\n  6\n", "t").unwrap();
        assert_eq!(m.row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = DenseMatrix::from_rows(&[
            [0.1, -1.0 / 3.0, std::f64::consts::PI],
            [f64::MIN_POSITIVE, 1e300, -0.0],
        ]);
        let back = parse_matrix(&format_matrix(&m), "t").unwrap();
        for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
