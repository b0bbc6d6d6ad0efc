use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ExactMatrix;
use crate::error::{Error, Result};

/// Renders an integer as `"p"` and a proper fraction as `"p/q"`.
pub fn rational_to_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"p"` or `"p/q"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((p, q)) => {
            let p = p.trim().parse::<BigInt>().map_err(|_| bad())?;
            let q = q.trim().parse::<BigInt>().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
    }
}

/// Parses the matrix text format: a `"rows cols"` header followed by one
/// line per row of space-separated entries.
pub fn parse_matrix(text: &str) -> Result<ExactMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("bad header {header:?}")));
    };
    let mut data = Vec::with_capacity(rows);
    for i in 0..rows {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {}", i + 1)))?;
        let row: Vec<BigRational> = line.split_whitespace().map(parse_rational).collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!("row {} has {} entries, expected {}", i + 1, row.len(), cols)));
        }
        data.push(row);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing rows after matrix".into()));
    }
    ExactMatrix::from_rows(data).map_err(|e| Error::Parse(e.to_string()))
}

pub fn format_matrix(m: &ExactMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(rational_to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        let m = parse_matrix("2 2\n5 1\n0 -3/6\n").unwrap();
        assert_eq!(m.get(1, 1), &BigRational::new((-1).into(), 2.into()));
        assert_eq!(format_matrix(&m), "2 2\n5 1\n0 -1/2\n");
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn malformed_inputs() {
        for text in ["", "2\n1 2", "2 2\n1 2\n3", "2 2\n1 x\n3 4", "2 2\n1 2\n3 4\n5 6", "1 1\n1/0"] {
            assert!(matches!(parse_matrix(text), Err(Error::Parse(_))), "{text:?}");
        }
    }
}
