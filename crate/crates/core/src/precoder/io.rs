//! Plain-text precoder files.
//!
//! ```text
//! # kind=type2 theta=none label=algebraic-rotation-dim4
//! 1.0000000000000000e0 0.0000000000000000e0 ...
//! ```
//! One row per line, row-major, 17 significant digits.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::{Precoder, PrecoderKind};
use crate::error::{Error, Result};

pub fn write_precoder<W: Write>(p: &Precoder, mut out: W) -> Result<()> {
    let theta = p.theta().map_or_else(|| "none".to_string(), |t| format!("{t:.16e}"));
    let label: String = p.label().chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    writeln!(out, "# kind={} theta={} label={}", p.kind(), theta, label)?;
    for row in p.matrix().row_iter() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_precoder<R: BufRead>(input: R) -> Result<Precoder> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty precoder file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("precoder file must start with a `#` metadata line".into()))?;

    let (mut kind, mut theta, mut label) = (None, None, String::new());
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed metadata field `{field}`")))?;
        match key {
            "kind" => kind = Some(value.parse::<PrecoderKind>()?),
            "theta" if value == "none" => theta = None,
            "theta" => {
                theta = Some(value.parse::<f64>().map_err(|e| Error::Parse(format!("theta: {e}")))?);
            }
            "label" => label = value.to_string(),
            _ => {}
        }
    }
    let kind = kind.ok_or_else(|| Error::Parse("metadata line lacks `kind`".into()))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("matrix entry `{t}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse("precoder matrix must be square and nonempty".into()));
    }
    Precoder::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]), kind, theta, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precoder::{type2_rotation, xcode_precoder};

    #[test]
    fn round_trip_is_exact() {
        for p in [type2_rotation(4).unwrap().precoder, xcode_precoder(2, 4).unwrap()] {
            let mut buf = Vec::new();
            write_precoder(&p, &mut buf).unwrap();
            let back = read_precoder(buf.as_slice()).unwrap();
            assert_eq!(back.matrix(), p.matrix());
            assert_eq!(back.kind(), p.kind());
            assert_eq!(back.theta(), p.theta());
            assert_eq!(back.label(), p.label());
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_precoder("".as_bytes()).is_err());
        assert!(read_precoder("kind=type2\n1 0\n0 1\n".as_bytes()).is_err());
        assert!(read_precoder("# kind=type2 theta=none label=x\n1 0\n".as_bytes()).is_err());
        assert!(read_precoder("# kind=type2 theta=none label=x\n1 1\n0 1\n".as_bytes()).is_err());
    }
}
