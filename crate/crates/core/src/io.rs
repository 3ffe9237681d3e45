//! CSV helpers shared by the modules and the CLI.
//!
//! Dialect: comma separator, `.` decimal point, mandatory header row.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Reads a one-column signal file with header `u`.
pub fn read_signal<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut rows = rdr.records();
    match rows.next() {
        None => return Ok(Vec::new()),
        Some(header) => {
            let header = header?;
            if header.len() != 1 || header.get(0).map(str::trim) != Some("u") {
                return Err(Error::Parse {
                    row: 1,
                    message: format!(
                        "expected header `u`, got {:?}",
                        header.iter().collect::<Vec<_>>()
                    ),
                });
            }
        }
    }
    let mut out = Vec::new();
    for (k, rec) in rows.enumerate() {
        let rec = rec?;
        let row = k + 2;
        let field = rec.get(0).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            row,
            message: format!("not a number: {field:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row,
                message: "non-finite sample".into(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_signal<W: Write>(writer: W, u: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u"])?;
    for v in u {
        w.write_record([format_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip representation.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes `step,corners` rows, corners joined by `;` and wrapped in brackets.
pub fn write_corner_trace<W: Write>(writer: W, snapshots: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "corners"])?;
    for (step, corners) in snapshots.iter().enumerate() {
        w.write_record([step.to_string(), join_corners(corners)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn join_corners(corners: &[f64]) -> String {
    let parts: Vec<String> = corners.iter().map(|c| format_f64(*c)).collect();
    format!("[{}]", parts.join(";"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_signal() {
        let u = read_signal("u\n0\n3\n1.5\n".as_bytes()).unwrap();
        assert_eq!(u, vec![0.0, 3.0, 1.5]);
    }

    #[test]
    fn empty_file_is_empty_signal() {
        assert!(read_signal("".as_bytes()).unwrap().is_empty());
        assert!(read_signal("u\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn rejects_non_numeric_row() {
        let err = read_signal("u\n1\nabc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
        assert!(err.is_io());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_signal("x\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn corner_trace_format() {
        let mut buf = Vec::new();
        write_corner_trace(&mut buf, &[vec![0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,corners\n0,[0]\n1,[0;4]\n"
        );
    }
}
