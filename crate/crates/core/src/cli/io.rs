//! Design/response CSV and Gram JSON files.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dictionaries::{DesignSample, GramMatrix};
use crate::error::{Error, Result};

/// Reads a numeric CSV with a header row. Every row must have as many
/// fields as the header.
fn read_numeric_csv<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Csv {
                    line,
                    message: format!("column {}: `{field}` is not a finite number", col + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Design matrix `H` (rows = observations, columns = dictionary functions)
/// from a CSV with a header row.
pub fn read_design_csv<R: Read>(input: R) -> Result<DesignSample> {
    let (header, rows) = read_numeric_csv(input)?;
    if header.is_empty() || rows.is_empty() {
        return Err(Error::Csv {
            line: 1,
            message: "design needs a header and at least one row".into(),
        });
    }
    let h = DMatrix::from_fn(rows.len(), header.len(), |i, k| rows[i][k]);
    Ok(DesignSample::from_matrix(h, 0))
}

/// Single-column response CSV with a header row.
pub fn read_response_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let (header, rows) = read_numeric_csv(input)?;
    if header.len() != 1 {
        return Err(Error::Csv {
            line: 1,
            message: format!("response must have exactly one column, found {}", header.len()),
        });
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

pub fn write_design_csv<W: Write>(out: W, design: &DesignSample) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=design.n_funcs()).map(|k| format!("h{k}")))?;
    for row in design.h.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_response_csv<W: Write>(out: W, y: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y"])?;
    for v in y {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GramFile {
    Rows(Vec<Vec<f64>>),
    Wrapped { gram: Vec<Vec<f64>> },
}

/// Gram matrix from JSON: either an array of rows or `{"gram": [[...]]}`.
pub fn read_gram_json(text: &str) -> Result<GramMatrix> {
    let rows = match serde_json::from_str::<GramFile>(text)? {
        GramFile::Rows(r) | GramFile::Wrapped { gram: r } => r,
    };
    GramMatrix::from_rows(&rows)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_round_trip() {
        let h = DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 0.1, 2.0, 1e-17, 3.0]);
        let d = DesignSample::from_matrix(h.clone(), 0);
        let mut buf = Vec::new();
        write_design_csv(&mut buf, &d).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("h1,h2,h3\n"));
        assert_eq!(read_design_csv(buf.as_slice()).unwrap().h, h);
    }

    #[test]
    fn bad_cells_report_line() {
        let text = "h1,h2\n1,2\n3,x\n";
        match read_design_csv(text.as_bytes()) {
            Err(Error::Csv { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("column 2"));
            }
            other => panic!("{other:?}"),
        }
        match read_design_csv("h1,h2\n1,2\n3\n".as_bytes()) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_response_csv("a,b\n1,2\n".as_bytes()), Err(Error::Csv { line: 1, .. })));
    }

    #[test]
    fn gram_formats() {
        let a = read_gram_json("[[1,0],[0,1]]").unwrap();
        let b = read_gram_json(r#"{"gram": [[1,0],[0,1]]}"#).unwrap();
        assert_eq!(a, b);
        assert!(read_gram_json("[[1,2],[3]]").is_err());
    }
}
