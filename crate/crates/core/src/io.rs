//! Time-series CSV ingestion and deterministic number formatting.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

/// Six significant digits, shortest representation, no negative zero.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x.is_infinite() {
            if x > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            }
        } else {
            "0".into()
        };
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

#[derive(serde::Deserialize)]
struct StepValue {
    step: usize,
    value: f64,
}

/// Reads a `step,value` series. Steps must be `0..n` in order.
pub fn read_series<R: Read>(r: R, path: &Path) -> Result<Vec<f64>, IoError> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if headers.iter().collect::<Vec<_>>() != ["step", "value"] {
        return Err(IoError::Format {
            path: path.to_path_buf(),
            msg: "expected header `step,value`".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize::<StepValue>() {
        let rec = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if rec.step != out.len() {
            return Err(IoError::Format {
                path: path.to_path_buf(),
                msg: format!("step {} out of order (expected {})", rec.step, out.len()),
            });
        }
        out.push(rec.value);
    }
    Ok(out)
}

pub fn read_series_file(path: &Path) -> Result<Vec<f64>, IoError> {
    let f = File::open(path).map_err(|source| IoError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    read_series(f, path)
}

/// Reads a `step,<name>,<name>...` table into named columns.
pub fn read_table<R: Read>(r: R, path: &Path) -> Result<Vec<(String, Vec<f64>)>, IoError> {
    let fmt = |msg: String| IoError::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    if headers.get(0) != Some("step") || headers.len() < 2 {
        return Err(fmt("expected header `step,<column>...`".into()));
    }
    let mut cols: Vec<(String, Vec<f64>)> = headers
        .iter()
        .skip(1)
        .map(|h| (h.to_string(), Vec::new()))
        .collect();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let step: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| fmt(format!("row {}: bad step `{}`", row + 1, &rec[0])))?;
        if step != row {
            return Err(fmt(format!("step {step} out of order (expected {row})")));
        }
        for (k, (name, col)) in cols.iter_mut().enumerate() {
            let v: f64 = rec[k + 1]
                .trim()
                .parse()
                .map_err(|_| fmt(format!("step {step}, {name}: bad number `{}`", &rec[k + 1])))?;
            col.push(v);
        }
    }
    Ok(cols)
}

pub fn write_series<W: Write>(values: &[f64], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "value"])?;
    for (t, v) in values.iter().enumerate() {
        out.write_record([t.to_string(), fmt_num(*v)])?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(140.0), "140");
        assert_eq!(fmt_num(24.2), "24.2");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_num(2_512_345.6), "2512350");
        assert_eq!(fmt_num(-17.123456789), "-17.1235");
        assert_eq!(fmt_num(1e-20), "0.00000000000000000001");
    }

    #[test]
    fn series_round_trip() {
        let mut buf = Vec::new();
        write_series(&[1.5, 0.0, 3.25], &mut buf).unwrap();
        let back = read_series(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, vec![1.5, 0.0, 3.25]);
    }

    #[test]
    fn table_columns() {
        let t = read_table("step,a,b\n0,1,2\n1,3,4.5\n".as_bytes(), Path::new("x")).unwrap();
        assert_eq!(t[0], ("a".to_string(), vec![1.0, 3.0]));
        assert_eq!(t[1], ("b".to_string(), vec![2.0, 4.5]));
        assert!(read_table("step,a\n0,x\n".as_bytes(), Path::new("x")).is_err());
    }

    #[test]
    fn rejects_bad_header_and_order() {
        let bad = "t,v\n0,1\n";
        assert!(read_series(bad.as_bytes(), Path::new("x")).is_err());
        let gap = "step,value\n0,1\n2,1\n";
        assert!(read_series(gap.as_bytes(), Path::new("x")).is_err());
    }
}
