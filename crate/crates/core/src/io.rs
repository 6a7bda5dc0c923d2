//! Text formats: node-indexed vector CSV, coordinate matrix text and
//! index-set JSON. Every parser reports the offending line.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::banded::SymTridiagonal;
use crate::indicial::{IndexEntry, IndexSet};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{0}")]
    Shape(String),
}

fn at(line: u64, message: impl Into<String>) -> ParseError {
    ParseError::Line {
        line,
        message: message.into(),
    }
}

fn finite(v: f64, line: u64, what: &str) -> Result<f64, ParseError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(at(line, format!("{what} is not finite")))
    }
}

/// Reads a vector written as CSV with a header naming the columns. `re` is
/// required; `im` defaults to 0; `node`, when present, must count 0, 1, ….
/// Other columns (e.g. `x`) are ignored.
pub fn parse_vector_csv(text: &str) -> Result<Vec<Complex64>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| at(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let re = col("re").ok_or_else(|| at(1, "header must contain a `re` column"))?;
    let im = col("im");
    let node = col("node");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| at(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize, what: &str| -> Result<f64, ParseError> {
            let s = rec.get(i).ok_or_else(|| at(line, format!("missing {what}")))?;
            let v: f64 = s.parse().map_err(|_| at(line, format!("{what} `{s}` is not a number")))?;
            finite(v, line, what)
        };
        if let Some(i) = node {
            let s = rec.get(i).unwrap_or("");
            match s.parse::<usize>() {
                Ok(k) if k == out.len() => {}
                _ => return Err(at(line, format!("node `{s}` out of sequence, expected {}", out.len()))),
            }
        }
        let r = num(re, "re")?;
        let m = match im {
            Some(i) => num(i, "im")?,
            None => 0.0,
        };
        out.push(Complex64::new(r, m));
    }
    if out.is_empty() {
        return Err(ParseError::Shape("vector has no rows".into()));
    }
    Ok(out)
}

/// `node,x,re,im` rows. Floats use the shortest round-trip form, so equal
/// inputs give byte-equal files.
pub fn write_vector_csv(positions: &[f64], values: &[Complex64]) -> String {
    assert_eq!(positions.len(), values.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "x", "re", "im"]).unwrap();
    for (i, (x, v)) in positions.iter().zip(values).enumerate() {
        w.write_record([i.to_string(), x.to_string(), v.re.to_string(), v.im.to_string()])
            .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// A sparse matrix in coordinate form.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn from_tridiagonal(a: &SymTridiagonal) -> Self {
        let n = a.dim();
        let mut entries = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                entries.push((i, i - 1, a.off[i - 1]));
            }
            entries.push((i, i, a.diag[i]));
            if i + 1 < n {
                entries.push((i, i + 1, a.off[i]));
            }
        }
        Self { rows: n, cols: n, entries }
    }

    /// Back to a symmetric tridiagonal matrix; fails on entries outside the
    /// band or on asymmetric off-diagonals.
    pub fn to_tridiagonal(&self) -> Result<SymTridiagonal, ParseError> {
        if self.rows != self.cols {
            return Err(ParseError::Shape(format!("matrix is {}x{}, not square", self.rows, self.cols)));
        }
        let mut a = SymTridiagonal::zeros(self.rows);
        let mut lower = vec![0.0; self.rows.saturating_sub(1)];
        for &(i, j, v) in &self.entries {
            match i as i64 - j as i64 {
                0 => a.diag[i] = v,
                -1 => a.off[i] = v,
                1 => lower[j] = v,
                _ => return Err(ParseError::Shape(format!("entry ({i}, {j}) outside the tridiagonal band"))),
            }
        }
        if let Some(k) = (0..lower.len()).find(|&k| lower[k] != a.off[k]) {
            return Err(ParseError::Shape(format!("entries ({}, {k}) and ({k}, {}) differ", k + 1, k + 1)));
        }
        Ok(a)
    }
}

/// Header line `rows cols nnz`, then `nnz` lines `row col value` with
/// zero-based indices. `#` starts a comment.
pub fn parse_coo(text: &str) -> Result<CooMatrix, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k as u64 + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(at(line, format!("expected 3 fields, found {}", fields.len())));
        }
        let int = |s: &str, what: &str| -> Result<usize, ParseError> {
            s.parse().map_err(|_| at(line, format!("{what} `{s}` is not a nonnegative integer")))
        };
        match header {
            None => {
                let h = (int(fields[0], "rows")?, int(fields[1], "cols")?, int(fields[2], "nnz")?);
                if h.2 > h.0.saturating_mul(h.1) {
                    return Err(at(line, format!("{} entries cannot fit a {}x{} matrix", h.2, h.0, h.1)));
                }
                header = Some(h);
            }
            Some((rows, cols, nnz)) => {
                let (i, j) = (int(fields[0], "row")?, int(fields[1], "col")?);
                if i >= rows || j >= cols {
                    return Err(at(line, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| at(line, format!("value `{}` is not a number", fields[2])))?;
                finite(v, line, "value")?;
                if !seen.insert((i, j)) {
                    return Err(at(line, format!("duplicate entry ({i}, {j})")));
                }
                if entries.len() == nnz {
                    return Err(at(line, format!("more than the declared {nnz} entries")));
                }
                entries.push((i, j, v));
            }
        }
    }
    let (rows, cols, nnz) = header.ok_or_else(|| ParseError::Shape("missing `rows cols nnz` header".into()))?;
    if entries.len() != nnz {
        return Err(ParseError::Shape(format!("declared {nnz} entries, found {}", entries.len())));
    }
    Ok(CooMatrix { rows, cols, entries })
}

pub fn write_coo(m: &CooMatrix) -> String {
    let mut s = String::new();
    writeln!(s, "{} {} {}", m.rows, m.cols, m.entries.len()).unwrap();
    for &(i, j, v) in &m.entries {
        writeln!(s, "{i} {j} {v}").unwrap();
    }
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexSetDoc {
    cutoff: f64,
    entries: Vec<EntryDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    re: f64,
    #[serde(default)]
    im: f64,
    k: u32,
}

fn json_error(e: serde_json::Error) -> ParseError {
    ParseError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Either a bare array of `{re, im, k}` (taken complete up to its largest
/// real part) or `{"cutoff": c, "entries": [...]}`.
pub fn parse_index_set(text: &str) -> Result<IndexSet, ParseError> {
    // dispatch on the opening bracket so serde errors keep their position
    let (cutoff, entries) = if text.trim_start().starts_with('[') {
        let e: Vec<EntryDoc> = serde_json::from_str(text).map_err(json_error)?;
        (e.iter().map(|x| x.re).fold(0.0, f64::max), e)
    } else {
        let d: IndexSetDoc = serde_json::from_str(text).map_err(json_error)?;
        (d.cutoff, d.entries)
    };
    if !cutoff.is_finite() {
        return Err(ParseError::Shape("cutoff is not finite".into()));
    }
    let mut out = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        if !(e.re.is_finite() && e.im.is_finite()) {
            return Err(ParseError::Shape(format!("entry {i} is not finite")));
        }
        out.push(IndexEntry { re: e.re, im: e.im, k: e.k });
    }
    Ok(IndexSet::from_entries(&out, cutoff))
}

pub fn index_set_json(set: &IndexSet) -> String {
    let v = serde_json::json!({ "cutoff": set.cutoff(), "entries": set.to_entries() });
    serde_json::to_string_pretty(&v).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_roundtrip() {
        let x = [0.0, 0.25, 0.5];
        let v = [Complex64::new(1.0, -2.0), Complex64::new(0.1, 0.0), Complex64::new(-3e-300, 7.5)];
        let text = write_vector_csv(&x, &v);
        assert_eq!(parse_vector_csv(&text).unwrap(), v);
    }

    #[test]
    fn vector_minimal_and_errors() {
        let v = parse_vector_csv("re\n1\n2.5\n").unwrap();
        assert_eq!(v, vec![Complex64::new(1.0, 0.0), Complex64::new(2.5, 0.0)]);
        assert!(matches!(parse_vector_csv("x,im\n1,2\n"), Err(ParseError::Line { line: 1, .. })));
        match parse_vector_csv("re,im\n1,2\n3,oops\n") {
            Err(ParseError::Line { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_vector_csv("node,re\n0,1\n2,1\n").is_err());
        assert!(parse_vector_csv("re\nNaN\n").is_err());
        assert!(parse_vector_csv("re\n").is_err());
    }

    #[test]
    fn coo_roundtrip() {
        let a = SymTridiagonal {
            diag: vec![2.0, 3.0, 4.0],
            off: vec![-1.0, 0.5],
        };
        let m = CooMatrix::from_tridiagonal(&a);
        let text = write_coo(&m);
        let back = parse_coo(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_tridiagonal().unwrap(), a);
    }

    #[test]
    fn coo_errors_carry_lines() {
        let cases = [
            ("2 2 1\n0 0 1\n1 1 1\n", Some(3)),
            ("2 2 2\n0 0 1\n", None),
            ("2 2 2\n# c\n0 5 1\n", Some(3)),
            ("2 2 2\n0 0 1\n0 0 2\n", Some(3)),
            ("2 2 1\n0 0 x\n", Some(2)),
            ("2 2\n", Some(1)),
        ];
        for (text, line) in cases {
            match (parse_coo(text), line) {
                (Err(ParseError::Line { line: l, .. }), Some(e)) => assert_eq!(l, e, "{text}"),
                (Err(ParseError::Shape(_)), None) => {}
                (r, _) => panic!("{text}: {r:?}"),
            }
        }
        let asym = parse_coo("2 2 2\n0 1 1\n1 0 2\n").unwrap();
        assert!(asym.to_tridiagonal().is_err());
    }

    #[test]
    fn index_set_forms() {
        let a = parse_index_set(r#"[{"re": 0, "im": 0, "k": 0}, {"re": 1, "im": 0, "k": 1}]"#).unwrap();
        assert_eq!(a.cutoff(), 1.0);
        assert!(a.contains(Complex64::new(1.0, 0.0), 1));
        let b = parse_index_set(&index_set_json(&a)).unwrap();
        assert_eq!(a, b);
        match parse_index_set("[\n{\"re\": 0, \"k\": -1}]") {
            Err(ParseError::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
