//! Plain-text coefficient tables.
//!
//! ```text
//! # stratsim coefficient table
//! format_version = 1
//! k = 3
//! weights = 0 0 0
//! q = 6
//! entries = 343
//! 0 0 0 4/3
//! 1 0 0 -2/3
//! ...
//! ```
//!
//! Entry lines hold `j_1 … j_k` followed by the exact `C̄` as
//! `numerator/denominator`, in flat order (`j_1` fastest). Only `C̄` is stored,
//! so a table serves every step size; scaling happens in [`import_table`].

use std::io::{BufRead, Write};
use std::str::FromStr;

use num_rational::BigRational;

use super::{CoefficientTensor, Weights};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub fn export_table<W: Write>(tensor: &CoefficientTensor, mut out: W) -> Result<()> {
    let weights = tensor.weights();
    writeln!(out, "# stratsim coefficient table")?;
    writeln!(out, "format_version = {FORMAT_VERSION}")?;
    writeln!(out, "k = {}", weights.multiplicity())?;
    let w: Vec<String> = weights.as_slice().iter().map(u8::to_string).collect();
    writeln!(out, "weights = {}", w.join(" "))?;
    writeln!(out, "q = {}", tensor.q())?;
    writeln!(out, "entries = {}", tensor.len())?;
    for (flat, c) in tensor.exact_values().iter().enumerate() {
        for j in tensor.index_tuple(flat) {
            write!(out, "{j} ")?;
        }
        // BigRational's Display drops "/1" for integers; keep the form uniform.
        writeln!(out, "{}/{}", c.numer(), c.denom())?;
    }
    out.flush()?;
    Ok(())
}

struct Header {
    k: Option<usize>,
    weights: Option<Weights>,
    q: Option<usize>,
    entries: Option<usize>,
    version: Option<u32>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::TableParse {
        line,
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("bad value for {key}: {value:?}")))
}

/// Reads a table and scales it for step size `delta`.
pub fn import_table<R: BufRead>(source: R, delta: f64) -> Result<CoefficientTensor> {
    let mut header = Header {
        k: None,
        weights: None,
        q: None,
        entries: None,
        version: None,
    };
    let mut values: Vec<Option<BigRational>> = Vec::new();
    let mut extent = 0usize;

    for (n, line) in source.lines().enumerate() {
        let lineno = n + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = text.split_once('=') {
            if !values.is_empty() {
                return Err(parse_err(lineno, "header field after entries"));
            }
            match key.trim() {
                "format_version" => {
                    let v: u32 = parse_value(lineno, "format_version", value)?;
                    if v != FORMAT_VERSION {
                        return Err(parse_err(lineno, format!("unsupported format version {v}")));
                    }
                    header.version = Some(v);
                }
                "k" => header.k = Some(parse_value(lineno, "k", value)?),
                "weights" => {
                    header.weights = Some(
                        value
                            .parse()
                            .map_err(|e: Error| parse_err(lineno, e.to_string()))?,
                    )
                }
                "q" => header.q = Some(parse_value(lineno, "q", value)?),
                "entries" => header.entries = Some(parse_value(lineno, "entries", value)?),
                other => return Err(parse_err(lineno, format!("unknown header field {other:?}"))),
            }
            continue;
        }

        if values.is_empty() {
            let (k, weights, q) = match (&header.version, header.k, &header.weights, header.q) {
                (Some(_), Some(k), Some(w), Some(q)) => (k, w, q),
                _ => return Err(parse_err(lineno, "entry before complete header")),
            };
            if weights.multiplicity() != k {
                return Err(parse_err(lineno, "k does not match the weights"));
            }
            extent = q + 1;
            let len = extent
                .checked_pow(k as u32)
                .ok_or_else(|| parse_err(lineno, "table too large"))?;
            if header.entries.is_some_and(|e| e != len) {
                return Err(parse_err(lineno, format!("entries should be {len}")));
            }
            values = vec![None; len];
        }

        let k = header.k.unwrap_or_default();
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != k + 1 {
            return Err(parse_err(
                lineno,
                format!("expected {} fields, found {}", k + 1, fields.len()),
            ));
        }
        let mut flat = 0usize;
        for field in fields[..k].iter().rev() {
            let j: usize = parse_value(lineno, "index", field)?;
            if j >= extent {
                return Err(parse_err(lineno, format!("index {j} exceeds q")));
            }
            flat = flat * extent + j;
        }
        let value: BigRational = fields[k]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad rational {:?}", fields[k])))?;
        if values[flat].replace(value).is_some() {
            return Err(parse_err(lineno, "duplicate entry"));
        }
    }

    let (Some(k), Some(weights), Some(q)) = (header.k, header.weights, header.q) else {
        return Err(parse_err(0, "incomplete header"));
    };
    if values.is_empty() {
        values = vec![None; (q + 1).pow(k as u32)];
    }
    let exact = values
        .into_iter()
        .enumerate()
        .map(|(flat, v)| {
            v.ok_or_else(|| Error::MissingEntry {
                index: super::unflatten(flat, q + 1, k)
                    .into_iter()
                    .map(usize::from)
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientTensor::from_exact(weights, q, exact, delta)
}
