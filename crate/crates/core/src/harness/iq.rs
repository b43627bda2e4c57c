//! Stored observations: one symbol period per line, complex samples written
//! as `re,im` and separated by `;`.

use std::path::Path;

use num_complex::Complex64;

use crate::{Error, Result};

pub fn parse_iq(text: &str) -> Result<Vec<Vec<Complex64>>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let row = body
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|pair| {
                let (re, im) = pair
                    .split_once(',')
                    .ok_or_else(|| Error::Parse { line, msg: format!("expected 're,im', got '{pair}'") })?;
                let num = |s: &str| {
                    s.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number '{s}'") })
                };
                Ok(Complex64::new(num(re)?, num(im)?))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first().map(|r: &Vec<Complex64>| r.len()) {
            if first != row.len() {
                return Err(Error::Parse { line, msg: format!("expected {first} samples, got {}", row.len()) });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_iq(path: impl AsRef<Path>) -> Result<Vec<Vec<Complex64>>> {
    parse_iq(&std::fs::read_to_string(path)?)
}
