//! Plain-text complex matrices: one row per line, whitespace-separated
//! entries written as `re+imi`, `re-imi`, `re` or `imi`. Blank lines and
//! lines starting with `#` are ignored.

use std::fs;
use std::path::Path;

use ness_core::Operator;
use num_complex::Complex64;

pub fn parse_complex(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix('i') else {
        return token.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn parse_matrix(text: &str) -> Result<Vec<Vec<Complex64>>, String> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| parse_complex(tok).ok_or_else(|| format!("line {}: bad entry `{tok}`", n + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(format!("line {}: {} entries, expected {first}", n + 1, row.len()));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no matrix rows".into());
    }
    if rows.len() != rows[0].len() {
        return Err(format!("matrix is {}x{}, expected square", rows.len(), rows[0].len()));
    }
    Ok(rows)
}

pub fn read_operator(path: &Path) -> Result<Operator, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let rows = parse_matrix(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Operator::from_rows(&rows).map_err(|e| format!("{}: {e}", path.display()))
}
