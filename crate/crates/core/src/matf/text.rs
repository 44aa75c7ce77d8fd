//! Plain-text matrix files.
//!
//! ```text
//! field: p=3 m=1
//! n: 3
//! rows:
//! 0 0 2
//! 1 0 0
//! 0 1 1
//! ```
//!
//! Extension-field entries are written `[a0,a1,...]`; blank lines and lines
//! starting with `#` are ignored.

use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldSpec};

use super::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

pub fn render(m: &Matrix) -> String {
    let f = m.field();
    let mut out = format!("{}\n", f.header());
    if m.is_square() {
        out.push_str(&format!("n: {}\n", m.rows()));
    } else {
        out.push_str(&format!("shape: {} {}\n", m.rows(), m.cols()));
    }
    out.push_str("rows:\n");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| f.format_element(x)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Splits a row into `(column, token)` pairs; brackets group their contents.
fn tokens(line: &str) -> Result<Vec<(usize, String)>, (usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut depth = 0i32;
    for (i, ch) in line.char_indices() {
        match ch {
            '[' => {
                if cur.is_empty() {
                    start = i;
                }
                depth += 1;
                cur.push(ch);
            }
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err((i + 1, "unbalanced ']'".into()));
                }
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push((start + 1, std::mem::take(&mut cur)));
                }
            }
            c if c.is_whitespace() => {}
            c => {
                if cur.is_empty() {
                    start = i;
                }
                cur.push(c);
            }
        }
    }
    if depth != 0 {
        return Err((line.len(), "unclosed '['".into()));
    }
    if !cur.is_empty() {
        out.push((start + 1, cur));
    }
    Ok(out)
}

fn parse_field(line: usize, rest: &str) -> Result<Field, ParseError> {
    let mut p = None;
    let mut m = None;
    let mut modulus = None;
    for part in rest.split_whitespace() {
        let col = rest.find(part).unwrap_or(0) + "field:".len() + 2;
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| perr(line, col, format!("expected key=value, got `{part}`")))?;
        let bad = |what: &str| perr(line, col, format!("bad {what} `{val}`"));
        match key {
            "p" => p = Some(val.parse::<u32>().map_err(|_| bad("p"))?),
            "m" => m = Some(val.parse::<usize>().map_err(|_| bad("m"))?),
            "modulus" => {
                let inner = val
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| bad("modulus"))?;
                let coeffs: Result<Vec<u32>, _> = inner.split(',').map(|c| c.trim().parse::<u32>()).collect();
                modulus = Some(coeffs.map_err(|_| bad("modulus"))?);
            }
            other => return Err(perr(line, col, format!("unknown field key `{other}`"))),
        }
    }
    let p = p.ok_or_else(|| perr(line, 1, "field header lacks p"))?;
    let m = m.unwrap_or(1);
    if m > 1 && modulus.is_none() {
        return FieldSpec::default_extension(p, m)
            .ok_or_else(|| perr(line, 1, format!("no default modulus for p={p} m={m}; give modulus=[...]")));
    }
    FieldSpec::new(p, m, modulus).map_err(|e| perr(line, 1, e.to_string()))
}

/// Parses the text format; every error carries a 1-based line and column.
pub fn parse(text: &str) -> Result<Matrix, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });

    let (ln, first) = lines.next().ok_or_else(|| perr(1, 1, "empty input; expected `field:` header"))?;
    let rest = first
        .trim()
        .strip_prefix("field:")
        .ok_or_else(|| perr(ln, 1, "missing `field:` header"))?;
    let field = parse_field(ln, rest)?;

    let (ln, dims) = lines.next().ok_or_else(|| perr(ln + 1, 1, "missing `n:` line"))?;
    let dims = dims.trim();
    let (rows, cols) = if let Some(n) = dims.strip_prefix("n:") {
        let n: usize = n.trim().parse().map_err(|_| perr(ln, 3, format!("bad size `{}`", n.trim())))?;
        (n, n)
    } else if let Some(s) = dims.strip_prefix("shape:") {
        let v: Vec<usize> = s.split_whitespace().filter_map(|x| x.parse().ok()).collect();
        if v.len() != 2 {
            return Err(perr(ln, 7, format!("bad shape `{}`", s.trim())));
        }
        (v[0], v[1])
    } else {
        return Err(perr(ln, 1, "expected `n:` line"));
    };
    if rows == 0 || cols == 0 {
        return Err(perr(ln, 1, "matrix dimensions must be positive"));
    }

    let (ln, marker) = lines.next().ok_or_else(|| perr(ln + 1, 1, "missing `rows:` line"))?;
    if marker.trim() != "rows:" {
        return Err(perr(ln, 1, "expected `rows:`"));
    }

    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    let mut last_line = ln;
    for (ln, line) in lines {
        last_line = ln;
        if seen == rows {
            return Err(perr(ln, 1, format!("extra row; expected {rows}")));
        }
        let toks = tokens(line).map_err(|(c, m)| perr(ln, c, m))?;
        if toks.len() != cols {
            return Err(perr(ln, 1, format!("expected {cols} entries, found {}", toks.len())));
        }
        for (col, tok) in toks {
            let x = field.parse_element(&tok).map_err(|e| perr(ln, col, e.to_string()))?;
            entries.push(x);
        }
        seen += 1;
    }
    if seen != rows {
        return Err(perr(last_line + 1, 1, format!("expected {rows} rows, found {seen}")));
    }
    Matrix::from_entries(field, rows, cols, entries).map_err(|e| perr(last_line, 1, e.to_string()))
}

/// Wrapper whose `Display` is the text format.
pub struct Text<'a>(pub &'a Matrix);

impl fmt::Display for Text<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "field: p=3 m=1\nn: 3\nrows:\n0 0 2\n1 0 0\n0 1 1\n";

    #[test]
    fn sample_round_trip() {
        let m = parse(SAMPLE).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(render(&m), SAMPLE);
    }

    #[test]
    fn extension_entries() {
        let text = "field: p=3 m=2 modulus=[1,0,1]\nn: 2\nrows:\n[0,1] [1, 2]\n[0,0] [2,2]\n";
        let m = parse(text).unwrap();
        assert_eq!(m.field().format_element(m.get(0, 1)), "[1,2]");
        assert_eq!(parse(&render(&m)).unwrap(), m);
    }

    #[test]
    fn unreduced_entry_points_at_column() {
        let err = parse("field: p=3 m=1\nn: 2\nrows:\n0 1\n1 3\n").unwrap_err();
        assert_eq!((err.line, err.column), (5, 3));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse("n: 2\nrows:\n0 0\n0 0\n").unwrap_err().line, 1);
        assert_eq!(parse("field: p=3 m=1\nn: 2\nrows:\n0 0\n").unwrap_err().line, 5);
        assert!(parse("field: p=3 m=1\nn: 2\nrows:\n0 0\n0 0\n0 0\n").is_err());
        assert!(parse("field: p=3 m=1\nn: 2\nrows:\n0 0 0\n0 0\n").is_err());
        assert!(parse("field: p=4 m=1\nn: 1\nrows:\n0\n").is_err());
    }
}
