//! Plain-text file formats used by the CLI.
//!
//! - Matrix: first line `rows cols`, then `rows` lines of `cols` characters
//!   from {0,1}.
//! - CSS state (`css-state v1`): header, a size line `n=.. nz=.. nx=..`,
//!   an `Sz:` block of n rows, an `Sx:` block of n rows, and an optional
//!   `b=<bits>` line (phases default to zero).
//! - Mixture (`mixture v1`): header, `n=..`, then one `<bits> <probability>`
//!   entry per line; omitted entries are zero.
//!
//! Parsers report the offending line number in every error.

use crate::gf2::{BitMatrix, BitVector};
use crate::stabilizer::CssState;
use crate::yieldlp::{bits_of_index, index_of_bits, DiagonalMixture};
use std::fmt;

#[derive(Debug)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, message: message.into() })
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { iter: text.lines().enumerate(), current: 0 }
    }

    /// Next line, trimmed of trailing whitespace; 1-based number tracked.
    fn next(&mut self) -> Option<&'a str> {
        let (i, line) = self.iter.next()?;
        self.current = i + 1;
        Some(line.trim_end())
    }

    fn expect(&mut self, what: &str) -> Result<&'a str, FormatError> {
        match self.next() {
            Some(line) => Ok(line),
            None => err(self.current + 1, format!("unexpected end of file, expected {what}")),
        }
    }
}

fn parse_bit_row(line: &str, cols: usize, lineno: usize) -> Result<BitVector, FormatError> {
    if line.len() != cols {
        return err(lineno, format!("expected {cols} bits, got {}", line.len()));
    }
    let mut v = BitVector::zeros(cols);
    for (i, ch) in line.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => v.set(i, true),
            other => return err(lineno, format!("invalid character '{other}' in bit row")),
        }
    }
    Ok(v)
}

fn parse_count(token: &str, lineno: usize, what: &str) -> Result<usize, FormatError> {
    token
        .parse::<usize>()
        .map_err(|_| FormatError { line: lineno, message: format!("invalid {what}: '{token}'") })
}

fn parse_key_value(token: &str, key: &str, lineno: usize) -> Result<usize, FormatError> {
    match token.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
        Some(value) => parse_count(value, lineno, key),
        None => err(lineno, format!("expected {key}=<count>, got '{token}'")),
    }
}

/// `rows cols` header followed by bit rows.
pub fn parse_matrix(text: &str) -> Result<BitMatrix, FormatError> {
    let mut lines = Lines::new(text);
    let header = lines.expect("matrix header 'rows cols'")?;
    let mut parts = header.split_whitespace();
    let rows = parse_count(parts.next().unwrap_or(""), lines.current, "row count")?;
    let cols = parse_count(parts.next().unwrap_or(""), lines.current, "column count")?;
    if parts.next().is_some() {
        return err(lines.current, "matrix header has trailing tokens");
    }
    let mut m = BitMatrix::zeros(rows, cols);
    for r in 0..rows {
        let line = lines.expect("a matrix row")?;
        let row = parse_bit_row(line, cols, lines.current)?;
        m.set_row(r, &row);
    }
    Ok(m)
}

pub fn write_matrix(m: &BitMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        out.push_str(&m.row(r).to_string());
        out.push('\n');
    }
    out
}

fn parse_matrix_block(
    lines: &mut Lines<'_>,
    rows: usize,
    cols: usize,
) -> Result<BitMatrix, FormatError> {
    let mut m = BitMatrix::zeros(rows, cols);
    for r in 0..rows {
        let line = lines.expect("a matrix row")?;
        let row = parse_bit_row(line, cols, lines.current)?;
        m.set_row(r, &row);
    }
    Ok(m)
}

pub fn parse_css_state(text: &str) -> Result<CssState, FormatError> {
    let mut lines = Lines::new(text);
    let header = lines.expect("'css-state v1' header")?;
    if header != "css-state v1" {
        return err(lines.current, format!("expected 'css-state v1', got '{header}'"));
    }
    let sizes = lines.expect("size line 'n=.. nz=.. nx=..'")?;
    let mut parts = sizes.split_whitespace();
    let n = parse_key_value(parts.next().unwrap_or(""), "n", lines.current)?;
    let nz = parse_key_value(parts.next().unwrap_or(""), "nz", lines.current)?;
    let nx = parse_key_value(parts.next().unwrap_or(""), "nx", lines.current)?;
    if nz + nx != n {
        return err(lines.current, format!("nz + nx = {} but n = {n}", nz + nx));
    }
    let tag = lines.expect("'Sz:' block")?;
    if tag != "Sz:" {
        return err(lines.current, format!("expected 'Sz:', got '{tag}'"));
    }
    let sz = parse_matrix_block(&mut lines, n, nz)?;
    let tag = lines.expect("'Sx:' block")?;
    if tag != "Sx:" {
        return err(lines.current, format!("expected 'Sx:', got '{tag}'"));
    }
    let sx = parse_matrix_block(&mut lines, n, nx)?;
    let mut b = BitVector::zeros(n);
    if let Some(line) = lines.next() {
        if !line.is_empty() {
            let Some(bits) = line.strip_prefix("b=") else {
                return err(lines.current, format!("expected 'b=<bits>', got '{line}'"));
            };
            b = parse_bit_row(bits, n, lines.current)?;
        }
    }
    let state_line = lines.current;
    CssState::new(sz, sx, b)
        .map_err(|e| FormatError { line: state_line, message: e.to_string() })
}

pub fn write_css_state(css: &CssState) -> String {
    let mut out = String::from("css-state v1\n");
    out.push_str(&format!("n={} nz={} nx={}\n", css.n(), css.nz(), css.nx()));
    out.push_str("Sz:\n");
    for r in 0..css.n() {
        out.push_str(&css.sz().row(r).to_string());
        out.push('\n');
    }
    out.push_str("Sx:\n");
    for r in 0..css.n() {
        out.push_str(&css.sx().row(r).to_string());
        out.push('\n');
    }
    if !css.b().is_zero() {
        out.push_str(&format!("b={}\n", css.b()));
    }
    out
}

pub fn parse_mixture(text: &str) -> Result<DiagonalMixture, FormatError> {
    let mut lines = Lines::new(text);
    let header = lines.expect("'mixture v1' header")?;
    if header != "mixture v1" {
        return err(lines.current, format!("expected 'mixture v1', got '{header}'"));
    }
    let size = lines.expect("size line 'n=..'")?;
    let n = parse_key_value(size.trim(), "n", lines.current)?;
    if n > crate::yieldlp::MIXTURE_LIMIT {
        return err(lines.current, format!("n = {n} exceeds the mixture guard"));
    }
    let mut p = vec![0.0f64; 1 << n];
    let mut seen = vec![false; 1 << n];
    while let Some(line) = lines.next() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let bits_tok = parts.next().unwrap_or("");
        let bits = parse_bit_row(bits_tok, n, lines.current)?;
        let prob_tok = match parts.next() {
            Some(t) => t,
            None => return err(lines.current, "missing probability"),
        };
        let prob: f64 = match prob_tok.parse() {
            Ok(x) => x,
            Err(_) => return err(lines.current, format!("invalid probability '{prob_tok}'")),
        };
        if parts.next().is_some() {
            return err(lines.current, "trailing tokens after probability");
        }
        let idx = index_of_bits(&bits);
        if seen[idx] {
            return err(lines.current, format!("duplicate entry for {bits}"));
        }
        seen[idx] = true;
        p[idx] = prob;
    }
    let last = lines.current;
    DiagonalMixture::new(n, p).map_err(|e| FormatError { line: last, message: e.to_string() })
}

pub fn write_mixture(mix: &DiagonalMixture) -> String {
    let mut out = String::from("mixture v1\n");
    out.push_str(&format!("n={}\n", mix.n()));
    for (idx, &p) in mix.probs().iter().enumerate() {
        if p > 0.0 {
            out.push_str(&format!("{} {:.17}\n", bits_of_index(mix.n(), idx), p));
        }
    }
    out
}
