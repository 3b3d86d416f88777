//! Plain-text formats for symbols, corrections, matrices and Jackson
//! parameters.
//!
//! ```text
//! tol 1.0000000000000000e-15
//! neg: a0 a-1 ... a-h
//! pos: a0 a1 ... ak
//! F rows k
//! <rows lines of k values>
//! G cols k
//! <cols lines of k values>
//! ```
//!
//! Values use scientific notation with 17 significant digits; complex values
//! are written `re,im`. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::correction::Correction;
use crate::cqt::CqtMatrix;
use crate::error::{CqtError, Result};
use crate::qbd::JacksonParams;
use crate::scalar::Scalar;
use crate::symbol::LaurentSymbol;

/// Longest accepted coefficient list on one side of a symbol.
pub const MAX_TERMS: usize = 1 << 20;
/// Largest accepted factor height.
pub const MAX_ROWS: usize = 1 << 20;
/// Largest accepted correction rank.
pub const MAX_RANK: usize = 1 << 12;
/// Largest accepted number of entries in one factor.
pub const MAX_ENTRIES: usize = 1 << 24;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            self.last = i + 1;
            if !line.is_empty() && !line.starts_with('#') {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| CqtError::parse(self.last + 1, format!("unexpected end of input, expected {what}")))
    }

    fn finish(mut self) -> Result<()> {
        match self.next() {
            Some((n, _)) => Err(CqtError::parse(n, "trailing content")),
            None => Ok(()),
        }
    }
}

fn values<T: Scalar>(line: usize, s: &str, limit: usize) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for tok in s.split_whitespace() {
        if out.len() == limit {
            return Err(CqtError::parse(line, format!("more than {limit} values")));
        }
        out.push(T::parse_token(tok).ok_or_else(|| CqtError::parse(line, format!("bad value `{tok}`")))?);
    }
    Ok(out)
}

fn labeled<'a>(line: usize, s: &'a str, label: &str) -> Result<&'a str> {
    s.strip_prefix(label)
        .ok_or_else(|| CqtError::parse(line, format!("expected `{label}`")))
}

fn read_symbol<T: Scalar>(lines: &mut Lines) -> Result<LaurentSymbol<T>> {
    let (n1, l1) = lines.expect("`neg:` line")?;
    let neg = values(n1, labeled(n1, l1, "neg:")?, MAX_TERMS)?;
    let (n2, l2) = lines.expect("`pos:` line")?;
    let pos = values(n2, labeled(n2, l2, "pos:")?, MAX_TERMS)?;
    LaurentSymbol::new(neg, pos).map_err(|e| CqtError::parse(n2, e.to_string()))
}

fn read_factor<T: Scalar>(lines: &mut Lines, name: &str) -> Result<DMatrix<T>> {
    let (n, header) = lines.expect(&format!("`{name} rows cols` header"))?;
    let mut parts = labeled(n, header, name)?.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        let tok = parts.next().ok_or_else(|| CqtError::parse(n, format!("missing {what}")))?;
        tok.parse().map_err(|_| CqtError::parse(n, format!("bad {what} `{tok}`")))
    };
    let (rows, cols) = (dim("row count")?, dim("column count")?);
    if parts.next().is_some() {
        return Err(CqtError::parse(n, "extra fields in header"));
    }
    if rows > MAX_ROWS || cols > MAX_RANK || rows.saturating_mul(cols) > MAX_ENTRIES {
        return Err(CqtError::parse(n, format!("{name} of size {rows} x {cols} exceeds the limits")));
    }
    let mut data = Vec::new();
    for _ in 0..rows {
        let (m, l) = lines.expect(&format!("a row of {name}"))?;
        let row: Vec<T> = values(m, l, cols.max(1))?;
        if row.len() != cols {
            return Err(CqtError::parse(m, format!("expected {cols} values, found {}", row.len())));
        }
        data.extend(row);
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn read_correction<T: Scalar>(lines: &mut Lines) -> Result<Correction<T>> {
    let f = read_factor(lines, "F")?;
    let g = read_factor(lines, "G")?;
    Correction::new(f, g).map_err(|e| CqtError::parse(lines.last, e.to_string()))
}

pub fn parse_symbol<T: Scalar>(text: &str) -> Result<LaurentSymbol<T>> {
    let mut lines = Lines::new(text);
    let s = read_symbol(&mut lines)?;
    lines.finish()?;
    Ok(s)
}

pub fn parse_correction<T: Scalar>(text: &str) -> Result<Correction<T>> {
    let mut lines = Lines::new(text);
    let c = read_correction(&mut lines)?;
    lines.finish()?;
    Ok(c)
}

pub fn parse_matrix<T: Scalar>(text: &str) -> Result<CqtMatrix<T>> {
    let mut lines = Lines::new(text);
    let (n, l) = lines.expect("`tol` line")?;
    let tok = labeled(n, l, "tol")?.trim();
    let tol: f64 = tok
        .parse()
        .map_err(|_| CqtError::parse(n, format!("bad tolerance `{tok}`")))?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CqtError::parse(n, "tolerance must be positive and finite"));
    }
    let symbol = read_symbol(&mut lines)?;
    let corr = read_correction(&mut lines)?;
    lines.finish()?;
    Ok(CqtMatrix::new(symbol, corr, tol))
}

const PARAM_NAMES: [&str; 6] = ["lambda1", "lambda2", "mu1", "mu2", "p", "q"];

/// Six `name value` lines in any order, each name exactly once.
pub fn parse_params(text: &str) -> Result<JacksonParams> {
    let mut lines = Lines::new(text);
    let mut vals: [Option<f64>; 6] = [None; 6];
    while let Some((n, l)) = lines.next() {
        let mut parts = l.split_whitespace();
        let (name, value) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(CqtError::parse(n, "expected `name value`")),
        };
        let idx = PARAM_NAMES
            .iter()
            .position(|&p| p == name)
            .ok_or_else(|| CqtError::parse(n, format!("unknown parameter `{name}`")))?;
        if vals[idx].is_some() {
            return Err(CqtError::parse(n, format!("`{name}` given twice")));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| CqtError::parse(n, format!("bad value `{value}`")))?;
        vals[idx] = Some(v);
    }
    let mut got = [0.0; 6];
    for (i, v) in vals.iter().enumerate() {
        got[i] = v.ok_or_else(|| CqtError::parse(lines.last, format!("missing `{}`", PARAM_NAMES[i])))?;
    }
    let [l1, l2, m1, m2, p, q] = got;
    JacksonParams::new(l1, l2, m1, m2, p, q)
}

fn join<T: Scalar>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(Scalar::to_token).collect::<Vec<_>>().join(" ")
}

pub fn write_symbol<T: Scalar>(s: &LaurentSymbol<T>) -> String {
    format!("neg: {}\npos: {}\n", join(s.neg().iter().copied()), join(s.pos().iter().copied()))
}

pub fn write_correction<T: Scalar>(c: &Correction<T>) -> String {
    let mut out = String::new();
    for (name, m) in [("F", c.f()), ("G", c.g())] {
        let _ = writeln!(out, "{name} {} {}", m.nrows(), m.ncols());
        for r in m.row_iter() {
            let _ = writeln!(out, "{}", join(r.iter().copied()));
        }
    }
    out
}

pub fn write_matrix<T: Scalar>(a: &CqtMatrix<T>) -> String {
    format!(
        "tol {:.16e}\n{}{}",
        a.tol(),
        write_symbol(a.symbol()),
        write_correction(a.correction())
    )
}

pub fn write_params(p: &JacksonParams) -> String {
    let v = [p.lambda1, p.lambda2, p.mu1, p.mu2, p.p, p.q];
    PARAM_NAMES
        .iter()
        .zip(v)
        .map(|(n, x)| format!("{n} {x}\n"))
        .collect()
}
