//! Shared helpers for the line-oriented text formats.

use std::fmt::Write;

use crate::{Error, Result};

/// Shortest representation that round-trips exactly (at most 17 significant
/// digits), in scientific notation so tiny and huge values stay compact.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:e}")
}

pub(crate) fn push_reals(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:e}").expect("writing to a String cannot fail");
    }
    out.push('\n');
}

pub(crate) fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("`{tok}` is not a real number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

pub(crate) fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("{what} `{tok}` is not a non-negative integer")))
}

/// Parses a whitespace-separated row of reals; `expected` enforces the width.
pub(crate) fn parse_row(text: &str, line: usize, expected: Option<usize>) -> Result<Vec<f64>> {
    let row = text
        .split_whitespace()
        .map(|t| parse_real(t, line))
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = expected {
        if row.len() != n {
            return Err(Error::parse(
                line,
                format!("expected {n} values, found {}", row.len()),
            ));
        }
    }
    Ok(row)
}

/// Line iterator that yields `(1-based line number, text)` and lets callers
/// skip the `#` comment preamble allowed before a header.
pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    consumed: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            consumed: 0,
        }
    }

    /// Returns the header line, collecting any leading comment lines.
    pub(crate) fn header(&mut self, comments: &mut Vec<&'a str>) -> Result<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if let Some(c) = t.strip_prefix('#') {
                comments.push(c.trim());
                continue;
            }
            if t.is_empty() {
                continue;
            }
            self.consumed = i + 1;
            return Ok((i + 1, t));
        }
        Err(Error::parse(1, "missing header line"))
    }

    pub(crate) fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.consumed = i + 1;
                Ok((i + 1, l.trim()))
            }
            None => Err(Error::parse(
                self.consumed + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    /// Errors if anything but blank lines remains.
    pub(crate) fn finish(mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(Error::parse(i + 1, "unexpected trailing content"));
            }
        }
        Ok(())
    }
}
