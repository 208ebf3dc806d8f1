//! Text formats. Every writer emits floats in Rust's shortest round-trip
//! form, so `parse(write(x)) == x` holds bit for bit.

pub mod config;
pub mod dra;
pub mod lp;
pub mod pomdp;
pub mod product;
pub mod report;
pub mod sfsc;

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub(crate) fn parse_f64(line: usize, tok: &str) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| ParseError::new(line, format!("bad number `{tok}`")))
}

pub(crate) fn parse_usize(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| ParseError::new(line, format!("bad index `{tok}`")))
}

/// Shortest round-trip rendering of a float.
pub struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn check_name(name: &str) -> Result<(), ParseError> {
    let bad = name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || "#{},:;=".contains(c) || c == '-' && name.starts_with("--"));
    if bad {
        Err(ParseError::new(0, format!("name `{name}` cannot be written")))
    } else {
        Ok(())
    }
}
