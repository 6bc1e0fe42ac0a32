//! Line-oriented CSV dialects for networks, scenarios and height profiles,
//! plus plain numeric matrices.
//!
//! The input dialects have no quoting: fields are split on `,` and trimmed,
//! blank lines are skipped and `#` starts a comment line (except the
//! `# pipes` / `# ports` section markers of network files).

mod matrix;
mod network;
mod profile;
mod scenario;

pub use matrix::{read_matrix, write_matrix};
pub use network::{parse_network, serialize_network, NetworkFileError};
pub use profile::parse_profiles;
pub use scenario::{parse_scenario, serialize_scenario, ScenarioFileError};

use thiserror::Error;

/// Syntax error with a 1-based position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(field: &Field<'_>, message: impl Into<String>) -> Self {
        ParseError {
            line: field.line,
            column: field.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Field<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Field<'_> {
    fn number(&self, what: &str) -> Result<f64, ParseError> {
        self.text
            .parse::<f64>()
            .map_err(|_| ParseError::at(self, format!("expected {what}, found '{}'", self.text)))
    }
}

#[derive(Debug)]
struct Row<'a> {
    line: usize,
    /// Whole trimmed line.
    raw: &'a str,
    fields: Vec<Field<'a>>,
}

impl<'a> Row<'a> {
    fn is_comment(&self) -> bool {
        self.raw.starts_with('#')
    }

    fn expect_len(&self, n: usize, layout: &str) -> Result<(), ParseError> {
        if self.fields.len() == n {
            return Ok(());
        }
        let at = self.fields.get(n).copied().unwrap_or(*self.fields.last().expect("rows are non-empty"));
        Err(ParseError::at(
            &at,
            format!("expected {n} fields ({layout}), found {}", self.fields.len()),
        ))
    }
}

/// Non-blank lines split into trimmed fields with their columns.
fn rows(text: &str) -> impl Iterator<Item = Row<'_>> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let raw = line.trim();
        if raw.is_empty() {
            return None;
        }
        let mut fields = Vec::new();
        let mut offset = 0;
        for piece in line.split(',') {
            let lead = piece.len() - piece.trim_start().len();
            fields.push(Field {
                text: piece.trim(),
                line: i + 1,
                column: line[..offset + lead].chars().count() + 1,
            });
            offset += piece.len() + 1;
        }
        Some(Row { line: i + 1, raw, fields })
    })
}

/// Shortest decimal that reads back to the same `f64`.
fn number(v: f64) -> String {
    format!("{v}")
}
