//! `.scn.csv`:
//!
//! ```text
//! ! T=86400
//! ! dt=60
//! t_s,S,D1
//! 0,6e6,30
//! 3600,6e6,45
//! ```
//!
//! One column per port id, values in Pa (supply) or kg/s (demand), linear
//! interpolation in between. Both directives are required.

use std::fmt::Write as _;

use gasmor_core::network::{ScenarioError, TimeSeries};
use gasmor_core::Scenario;
use thiserror::Error;

use super::{number, rows, Field, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioFileError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ScenarioError),
}

fn directive(field: &Field<'_>) -> Result<(&'static str, f64), ParseError> {
    let body = field.text.trim_start_matches('!').trim();
    let (key, value) = body
        .split_once('=')
        .ok_or_else(|| ParseError::at(field, format!("expected '! key=value', found '{}'", field.text)))?;
    let key = match key.trim() {
        "T" => "T",
        "dt" => "dt",
        other => return Err(ParseError::at(field, format!("unknown directive '{other}' (valid: T, dt)"))),
    };
    let value = value
        .trim()
        .parse::<f64>()
        .map_err(|_| ParseError::at(field, format!("directive {key}: expected a number in s, found '{}'", value.trim())))?;
    Ok((key, value))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioFileError> {
    let (mut horizon, mut dt) = (None, None);
    let mut ports: Vec<String> = Vec::new();
    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut last_line = 0;
    for row in rows(text) {
        last_line = row.line;
        if row.is_comment() {
            continue;
        }
        let f = &row.fields;
        if row.raw.starts_with('!') {
            if f.len() != 1 {
                return Err(ParseError::at(&f[1], "directives take a single 'key=value'").into());
            }
            match directive(&f[0])? {
                ("T", v) => horizon = Some(v),
                (_, v) => dt = Some(v),
            }
            continue;
        }
        if ports.is_empty() {
            if f[0].text != "t_s" {
                return Err(ParseError::at(&f[0], format!("expected header 't_s,<port ids>', found '{}'", f[0].text)).into());
            }
            if f.len() < 2 {
                return Err(ParseError::at(&f[0], "header lists no port ids").into());
            }
            for p in &f[1..] {
                if p.text.is_empty() {
                    return Err(ParseError::at(p, "empty port id").into());
                }
                ports.push(p.text.to_string());
            }
            columns = vec![Vec::new(); ports.len()];
            continue;
        }
        row.expect_len(ports.len() + 1, "t_s and one value per port")?;
        times.push(f[0].number("a time in s")?);
        for (col, field) in columns.iter_mut().zip(&f[1..]) {
            col.push(field.number("a port value")?);
        }
    }
    let missing = |what: &str| ParseError {
        line: last_line.max(1),
        column: 1,
        message: format!("missing {what}"),
    };
    if ports.is_empty() {
        return Err(missing("'t_s,<port ids>' header").into());
    }
    if times.is_empty() {
        return Err(missing("data rows").into());
    }
    let horizon = horizon.ok_or_else(|| missing("'! T=<seconds>' directive"))?;
    let dt = dt.ok_or_else(|| missing("'! dt=<seconds>' directive"))?;
    let series = ports
        .iter()
        .zip(columns)
        .map(|(p, values)| TimeSeries::new(p, times.clone(), values).map(|s| (p.clone(), s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario::new(horizon, dt, series)?)
}

/// Writes a scenario on the union of its series' sample times.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let mut times: Vec<f64> = scenario.series.iter().flat_map(|(_, s)| s.times().iter().copied()).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut out = String::new();
    let _ = writeln!(out, "! T={}\n! dt={}", number(scenario.horizon), number(scenario.dt));
    out.push_str("t_s");
    for (p, _) in &scenario.series {
        out.push(',');
        out.push_str(p);
    }
    out.push('\n');
    for t in times {
        out.push_str(&number(t));
        for (_, s) in &scenario.series {
            out.push(',');
            out.push_str(&number(s.eval(t)));
        }
        out.push('\n');
    }
    out
}
