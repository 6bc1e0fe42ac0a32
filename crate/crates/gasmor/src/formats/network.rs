//! `.net.csv`:
//!
//! ```text
//! # pipes
//! id,from,to,length_m,diameter_m,height_delta_m,roughness_m
//! P1,S,N1,40000,0.9,10,1.2e-5
//! # ports
//! supply,S
//! demand,N1
//! ```
//!
//! The column header row of the pipe section is optional.

use std::fmt::Write as _;

use gasmor_core::network::{NetworkError, PortKind};
use gasmor_core::{Network, PipeSpec};
use thiserror::Error;

use super::{number, rows, ParseError};

const PIPE_LAYOUT: &str = "id,from,to,length_m,diameter_m,height_delta_m,roughness_m";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkFileError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("invalid network: {0}")]
    Invalid(#[from] NetworkError),
}

#[derive(PartialEq)]
enum Section {
    None,
    Pipes,
    Ports,
}

pub fn parse_network(text: &str) -> Result<Network, NetworkFileError> {
    let mut section = Section::None;
    let mut pipes = Vec::new();
    let (mut supply, mut demand) = (Vec::new(), Vec::new());
    for row in rows(text) {
        if row.is_comment() {
            let marker = row.raw.trim_start_matches('#').trim().to_ascii_lowercase();
            match marker.as_str() {
                "pipes" => section = Section::Pipes,
                "ports" => section = Section::Ports,
                _ => {}
            }
            continue;
        }
        let f = &row.fields;
        match section {
            Section::None => {
                return Err(ParseError::at(&f[0], "data before the first '# pipes' or '# ports' section").into());
            }
            Section::Pipes => {
                if f[0].text == "id" {
                    continue;
                }
                row.expect_len(7, PIPE_LAYOUT)?;
                if f[..3].iter().any(|x| x.text.is_empty()) {
                    let empty = f[..3].iter().find(|x| x.text.is_empty()).unwrap();
                    return Err(ParseError::at(empty, "empty identifier").into());
                }
                pipes.push(PipeSpec {
                    id: f[0].text.to_string(),
                    from: f[1].text.to_string(),
                    to: f[2].text.to_string(),
                    length: f[3].number("length in m")?,
                    diameter: f[4].number("diameter in m")?,
                    height_delta: f[5].number("height difference in m")?,
                    roughness: f[6].number("roughness in m")?,
                });
            }
            Section::Ports => {
                row.expect_len(2, "supply|demand,node")?;
                if f[1].text.is_empty() {
                    return Err(ParseError::at(&f[1], "empty node id").into());
                }
                let node = f[1].text.to_string();
                match f[0].text {
                    "supply" => supply.push(node),
                    "demand" => demand.push(node),
                    other => {
                        return Err(ParseError::at(&f[0], format!("port kind must be 'supply' or 'demand', found '{other}'")).into())
                    }
                }
            }
        }
    }
    Ok(Network::new(pipes, supply, demand)?)
}

/// Writes the file format; `parse_network(serialize_network(n)) == n`.
pub fn serialize_network(network: &Network) -> String {
    let mut out = String::from("# pipes\n");
    out.push_str(PIPE_LAYOUT);
    out.push('\n');
    for p in network.pipes() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.id,
            p.from,
            p.to,
            number(p.length),
            number(p.diameter),
            number(p.height_delta),
            number(p.roughness)
        );
    }
    out.push_str("# ports\n");
    for node in network.supply_ports().iter().chain(network.demand_ports()) {
        let kind = match network.port_kind(node) {
            Some(PortKind::Supply) => "supply",
            _ => "demand",
        };
        let _ = writeln!(out, "{kind},{node}");
    }
    out
}
