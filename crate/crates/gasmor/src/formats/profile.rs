//! `.prof.csv`: rows `pipe_id,arclength_m,elevation_m`, grouped by pipe in
//! file order. An optional header row starts with `pipe_id`.

use std::collections::BTreeMap;

use super::{rows, ParseError};

pub fn parse_profiles(text: &str) -> Result<BTreeMap<String, Vec<(f64, f64)>>, ParseError> {
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows(text) {
        if row.is_comment() || row.fields[0].text == "pipe_id" {
            continue;
        }
        row.expect_len(3, "pipe_id,arclength_m,elevation_m")?;
        let f = &row.fields;
        if f[0].text.is_empty() {
            return Err(ParseError::at(&f[0], "empty pipe id"));
        }
        let s = f[1].number("an arclength in m")?;
        let z = f[2].number("an elevation in m")?;
        out.entry(f[0].text.to_string()).or_default().push((s, z));
    }
    Ok(out)
}
