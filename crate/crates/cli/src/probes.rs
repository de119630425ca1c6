use crate::failure::Failure;
use mfd_sim::coupling::Probe;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct Row {
    label: String,
    x: f64,
    y: f64,
}

/// Reads a `label,x,y` CSV (header required, coordinates in m).
pub fn parse(text: &str, path: &Path) -> Result<Vec<Probe>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| Failure::parse(path, e))?;
        if !(row.x.is_finite() && row.y.is_finite()) {
            return Err(Failure::parse(
                path,
                format!("probe {}: non-finite coordinate", row.label),
            ));
        }
        if !seen.insert(row.label.clone()) {
            return Err(Failure::parse(
                path,
                format!("duplicate probe label {}", row.label),
            ));
        }
        out.push(Probe::new(row.label, row.x, row.y));
    }
    Ok(out)
}
