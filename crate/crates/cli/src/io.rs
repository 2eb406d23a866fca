//! Marginal files, table CSV and output plumbing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use entropy_wb::{truncate_denumerable, validate_marginal, CouplingTable, DenumerableFamily, MarginalDistribution, Provenance};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Deserialize)]
#[serde(untagged)]
enum MarginalFile {
    Probs {
        probs: Vec<f64>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    Family {
        family: String,
        p: f64,
        tail_tol: f64,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Reads a marginal from JSON (`{"probs": [...], "labels": [...]}` or
/// `{"family": "geometric", "p": .., "tail_tol": ..}`) or from a file with
/// one probability per line.
pub fn parse_marginal_file(path: &Path, tol: f64) -> CliResult<MarginalDistribution> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let parsed: MarginalFile =
            serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))?;
        match parsed {
            MarginalFile::Probs { probs, labels } => {
                let d = validate_marginal(&probs, tol)?;
                Ok(match labels {
                    Some(l) => d.with_labels(l)?,
                    None => d,
                })
            }
            MarginalFile::Family { family, p, tail_tol } => match family.as_str() {
                "geometric" => Ok(truncate_denumerable(&DenumerableFamily::Geometric { p }, tail_tol)?),
                other => Err(CliError::parse(path, format!("unknown family {other:?}"))),
            },
        }
    } else {
        let probs = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .enumerate()
            .map(|(i, l)| {
                l.trim_end_matches(',')
                    .parse::<f64>()
                    .map_err(|e| CliError::parse(path, format!("line {}: {e}", i + 1)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        Ok(validate_marginal(&probs, tol)?)
    }
}

/// Header row of column masses; each following row starts with its row
/// mass. Values use the shortest representation that parses back exactly.
pub fn table_to_csv(t: &CouplingTable) -> String {
    let mut out = String::new();
    out.push_str("marginal");
    for q in t.col_marginal().probs() {
        write!(out, ",{q}").unwrap();
    }
    out.push('\n');
    for (r, p) in t.row_marginal().probs().iter().enumerate() {
        write!(out, "{p}").unwrap();
        for v in t.row(r) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`table_to_csv`].
pub fn table_from_csv(text: &str, tol: f64) -> Result<CouplingTable, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let parse_row = |line: &str| -> Result<Vec<f64>, String> {
        line.split(',').map(|f| f.trim().parse::<f64>().map_err(|e| format!("{f:?}: {e}"))).collect()
    };
    let header = lines.next().ok_or("empty table")?;
    let cols = parse_row(header.split_once(',').ok_or("header has no columns")?.1)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for line in lines {
        let values = parse_row(line)?;
        if values.len() != cols.len() + 1 {
            return Err(format!("row has {} cells, expected {}", values.len() - 1, cols.len()));
        }
        rows.push(values[0]);
        cells.push(values[1..].to_vec());
    }
    let x = validate_marginal(&rows, tol).map_err(|e| e.to_string())?;
    let y = validate_marginal(&cols, tol).map_err(|e| e.to_string())?;
    CouplingTable::new(cells, x, y, Provenance::Explicit).map_err(|e| e.to_string())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use entropy_wb::greedy_min_coupling;

    #[test]
    fn csv_round_trip_is_exact() {
        let x = MarginalDistribution::new(vec![0.1, 0.2, 0.7]).unwrap();
        let y = MarginalDistribution::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let (t, _) = greedy_min_coupling(&x, &y);
        let back = table_from_csv(&table_to_csv(&t), 1e-9).unwrap();
        assert_eq!(back.cells(), t.cells());
        assert_eq!(back.row_marginal().probs(), x.probs());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(table_from_csv("marginal,0.5,0.5\n1,0.5\n", 1e-9).is_err());
    }
}
