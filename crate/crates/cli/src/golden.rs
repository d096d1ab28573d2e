// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Embedded reference tables and the comparisons behind `--check`.

use veracity_core::capacity::CapacityTable;
use veracity_core::collusion::{format_probability, CollusionTable};

use crate::error::CliError;

pub const COLLUSION_CSV: &str = include_str!("../data/collusion_table.csv");
pub const CAPACITY_CSV: &str = include_str!("../data/capacity_table.csv");

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollusionCell {
    pub panel: u64,
    pub ratio: f64,
    /// Printed form, `2.92e-04` or `<1e-10`.
    pub printed: String,
}

pub fn collusion_cells() -> Vec<CollusionCell> {
    let mut rdr = reader(COLLUSION_CSV);
    let ratios: Vec<f64> = rdr
        .headers()
        .expect("embedded header")
        .iter()
        .skip(1)
        .map(|h| h.parse().expect("embedded ratio"))
        .collect();
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.expect("embedded row");
        let panel: u64 = rec[0].parse().expect("embedded panel");
        for (printed, &ratio) in rec.iter().skip(1).zip(&ratios) {
            cells.push(CollusionCell {
                panel,
                ratio,
                printed: printed.to_string(),
            });
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCell {
    pub platform: String,
    pub staffing: String,
    pub n_min: u64,
    pub display: String,
}

pub fn capacity_cells() -> Vec<CapacityCell> {
    let mut rdr = reader(CAPACITY_CSV);
    rdr.records()
        .map(|rec| {
            let rec = rec.expect("embedded row");
            CapacityCell {
                platform: rec[0].to_string(),
                staffing: rec[3].to_string(),
                n_min: rec[4].parse().expect("embedded n_min"),
                display: rec[5].to_string(),
            }
        })
        .collect()
}

/// Splits `d.dde-XX` into mantissa and exponent.
fn sci_parts(s: &str) -> Option<(f64, i32)> {
    let (m, e) = s.split_once('e')?;
    Some((m.parse().ok()?, e.parse().ok()?))
}

/// Printed values agree when both are the sentinel, or when they share an
/// exponent and the mantissas differ by at most one unit in the third
/// significant digit.
pub fn printed_close(got: &str, want: &str) -> bool {
    if got == want {
        return true;
    }
    match (sci_parts(got), sci_parts(want)) {
        (Some((mg, eg)), Some((mw, ew))) => eg == ew && (mg - mw).abs() <= 0.01 + 1e-9,
        _ => false,
    }
}

fn ratio_eq(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Diffs every cell the table shares with the reference.
pub fn check_collusion(table: &CollusionTable) -> Result<usize, CliError> {
    let mut compared = 0;
    let mut bad = Vec::new();
    for cell in collusion_cells() {
        let Some((_, results)) = table.rows.iter().find(|(n, _)| *n == cell.panel) else {
            continue;
        };
        let Some(col) = table.ratios.iter().position(|&r| ratio_eq(r, cell.ratio)) else {
            continue;
        };
        compared += 1;
        let got = format_probability(results[col].exact_tail);
        if !printed_close(&got, &cell.printed) {
            bad.push(format!(
                "  n={} p={}: got {got}, want {}",
                cell.panel, cell.ratio, cell.printed
            ));
        }
    }
    finish(compared, bad)
}

pub fn check_capacity(table: &CapacityTable) -> Result<usize, CliError> {
    let mut compared = 0;
    let mut bad = Vec::new();
    for cell in capacity_cells() {
        let Some(row) = table.rows.iter().find(|r| r.platform == cell.platform) else {
            continue;
        };
        let Some(col) = table.configs.iter().position(|c| c.name == cell.staffing) else {
            continue;
        };
        compared += 1;
        let got = row.n_min[col];
        if got != cell.n_min {
            bad.push(format!(
                "  {} / {}: got {got}, want {}",
                cell.platform, cell.staffing, cell.n_min
            ));
        }
    }
    finish(compared, bad)
}

fn finish(compared: usize, bad: Vec<String>) -> Result<usize, CliError> {
    if compared == 0 {
        return Err(CliError::Validation(
            "--check: no cell of this table appears in the reference table".into(),
        ));
    }
    if bad.is_empty() {
        Ok(compared)
    } else {
        Err(CliError::Mismatch {
            cells: bad.len(),
            details: bad.join("\n"),
        })
    }
}
