use std::io::Write;
use std::path::Path;

use super::{at, HarnessError};

/// A sweep table read back from CSV: one row per occupancy.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub label: String,
    /// Every column after `occupancy`.
    pub columns: Vec<String>,
    pub occupancies: Vec<f64>,
    pub rows: Vec<Vec<String>>,
}

/// Loads a `sweep.csv` written by a run, or any CSV whose first column is
/// `occupancy`.
pub fn read_sweep_table(path: &Path, label: &str) -> Result<SweepTable, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(at("compare"))?;
    let header = r.headers().map_err(at("compare"))?.clone();
    if header.get(0) != Some("occupancy") {
        return Err(HarnessError::Stage {
            stage: "compare",
            message: format!("{}: first column is not occupancy", path.display()),
        });
    }
    let mut occupancies = Vec::new();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(at("compare"))?;
        let occ = rec[0].parse::<f64>().map_err(at("compare"))?;
        occupancies.push(occ);
        rows.push(rec.iter().skip(1).map(str::to_string).collect());
    }
    Ok(SweepTable { label: label.to_string(), columns: header.iter().skip(1).map(str::to_string).collect(), occupancies, rows })
}

/// Joins sweep tables on occupancy, one column group per input in input
/// order, columns named `label:column`.
pub fn compare_runs(tables: &[SweepTable]) -> Result<SweepTable, HarnessError> {
    let fail = |message: String| HarnessError::Stage { stage: "compare", message };
    if tables.len() < 2 {
        return Err(fail(format!("need at least two runs, got {}", tables.len())));
    }
    let first = &tables[0];
    for (i, t) in tables.iter().enumerate() {
        if tables[..i].iter().any(|u| u.label == t.label) {
            return Err(fail(format!("label {:?} is used twice", t.label)));
        }
        let same = t.occupancies.len() == first.occupancies.len()
            && t.occupancies.iter().zip(&first.occupancies).all(|(a, b)| (a - b).abs() <= 1e-12);
        if !same {
            return Err(fail(format!("{} and {} have different occupancy grids", first.label, t.label)));
        }
    }
    let columns = tables.iter().flat_map(|t| t.columns.iter().map(move |c| format!("{}:{c}", t.label))).collect();
    let rows = (0..first.occupancies.len())
        .map(|i| tables.iter().flat_map(|t| t.rows[i].iter().cloned()).collect())
        .collect();
    Ok(SweepTable { label: "comparison".into(), columns, occupancies: first.occupancies.clone(), rows })
}

pub fn write_comparison_csv<W: Write>(table: &SweepTable, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("occupancy").chain(table.columns.iter().map(String::as_str)))
        .map_err(at("compare"))?;
    for (occ, row) in table.occupancies.iter().zip(&table.rows) {
        w.write_record(std::iter::once(occ.to_string()).chain(row.iter().cloned())).map_err(at("compare"))?;
    }
    w.flush().map_err(at("compare"))
}
