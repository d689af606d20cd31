//! Reading cycle tables and resampling them onto the uniform phase grid.
//!
//! Two comma-separated layouts are accepted:
//!
//! * **matrix**: no header, one cycle per row, columns at equally spaced
//!   phases `k / (C − 1)`;
//! * **long**: a header naming `cycle_id`, `phase` and `value` (any order,
//!   extra columns ignored), one sample per row, phases in `[0, 1]`.
//!
//! Lines starting with `#` are comments. Cycle order is row order (matrix) or
//! order of first appearance (long).

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use fts_bands::{FunctionalTimeSeries, Grid};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Matrix if the first row is numeric, long otherwise.
    #[default]
    Auto,
    Matrix,
    Long,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::Auto => "auto",
            Layout::Matrix => "matrix",
            Layout::Long => "long",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub series: FunctionalTimeSeries,
    /// Resolved layout (never `Auto`).
    pub layout: Layout,
    /// Cycle labels: `cycle_id` values, or 1-based file line numbers for the matrix layout.
    pub cycle_ids: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn ingest(path: &Path, grid_size: usize, layout: Layout) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file, grid_size, layout).map_err(|e| match e {
        CliError::Invalid(m) => CliError::Invalid(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn ingest_reader(reader: impl Read, grid_size: usize, layout: Layout) -> Result<Ingested> {
    let grid = Grid::uniform(grid_size)?;
    let rows = read_records(reader)?;
    if rows.is_empty() {
        return Err(CliError::invalid("no data rows"));
    }
    let layout = match layout {
        Layout::Auto if rows[0].1.iter().all(|c| c.parse::<f64>().is_ok()) => Layout::Matrix,
        Layout::Auto => Layout::Long,
        other => other,
    };
    let ingested = match layout {
        Layout::Long => long(&rows, &grid)?,
        _ => matrix(&rows, &grid)?,
    };
    for w in &ingested.warnings {
        log::warn!("{w}");
    }
    Ok(ingested)
}

type Record = (u64, Vec<String>);

/// Non-comment, non-blank records with their 1-based line numbers in the file.
fn read_records(mut reader: impl Read) -> Result<Vec<Record>> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| CliError::invalid(format!("cannot read table: {e}")))?;
    let mut kept = String::with_capacity(text.len());
    let mut lines = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        kept.push_str(line);
        kept.push('\n');
        lines.push(k as u64 + 1);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(kept.as_bytes());
    let mut rows = Vec::with_capacity(lines.len());
    for (rec, &line) in rdr.records().zip(&lines) {
        let rec = rec.map_err(|e| CliError::invalid(format!("row {line}: malformed record: {e}")))?;
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    if rows.len() != lines.len() {
        return Err(CliError::invalid("quoted fields spanning several lines are not supported"));
    }
    Ok(rows)
}

fn number(cell: &str, line: u64, column: &str) -> Result<f64> {
    if cell.is_empty() {
        return Err(CliError::invalid(format!("row {line}, column {column}: empty cell")));
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::invalid(format!(
            "row {line}, column {column}: cannot parse {cell:?} as a finite number"
        ))),
    }
}

fn matrix(rows: &[Record], grid: &std::sync::Arc<Grid>) -> Result<Ingested> {
    let cols = rows[0].1.len();
    let t = grid.len();
    if cols == 1 && t != 1 {
        return Err(CliError::invalid(format!(
            "row {}: a single column has no phase axis to resample onto {t} points",
            rows[0].0
        )));
    }
    let phases: Vec<f64> = (0..cols).map(|k| if cols == 1 { 0.0 } else { k as f64 / (cols - 1) as f64 }).collect();
    let mut data = Vec::with_capacity(rows.len() * t);
    let mut ids = Vec::with_capacity(rows.len());
    for (line, cells) in rows {
        if cells.len() != cols {
            return Err(CliError::invalid(format!(
                "row {line}: expected {cols} values like the first row, found {}",
                cells.len()
            )));
        }
        let values = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| number(cell, *line, &(c + 1).to_string()))
            .collect::<Result<Vec<_>>>()?;
        if cols == t {
            data.extend_from_slice(&values);
        } else {
            data.extend(resample(&phases, &values, grid.points()));
        }
        ids.push(line.to_string());
    }
    Ok(Ingested {
        series: FunctionalTimeSeries::from_matrix(grid.clone(), data)?,
        layout: Layout::Matrix,
        cycle_ids: ids,
        warnings: Vec::new(),
    })
}

struct Cycle {
    id: String,
    first_line: u64,
    samples: Vec<(f64, f64, u64)>,
}

fn long(rows: &[Record], grid: &std::sync::Arc<Grid>) -> Result<Ingested> {
    let (header_line, header) = &rows[0];
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                CliError::invalid(format!(
                    "row {header_line}: long layout needs a header with columns cycle_id, phase, value (missing {name})"
                ))
            })
    };
    let (ci, pi, vi) = (find("cycle_id")?, find("phase")?, find("value")?);
    let width = ci.max(pi).max(vi) + 1;

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut cycles: Vec<Cycle> = Vec::new();
    for (line, cells) in &rows[1..] {
        if cells.len() < width {
            return Err(CliError::invalid(format!(
                "row {line}: expected at least {width} columns, found {}",
                cells.len()
            )));
        }
        let id = &cells[ci];
        if id.is_empty() {
            return Err(CliError::invalid(format!("row {line}, column cycle_id: empty cell")));
        }
        let phase = number(&cells[pi], *line, "phase")?;
        if !(0.0..=1.0).contains(&phase) {
            return Err(CliError::invalid(format!("row {line}, column phase: {phase} is outside [0, 1]")));
        }
        let value = number(&cells[vi], *line, "value")?;
        let k = *index.entry(id.clone()).or_insert_with(|| {
            cycles.push(Cycle { id: id.clone(), first_line: *line, samples: Vec::new() });
            cycles.len() - 1
        });
        cycles[k].samples.push((phase, value, *line));
    }
    if cycles.is_empty() {
        return Err(CliError::invalid("long layout header has no data rows"));
    }

    let t = grid.len();
    let mut data = Vec::with_capacity(cycles.len() * t);
    let mut partial = 0;
    for cycle in &mut cycles {
        cycle.samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if cycle.samples.len() < 2 {
            return Err(CliError::invalid(format!(
                "row {}: cycle {:?} has {} sample(s); at least 2 are needed",
                cycle.first_line,
                cycle.id,
                cycle.samples.len()
            )));
        }
        if let Some(w) = cycle.samples.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(CliError::invalid(format!(
                "row {}: cycle {:?} repeats phase {} (also row {})",
                w[1].2, cycle.id, w[1].0, w[0].2
            )));
        }
        let phases: Vec<f64> = cycle.samples.iter().map(|s| s.0).collect();
        let values: Vec<f64> = cycle.samples.iter().map(|s| s.1).collect();
        if phases[0] > 0.0 || phases[phases.len() - 1] < 1.0 {
            partial += 1;
        }
        data.extend(resample(&phases, &values, grid.points()));
    }
    let mut warnings = Vec::new();
    if partial > 0 {
        warnings.push(format!(
            "{partial} cycle(s) do not span phases 0 to 1; end values are held constant outside the sampled range"
        ));
    }
    Ok(Ingested {
        series: FunctionalTimeSeries::from_matrix(grid.clone(), data)?,
        layout: Layout::Long,
        cycle_ids: cycles.into_iter().map(|c| c.id).collect(),
        warnings,
    })
}

/// Piecewise-linear interpolation of `(phases, values)` at `points`.
///
/// `phases` is strictly increasing. A point that coincides with a phase gets
/// that sample exactly; points outside the sampled range take the nearest end value.
pub fn resample(phases: &[f64], values: &[f64], points: &[f64]) -> Vec<f64> {
    let last = phases.len() - 1;
    points
        .iter()
        .map(|&t| {
            let i = phases.partition_point(|&p| p < t);
            if i <= last && phases[i] == t {
                values[i]
            } else if i == 0 {
                values[0]
            } else if i > last {
                values[last]
            } else {
                let (p0, p1) = (phases[i - 1], phases[i]);
                let (v0, v1) = (values[i - 1], values[i]);
                v0 + (v1 - v0) * ((t - p0) / (p1 - p0))
            }
        })
        .collect()
}
