use std::io::{Read, Write};

use thiserror::Error;

use super::events::Event;
use crate::model::WIRE_COUNT;

/// One logged tick. Per-wire arrays are indexed by wire id; ids the scenario
/// does not use are `None` and written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub position: [f64; 3],
    /// Intrinsic Z-Y-X angles `[roll, pitch, yaw]`.
    pub rpy: [f64; 3],
    pub lengths: [Option<f64>; WIRE_COUNT],
    pub f_ref: [Option<f64>; WIRE_COUNT],
    pub i_ref: [Option<f64>; WIRE_COUNT],
    pub phase: String,
    pub events: Vec<Event>,
}

/// Per-tick values that are logged in memory but not written to the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TickDiagnostics {
    pub phase_index: usize,
    pub wire_rates: [Option<f64>; WIRE_COUNT],
    pub feedforward: [Option<f64>; WIRE_COUNT],
    pub contact_force: f64,
    pub near_gimbal_lock: bool,
    pub waiting_for_sync: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub scenario: String,
    pub dt: f64,
    pub rows: Vec<LogRow>,
    pub diagnostics: Vec<TickDiagnostics>,
}

impl TrajectoryLog {
    pub fn events(&self) -> impl Iterator<Item = (&LogRow, &Event)> {
        self.rows.iter().flat_map(|r| r.events.iter().map(move |e| (r, e)))
    }

    /// Consecutive runs of equal phase names as `(name, first row, last row)`.
    pub fn phase_spans(&self) -> Vec<(String, usize, usize)> {
        let mut spans: Vec<(String, usize, usize)> = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            match spans.last_mut() {
                Some((name, _, end)) if *name == r.phase => *end = i,
                _ => spans.push((r.phase.clone(), i, i)),
            }
        }
        spans
    }

    pub fn first_row_of_phase(&self, phase: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.phase == phase)
    }
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["t", "x", "y", "z", "roll", "pitch", "yaw"].map(String::from).to_vec();
    for prefix in ["l", "fref", "iref"] {
        h.extend((0..WIRE_COUNT).map(|i| format!("{prefix}{i}")));
    }
    h.push("phase".into());
    h.push("events".into());
    h
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log has no rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("CSV header does not match the trajectory format")]
    Header,
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Cell { row: usize, column: String, value: String },
}

/// Row stride for 100 Hz output at timestep `dt`.
pub fn decimation_stride(dt: f64) -> usize {
    ((0.01 / dt).round() as usize).max(1)
}

/// Writes every `stride`-th row plus the last one. Events on skipped rows are
/// carried onto the next written row.
pub fn write_csv<W: Write>(log: &TrajectoryLog, out: W, stride: usize) -> Result<(), LogError> {
    if log.rows.is_empty() {
        return Err(LogError::Empty);
    }
    let stride = stride.max(1);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    let last = log.rows.len() - 1;
    let mut pending: Vec<&Event> = Vec::new();
    for (i, row) in log.rows.iter().enumerate() {
        pending.extend(&row.events);
        if i % stride != 0 && i != last {
            continue;
        }
        let mut rec: Vec<String> = Vec::with_capacity(7 + 3 * WIRE_COUNT + 2);
        rec.push(row.t.to_string());
        rec.extend(row.position.iter().chain(&row.rpy).map(f64::to_string));
        for arr in [&row.lengths, &row.f_ref, &row.i_ref] {
            rec.extend(arr.iter().map(|v| v.map(|v| v.to_string()).unwrap_or_default()));
        }
        rec.push(row.phase.clone());
        rec.push(pending.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";"));
        pending.clear();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_bytes(log: &TrajectoryLog, stride: usize) -> Result<Vec<u8>, LogError> {
    let mut buf = Vec::new();
    write_csv(log, &mut buf, stride)?;
    Ok(buf)
}

pub fn emit_csv(log: &TrajectoryLog, path: &std::path::Path, stride: usize) -> Result<(), LogError> {
    let file = std::fs::File::create(path)?;
    write_csv(log, std::io::BufWriter::new(file), stride)
}

/// Parses a trajectory CSV back into rows.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<LogRow>, LogError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != csv_header() {
        return Err(LogError::Header);
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let cell = |c: usize| -> Result<Option<f64>, LogError> {
            let v = &rec[c];
            if v.is_empty() {
                return Ok(None);
            }
            v.parse().map(Some).map_err(|_| LogError::Cell { row: i, column: header[c].clone(), value: v.into() })
        };
        let required = |c: usize| -> Result<f64, LogError> {
            cell(c)?.ok_or_else(|| LogError::Cell { row: i, column: header[c].clone(), value: String::new() })
        };
        let wires = |offset: usize| -> Result<[Option<f64>; WIRE_COUNT], LogError> {
            let mut a = [None; WIRE_COUNT];
            for (k, slot) in a.iter_mut().enumerate() {
                *slot = cell(offset + k)?;
            }
            Ok(a)
        };
        let events_col = 7 + 3 * WIRE_COUNT + 1;
        let events = if rec[events_col].is_empty() {
            Vec::new()
        } else {
            rec[events_col]
                .split(';')
                .map(|e| e.parse().map_err(|_| LogError::Cell { row: i, column: "events".into(), value: e.into() }))
                .collect::<Result<_, _>>()?
        };
        rows.push(LogRow {
            t: required(0)?,
            position: [required(1)?, required(2)?, required(3)?],
            rpy: [required(4)?, required(5)?, required(6)?],
            lengths: wires(7)?,
            f_ref: wires(7 + WIRE_COUNT)?,
            i_ref: wires(7 + 2 * WIRE_COUNT)?,
            phase: rec[events_col - 1].to_string(),
            events,
        });
    }
    Ok(rows)
}
