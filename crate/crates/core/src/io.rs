//! Text output for trajectories.
//!
//! The CSV layout is: a header row, then one row per sample holding the
//! time, the positions flattened agent-major, the velocities when present,
//! and one column per recorded monitor. Floats are printed with 17
//! significant digits so parsing the file back reproduces them bit-exactly.

use crate::dynamics::TrajectoryRecord;

/// 17-significant-digit scientific formatting; round-trips through `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv_header(record: &TrajectoryRecord) -> String {
    let state = record.initial_state();
    let (n, m) = (state.n(), state.m());
    let mut cols = vec!["time".to_string()];
    for i in 0..n {
        for d in 0..m {
            cols.push(format!("x{i}_{d}"));
        }
    }
    if state.velocities().is_some() {
        for i in 0..n {
            for d in 0..m {
                cols.push(format!("v{i}_{d}"));
            }
        }
    }
    for id in &record.monitor_ids {
        cols.push(id.to_string());
    }
    cols.join(",")
}

/// Render a whole trajectory as CSV text.
pub fn trajectory_to_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::new();
    out.push_str(&trajectory_csv_header(record));
    out.push('\n');
    for (idx, state) in record.states.iter().enumerate() {
        let mut row = vec![format_f64(record.times[idx])];
        row.extend(state.positions().iter().copied().map(format_f64));
        if let Some(v) = state.velocities() {
            row.extend(v.iter().copied().map(format_f64));
        }
        row.extend(record.monitor_values[idx].iter().copied().map(format_f64));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
