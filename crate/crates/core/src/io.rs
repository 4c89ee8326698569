//! Plain-text trajectory files: a `time,q1,...,qn` header followed by one
//! row per sample, seconds and radians.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::trajectory::JointTrajectory;

fn format_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_string(), reason: reason.into() }
}

/// Parses a trajectory; `name` only labels errors.
pub fn read_trajectory<R: Read>(reader: R, name: &str) -> Result<JointTrajectory> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 {
        return Err(format_err(name, "expected a time column and at least one joint"));
    }
    if header.get(0) != Some("time") {
        return Err(format_err(name, "first column must be `time`"));
    }
    let n = header.len() - 1;
    let mut t = Vec::new();
    let mut q = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != n + 1 {
            return Err(format_err(name, format!("row {} has {} fields, expected {}", line + 1, rec.len(), n + 1)));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 =
                field.parse().map_err(|_| format_err(name, format!("row {}: `{field}` is not a number", line + 1)))?;
            if c == 0 {
                t.push(v);
            } else {
                q.push(v);
            }
        }
    }
    let rows = t.len();
    let q = Array2::from_shape_vec((rows, n), q).map_err(|e| format_err(name, e.to_string()))?;
    JointTrajectory::new(Array1::from(t), q)
}

pub fn read_trajectory_file(path: &Path) -> Result<JointTrajectory> {
    let file = File::open(path)?;
    read_trajectory(file, &path.display().to_string())
}

/// Writes floats in their shortest round-trip form, so reading the file back
/// reproduces every value exactly.
pub fn write_trajectory<W: Write>(writer: W, traj: &JointTrajectory) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string()];
    header.extend((1..=traj.n_dof()).map(|i| format!("q{i}")));
    wtr.write_record(&header)?;
    let q = traj.positions();
    for (k, &tk) in traj.times().iter().enumerate() {
        let mut row = vec![tk.to_string()];
        row.extend(q.row(k).iter().map(|v| v.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_trajectory_file(path: &Path, traj: &JointTrajectory) -> Result<()> {
    write_trajectory(File::create(path)?, traj)
}
