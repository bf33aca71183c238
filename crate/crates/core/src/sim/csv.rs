//! CSV export of a simulation log with a fixed column order and 9 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DVector, Vector3};

use super::runner::{SimLog, StepRecord};
use crate::error::{Error, Result};

pub fn csv_header(q_size: usize, n_segments: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "ref_x", "ref_y", "ref_z", "ee_x", "ee_y", "ee_z"].map(String::from).to_vec();
    h.extend((0..q_size).map(|i| format!("q_{i}")));
    h.extend((0..q_size).map(|i| format!("qd_{i}")));
    h.extend((0..2 * n_segments).map(|i| format!("u_{i}")));
    h.extend((0..3 * n_segments).map(|i| format!("chamber_{i}")));
    h.extend(["solve_ms", "status", "slack_norm", "min_clearance"].map(String::from));
    h
}

fn num(v: f64) -> String {
    format!("{v:.8e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(log: &SimLog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(log.q_size, log.n_segments)).map_err(csv_err)?;
    for r in &log.records {
        let mut row: Vec<String> = Vec::new();
        row.push(num(r.t));
        row.extend(r.reference.iter().chain(r.ee.iter()).map(|v| num(*v)));
        row.extend(r.q.iter().chain(r.qd.iter()).chain(r.u.iter()).chain(r.chamber.iter()).map(|v| num(*v)));
        row.push(num(r.solve_ms));
        row.push(r.status.clone());
        row.push(num(r.slack_norm));
        row.push(num(r.min_clearance));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(log: &SimLog, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(log, std::io::BufWriter::new(file))
}

/// Parses a file written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<SimLog> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let q_size = header.iter().filter(|h| h.starts_with("q_")).count();
    let n_segments = header.iter().filter(|h| h.starts_with("chamber_")).count() / 3;
    if header != csv_header(q_size, n_segments) {
        return Err(Error::Parse("unexpected CSV header".into()));
    }
    let mut records = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let f = |i: usize| -> Result<f64> {
            row.get(i)
                .ok_or_else(|| Error::Parse(format!("row {}: missing column {i}", line + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}, column {}: {e}", line + 2, header[i])))
        };
        let vec_at = |start: usize, len: usize| -> Result<DVector<f64>> {
            let v: Result<Vec<f64>> = (start..start + len).map(f).collect();
            Ok(DVector::from_vec(v?))
        };
        let mut c = 7;
        let q = vec_at(c, q_size)?;
        c += q_size;
        let qd = vec_at(c, q_size)?;
        c += q_size;
        let u = vec_at(c, 2 * n_segments)?;
        c += 2 * n_segments;
        let chamber = vec_at(c, 3 * n_segments)?;
        c += 3 * n_segments;
        records.push(StepRecord {
            t: f(0)?,
            reference: Vector3::new(f(1)?, f(2)?, f(3)?),
            ee: Vector3::new(f(4)?, f(5)?, f(6)?),
            q,
            qd,
            u,
            chamber,
            solve_ms: f(c)?,
            status: row.get(c + 1).unwrap_or_default().to_string(),
            slack_norm: f(c + 2)?,
            min_clearance: f(c + 3)?,
        });
    }
    Ok(SimLog { q_size, n_segments, records })
}
