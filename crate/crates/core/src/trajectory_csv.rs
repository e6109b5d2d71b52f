//! CSV form of reduced-model trajectories.
//!
//! Leading `#` lines carry the metadata as `key=value` pairs. Every number is
//! written with `{:.16e}`, which round-trips `f64` exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{Trajectory, TrajectoryMeta};
use crate::model::ModeState;
use crate::observables::diagnostics;

pub const HEADER: [&str; 13] = [
    "t",
    "omega1_re",
    "omega1_im",
    "omega3_re",
    "omega3_im",
    "omega5_re",
    "omega5_im",
    "omega7_re",
    "omega7_im",
    "A",
    "B",
    "E",
    "R",
];

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `traj` with derived `A, B, E, R` columns; `R` is empty where `|ω₃|` is degenerate.
pub fn write_trajectory<W: Write>(mut out: W, traj: &Trajectory<ModeState>) -> Result<()> {
    writeln!(out, "# rhs={}", traj.meta.rhs).map_err(csv_err)?;
    for (k, v) in &traj.meta.params {
        writeln!(out, "# {k}={}", fmt(*v)).map_err(csv_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for (t, s) in traj.iter() {
        let d = diagnostics(s);
        let mut row: Vec<String> = Vec::with_capacity(HEADER.len());
        row.push(fmt(t));
        row.extend(s.to_reals().iter().map(|x| fmt(*x)));
        row.extend([d.a, d.b, d.e].iter().map(|x| fmt(*x)));
        row.push(d.r.map(fmt).unwrap_or_default());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_trajectory_file(path: impl AsRef<Path>, traj: &Trajectory<ModeState>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref()).map_err(csv_err)?;
    write_trajectory(std::io::BufWriter::new(file), traj)
}

/// Reads a file produced by [`write_trajectory`]; derived columns are ignored.
pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory<ModeState>> {
    let mut meta = TrajectoryMeta::default();
    let mut body = String::new();
    for line in BufReader::new(input).lines() {
        let line = line.map_err(csv_err)?;
        match line.strip_prefix('#') {
            Some(c) => {
                let (k, v) =
                    c.trim().split_once('=').ok_or_else(|| Error::Csv(format!("bad metadata line {line:?}")))?;
                if k == "rhs" {
                    meta.rhs = v.to_string();
                } else {
                    let x = v.parse::<f64>().map_err(|e| Error::Csv(format!("metadata {k}: {e}")))?;
                    meta.params.push((k.to_string(), x));
                }
            }
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < 9 || header.iter().take(9).ne(HEADER.iter().take(9).copied()) {
        return Err(Error::Csv(format!("unexpected header {header:?}")));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Csv(format!("missing column {}", HEADER[i])))?
                .parse::<f64>()
                .map_err(|e| Error::Csv(format!("column {}: {e}", HEADER[i])))
        };
        times.push(num(0)?);
        let c = |i: usize| -> Result<Complex64> { Ok(Complex64::new(num(i)?, num(i + 1)?)) };
        states.push(ModeState::new(c(1)?, c(3)?, c(5)?, c(7)?));
    }
    Trajectory::from_samples(times, states, meta)
}

pub fn read_trajectory_file(path: impl AsRef<Path>) -> Result<Trajectory<ModeState>> {
    let file = std::fs::File::open(path.as_ref()).map_err(csv_err)?;
    read_trajectory(file)
}
