//! Per-step trace records and their CSV form.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mission stage. Ordered: a run only ever moves forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Transition,
    Docking,
    Keeping,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Transition => "transition",
            Stage::Docking => "docking",
            Stage::Keeping => "keeping",
        }
    }

    /// Whether the positioning controller is active.
    pub fn is_positioning(&self) -> bool {
        !matches!(self, Stage::Transition)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transition" => Ok(Stage::Transition),
            "docking" => Ok(Stage::Docking),
            "keeping" => Ok(Stage::Keeping),
            other => Err(Error::Config(format!("unknown stage {other:?}"))),
        }
    }
}

/// One control step. Pose and velocities are the true state at `t`; the
/// actuator command and required forces are those applied over
/// `[t, t + dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x0: f64,
    pub y0: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub delta_p: f64,
    pub delta_s: f64,
    pub n_b: f64,
    pub x_req: f64,
    pub y_req: f64,
    pub n_req: f64,
    pub e_x: f64,
    pub e_y: f64,
    pub e_psi: f64,
    pub stage: Stage,
}

pub const TRACE_HEADER: [&str; 17] = [
    "t", "x0", "y0", "psi", "u", "v", "r", "delta_p", "delta_s", "n_b", "x_req", "y_req", "n_req",
    "e_x", "e_y", "e_psi", "stage",
];

impl TraceRecord {
    pub fn numeric(&self) -> [f64; 16] {
        [
            self.t,
            self.x0,
            self.y0,
            self.psi,
            self.u,
            self.v,
            self.r,
            self.delta_p,
            self.delta_s,
            self.n_b,
            self.x_req,
            self.y_req,
            self.n_req,
            self.e_x,
            self.e_y,
            self.e_psi,
        ]
    }

    fn from_numeric(n: [f64; 16], stage: Stage) -> Self {
        Self {
            t: n[0],
            x0: n[1],
            y0: n[2],
            psi: n[3],
            u: n[4],
            v: n[5],
            r: n[6],
            delta_p: n[7],
            delta_s: n[8],
            n_b: n[9],
            x_req: n[10],
            y_req: n[11],
            n_req: n[12],
            e_x: n[13],
            e_y: n[14],
            e_psi: n[15],
            stage,
        }
    }

    pub fn planar_speed(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// Formats a value with 9 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes the trace as CSV: header row, then one row per record.
pub fn write_trace<W: Write>(writer: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for rec in trace {
        let mut row: Vec<String> = rec.numeric().iter().map(|x| format_value(*x)).collect();
        row.push(rec.stage.as_str().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trace(trace: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_trace(file, trace)
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Config(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let mut n = [0.0; 16];
        for (k, slot) in n.iter_mut().enumerate() {
            *slot = row[k]
                .parse()
                .map_err(|e| Error::Config(format!("bad value {:?}: {e}", &row[k])))?;
        }
        out.push(TraceRecord::from_numeric(n, row[16].parse()?));
    }
    Ok(out)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    read_trace(File::open(path)?)
}
