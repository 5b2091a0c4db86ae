use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nine bollard-pull CFD results at n = 10 rps, as a CSV resource.
pub const CFD_FORCES_CSV: &str = include_str!("../../data/cfd_forces.csv");

/// One steady-state force sample for a rudder pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfdSample {
    #[serde(rename = "delta_p_deg")]
    pub delta_p: f64,
    #[serde(rename = "delta_s_deg")]
    pub delta_s: f64,
    #[serde(rename = "x_ct_n")]
    pub x_ct: f64,
    #[serde(rename = "y_ct_n")]
    pub y_ct: f64,
}

impl CfdSample {
    pub const fn new(delta_p: f64, delta_s: f64, x_ct: f64, y_ct: f64) -> Self {
        Self {
            delta_p,
            delta_s,
            x_ct,
            y_ct,
        }
    }

    fn validate(&self) -> Result<()> {
        check_range("delta_p", self.delta_p, -105.0, 35.0)?;
        check_range("delta_s", self.delta_s, -105.0, 105.0)?;
        if !(self.x_ct.is_finite() && self.y_ct.is_finite()) {
            return Err(Error::Config("non-finite force in sample".into()));
        }
        Ok(())
    }
}

fn check_range(what: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(Error::RangeViolation {
            what,
            value,
            min,
            max,
        })
    }
}

const CFD_FORCES: [CfdSample; 9] = [
    CfdSample::new(-80.0, 70.0, 0.0735, -0.0400),
    CfdSample::new(-80.0, 75.0, -0.0620, -0.0482),
    CfdSample::new(-80.0, 80.0, -0.2061, 0.0507),
    CfdSample::new(-75.0, 70.0, 0.1298, 0.0544),
    CfdSample::new(-75.0, 75.0, -0.0063, 0.0655),
    CfdSample::new(-75.0, 80.0, -0.1089, 0.1816),
    CfdSample::new(-70.0, 70.0, 0.3724, 0.1152),
    CfdSample::new(-70.0, 75.0, 0.1380, 0.1552),
    CfdSample::new(-70.0, 80.0, 0.0030, 0.2678),
];

/// The embedded CFD dataset.
pub fn cfd_forces() -> Vec<CfdSample> {
    CFD_FORCES.to_vec()
}

/// Parses force samples from CSV with the header
/// `delta_p_deg,delta_s_deg,x_ct_n,y_ct_n`.
pub fn parse_samples<R: Read>(reader: R) -> Result<Vec<CfdSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let sample: CfdSample = row?;
        sample.validate()?;
        out.push(sample);
    }
    Ok(out)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<CfdSample>> {
    parse_samples(File::open(path)?)
}
