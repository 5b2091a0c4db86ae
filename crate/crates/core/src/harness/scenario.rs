//! Scenario configuration and the shipped docking scenarios.
//!
//! A configuration is a TOML document; `vtps dump-config` prints a complete
//! one. Every field has a default, so a file only needs the values it
//! changes.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trace::Stage;
use crate::allocation::{ActuatorLimits, ForceLimits};
use crate::controller::{PidGains, Pose, Velocities};
use crate::error::{Error, Result};
use crate::force_model::{
    cfd_forces, fit_rudder_model, load_samples, BowThrusterModel, FullForceModel,
};
use crate::guidance::{load_waypoints, LosParams};
use crate::sim::{GustModel, SensorNoise, VesselParams};

/// Where the waypoint table comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSpec {
    /// Waypoint file, one `x0_m y0_m psi_rad` row per line.
    File { file: PathBuf },
    /// Straight line from `start` along `heading`.
    Straight {
        start: [f64; 2],
        heading: f64,
        length: f64,
        spacing: f64,
    },
    /// Straight lead-in, a half circle, and a straight lead-out in the
    /// opposite direction.
    UTurn {
        start: [f64; 2],
        heading: f64,
        lead_in: f64,
        radius: f64,
        lead_out: f64,
        spacing: f64,
        /// Turn towards starboard (clockwise seen from above) when true.
        starboard: bool,
    },
}

impl PathSpec {
    pub fn waypoints(&self) -> Result<Vec<Pose>> {
        match self {
            PathSpec::File { file } => load_waypoints(file),
            PathSpec::Straight {
                start,
                heading,
                length,
                spacing,
            } => {
                check_spacing(*spacing, *length)?;
                let n = (length / spacing).round() as usize;
                let (s, c) = heading.sin_cos();
                Ok((0..=n)
                    .map(|k| {
                        let d = length * k as f64 / n as f64;
                        Pose::new(start[0] + d * c, start[1] + d * s, *heading)
                    })
                    .collect())
            }
            PathSpec::UTurn {
                start,
                heading,
                lead_in,
                radius,
                lead_out,
                spacing,
                starboard,
            } => {
                if !(*radius > 0.0 && *lead_in >= 0.0 && *lead_out >= 0.0) {
                    return Err(Error::Config("invalid u-turn geometry".into()));
                }
                let total = lead_in + PI * radius + lead_out;
                check_spacing(*spacing, total)?;
                let n = (total / spacing).round() as usize;
                let side = if *starboard { 1.0 } else { -1.0 };
                let (s, c) = heading.sin_cos();
                // Unit normal towards the inside of the turn.
                let (nx, ny) = (-s * side, c * side);
                let corner = [start[0] + lead_in * c, start[1] + lead_in * s];
                let centre = [corner[0] + radius * nx, corner[1] + radius * ny];
                Ok((0..=n)
                    .map(|k| {
                        let d = total * k as f64 / n as f64;
                        if d <= *lead_in {
                            Pose::new(start[0] + d * c, start[1] + d * s, *heading)
                        } else if d <= lead_in + PI * radius {
                            let phi = (d - lead_in) / radius;
                            let (sp, cp) = phi.sin_cos();
                            // Rotate the centre-to-corner vector by phi.
                            let (rx, ry) = (corner[0] - centre[0], corner[1] - centre[1]);
                            let (rx2, ry2) = (rx * cp - side * ry * sp, side * rx * sp + ry * cp);
                            Pose::new(centre[0] + rx2, centre[1] + ry2, heading + side * phi)
                        } else {
                            let e = d - lead_in - PI * radius;
                            let ex = corner[0] + 2.0 * radius * nx;
                            let ey = corner[1] + 2.0 * radius * ny;
                            Pose::new(ex - e * c, ey - e * s, heading + side * PI)
                        }
                    })
                    .collect())
            }
        }
    }
}

fn check_spacing(spacing: f64, length: f64) -> Result<()> {
    if spacing > 0.0 && length > 0.0 && spacing <= length {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "path spacing {spacing} must be in (0, {length}]"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialState {
    pub pose: Pose,
    pub velocities: Velocities,
}

/// Everything a scenario run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub name: String,
    /// Seed for sensor noise. `with_seed` also reseeds the gusts.
    pub seed: u64,
    /// Control update period (s).
    pub dt_control: f64,
    /// Integration step (s); must divide `dt_control`.
    pub dt_sim: f64,
    /// Hard stop on simulated time (s).
    pub max_duration: f64,
    /// Length of the position-keeping stage (s).
    pub keeping_duration: f64,
    pub path: PathSpec,
    /// Waypoint lookahead in rows.
    pub delta_k: usize,
    pub waypoint_weight: [f64; 3],
    /// Row index of the receiving (switching) point.
    pub receiving_index: usize,
    /// Proximity to the receiving point that hands over to the positioning
    /// controller (m).
    pub receiving_radius: f64,
    /// Distance to the final waypoint required to start keeping (m).
    pub final_radius: f64,
    /// Planar speed required to start keeping (m/s).
    pub stop_speed: f64,
    /// Tail of the keeping stage used for the settled-error metric (s).
    pub settle_window: f64,
    /// Deviation a gust pulse must decay below before the next one (m).
    pub reconverge_radius: f64,
    /// `[x_min, x_max, y_min, y_max]`; default is the path box widened by
    /// three ship lengths.
    pub bounds: Option<[f64; 4]>,
    pub start_stage: Stage,
    pub initial: InitialState,
    /// Force-data CSV; the embedded CFD table is used when absent.
    pub force_data: Option<PathBuf>,
    pub bow: BowThrusterModel,
    pub gains: PidGains,
    pub force_limits: ForceLimits,
    pub transition_limits: ActuatorLimits,
    pub vtps_limits: ActuatorLimits,
    pub los: LosParams,
    pub vessel: VesselParams,
    pub gust: GustModel,
    pub sensor: SensorNoise,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        scenario_a()
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    /// Loads a TOML config. A relative waypoint file is resolved against
    /// the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let PathSpec::File { file } = &mut cfg.path {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        if let Some(file) = &mut cfg.force_data {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        Ok(cfg)
    }

    /// Sets the run seed and reseeds the gust pulses from it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.gust.seed = seed;
        self
    }

    pub fn with_gusts(mut self, gust: GustModel) -> Self {
        self.gust = gust;
        self
    }

    pub fn calm(mut self) -> Self {
        self.gust = GustModel {
            seed: self.gust.seed,
            ..GustModel::calm()
        };
        self
    }

    pub fn substeps(&self) -> usize {
        (self.dt_control / self.dt_sim).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.dt_control > 0.0 && self.dt_sim > 0.0) {
            return bad("time steps must be > 0");
        }
        let n = self.dt_control / self.dt_sim;
        if n < 1.0 || (n - n.round()).abs() > 1e-9 {
            return bad("dt_sim must divide dt_control");
        }
        if !(self.receiving_radius > 0.0 && self.final_radius > 0.0) {
            return bad("radii must be > 0");
        }
        if !(self.keeping_duration >= 0.0 && self.max_duration > 0.0 && self.settle_window >= 0.0) {
            return bad("durations must be >= 0");
        }
        if !(self.stop_speed > 0.0 && self.reconverge_radius > 0.0) {
            return bad("stop_speed and reconverge_radius must be > 0");
        }
        if self.delta_k == 0 {
            return bad("delta_k must be >= 1");
        }
        if !self.gains.is_valid() {
            return bad("PID gains must be finite and >= 0");
        }
        if let Some(file) = &self.force_data {
            if !file.exists() {
                return Err(Error::Config(format!(
                    "force data {} not found",
                    file.display()
                )));
            }
        }
        if let PathSpec::File { file } = &self.path {
            if !file.exists() {
                return Err(Error::Config(format!(
                    "waypoint file {} not found",
                    file.display()
                )));
            }
        }
        self.transition_limits.validate()?;
        self.vtps_limits.validate()?;
        self.vessel.validate()?;
        self.gust.validate()?;
        self.sensor.validate()?;
        Ok(())
    }

    /// Force model fitted to the configured force data.
    pub fn force_model(&self) -> Result<FullForceModel> {
        let samples = match &self.force_data {
            Some(path) => load_samples(path)?,
            None => cfd_forces(),
        };
        Ok(FullForceModel::new(fit_rudder_model(&samples)?, self.bow))
    }
}

/// Defaults shared by the shipped scenarios.
fn base(name: &str, path: PathSpec, receiving_index: usize) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        seed: 1,
        dt_control: 0.1,
        dt_sim: 0.02,
        max_duration: 1200.0,
        keeping_duration: 300.0,
        path,
        delta_k: 10,
        waypoint_weight: [1.0, 1.0, 0.0],
        receiving_index,
        receiving_radius: 1.5,
        final_radius: 0.1,
        stop_speed: 0.02,
        settle_window: 60.0,
        reconverge_radius: 0.05,
        bounds: None,
        start_stage: Stage::Transition,
        initial: InitialState {
            pose: Pose::new(0.0, 0.0, 0.0),
            velocities: Velocities::new(0.10, 0.0, 0.0),
        },
        force_data: None,
        bow: BowThrusterModel::default(),
        gains: PidGains::default(),
        force_limits: ForceLimits::default(),
        transition_limits: ActuatorLimits::transition(),
        vtps_limits: ActuatorLimits::vtps(),
        los: LosParams::default(),
        vessel: VesselParams::default(),
        gust: GustModel::calm(),
        sensor: SensorNoise::default(),
    }
}

/// Gust pulses used by the shipped scenarios.
pub fn default_gusts(seed: u64) -> GustModel {
    GustModel {
        mean_force: [0.0, 0.0],
        burst_amplitude: 1.2,
        burst_duration: 8.0,
        burst_interval: 120.0,
        lever_arm: 0.3,
        seed,
    }
}

const STRAIGHT_SPACING: f64 = 0.02;

fn straight(length: f64) -> PathSpec {
    PathSpec::Straight {
        start: [0.0, 0.0],
        heading: 0.0,
        length,
        spacing: STRAIGHT_SPACING,
    }
}

/// Straight approach at 10 rps throughout.
pub fn scenario_a() -> ScenarioConfig {
    let length = 30.0;
    let recv = ((length - 9.0) / STRAIGHT_SPACING).round() as usize;
    let mut cfg = base("a", straight(length), recv);
    cfg.initial.pose = Pose::new(0.0, 0.6, 0.0);
    cfg.keeping_duration = 600.0;
    cfg.max_duration = 1500.0;
    cfg.gust = GustModel {
        burst_amplitude: 0.6,
        ..default_gusts(cfg.seed)
    };
    cfg
}

/// Straight approach with a farther receiving point and 7 rps in the
/// transition stage, under gust pulses.
pub fn scenario_b() -> ScenarioConfig {
    let length = 24.0;
    let recv = ((length - 14.0) / STRAIGHT_SPACING).round() as usize;
    let mut cfg = base("b", straight(length), recv);
    cfg.transition_limits.n_prop = 7.0;
    cfg.initial.pose = Pose::new(0.0, -0.4, 0.05);
    cfg.gust = default_gusts(cfg.seed);
    cfg
}

/// U-turn docking: a half circle to starboard at crawl speed.
pub fn scenario_c() -> ScenarioConfig {
    let path = PathSpec::UTurn {
        start: [0.0, 0.0],
        heading: 0.0,
        lead_in: 22.0,
        radius: 3.0,
        lead_out: 3.0,
        spacing: 0.08,
        starboard: true,
    };
    let recv = (12.0f64 / 0.08).round() as usize;
    let mut cfg = base("c", path, recv);
    cfg.delta_k = 3;
    cfg.keeping_duration = 120.0;
    cfg.max_duration = 1500.0;
    cfg.gust = GustModel {
        burst_amplitude: 0.3,
        ..default_gusts(cfg.seed)
    };
    cfg
}

/// Positioning controller switched on at 0.37 m/s on a long straight path.
pub fn crash_stop() -> ScenarioConfig {
    let mut cfg = base("crash-stop", straight(20.0), 0);
    cfg.start_stage = Stage::Docking;
    cfg.initial.velocities = Velocities::new(0.37, 0.0, 0.0);
    cfg.max_duration = 90.0;
    cfg.keeping_duration = 0.0;
    cfg
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    match name.to_ascii_lowercase().as_str() {
        "a" => Some(scenario_a()),
        "b" => Some(scenario_b()),
        "c" => Some(scenario_c()),
        "crash-stop" | "crash_stop" => Some(crash_stop()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["a", "b", "c", "crash-stop"];

/// Heading of the U-turn lead-out relative to the lead-in.
pub const U_TURN_ANGLE: f64 = PI;
