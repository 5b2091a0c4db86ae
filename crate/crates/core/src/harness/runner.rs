//! The three-stage docking mission.
//!
//! 1. **Transition.** Line-of-sight steering with both rudders mirrored and
//!    the propeller at the transition revolution. Once the ship is within
//!    the receiving radius of the receiving waypoint the rudders slew to the
//!    hover angle (still labelled transition, bow thruster off).
//! 2. **Docking.** Entered when the rudders are inside the positioning
//!    ranges. The PID tracks the setpoint `delta_k` rows ahead of the
//!    nearest waypoint and the allocator turns the saturated force demand
//!    into actuator commands.
//! 3. **Keeping.** Entered when the final row is the standing setpoint, the
//!    ship is inside the final radius and slower than the stop speed. The
//!    setpoint is held at the final row for the keeping duration.
//!
//! The PID integral is reset on each stage change.

use std::fmt;

use nalgebra::Vector3;
use serde::Serialize;

use super::scenario::ScenarioConfig;
use super::trace::{Stage, TraceRecord};
use crate::allocation::{to_physical, ActuatorLimits, Allocator, RequiredForces, SaturationFlags};
use crate::command::ActuatorCommand;
use crate::controller::{pose_error, wrap_angle, BodyError, PidController, Pose};
use crate::error::{Error, Result};
use crate::guidance::{los_heading, WaypointDatabase};
use crate::sim::{step, Propulsion, Sensor, SimState};

/// Metrics of one run. Time values are seconds from the start of the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub seed: u64,
    /// Reached the end of the keeping duration within the time budget.
    pub completed: bool,
    pub duration: f64,
    pub docking_start: Option<f64>,
    pub keeping_start: Option<f64>,
    /// From docking start to keeping start.
    pub time_to_dock: Option<f64>,
    /// Furthest along-track travel past the final waypoint once it is the
    /// standing setpoint (m).
    pub overshoot: f64,
    pub overshoot_lpp: f64,
    /// Largest distance from the final waypoint while keeping (m).
    pub max_keeping_deviation: Option<f64>,
    pub max_keeping_deviation_lpp: Option<f64>,
    pub rms_keeping_error: Option<f64>,
    /// Largest distance from the final waypoint over the last
    /// `settle_window` seconds of keeping (m).
    pub settled_keeping_error: Option<f64>,
    /// Gust pulses during keeping that were checked for recovery.
    pub bursts_assessed: usize,
    /// Of those, pulses after which the ship did not return within the
    /// reconverge radius before the next pulse.
    pub unrecovered_bursts: usize,
    /// Net heading change over the run, unwrapped (rad).
    pub heading_change: f64,
    pub final_distance: f64,
    pub final_speed: f64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        writeln!(f, "scenario                  {}", self.scenario)?;
        writeln!(f, "seed                      {}", self.seed)?;
        writeln!(f, "completed                 {}", self.completed)?;
        writeln!(f, "duration_s                {:.1}", self.duration)?;
        writeln!(f, "docking_start_s           {}", opt(self.docking_start))?;
        writeln!(f, "keeping_start_s           {}", opt(self.keeping_start))?;
        writeln!(f, "time_to_dock_s            {}", opt(self.time_to_dock))?;
        writeln!(f, "overshoot_m               {:.4}", self.overshoot)?;
        writeln!(f, "overshoot_lpp             {:.4}", self.overshoot_lpp)?;
        writeln!(
            f,
            "max_keeping_deviation_m   {}",
            opt(self.max_keeping_deviation)
        )?;
        writeln!(
            f,
            "max_keeping_deviation_lpp {}",
            opt(self.max_keeping_deviation_lpp)
        )?;
        writeln!(
            f,
            "rms_keeping_error_m       {}",
            opt(self.rms_keeping_error)
        )?;
        writeln!(
            f,
            "settled_keeping_error_m   {}",
            opt(self.settled_keeping_error)
        )?;
        writeln!(
            f,
            "gust_recovery             {}/{}",
            self.bursts_assessed - self.unrecovered_bursts,
            self.bursts_assessed
        )?;
        writeln!(f, "heading_change_rad        {:.4}", self.heading_change)?;
        writeln!(f, "final_distance_m          {:.6}", self.final_distance)?;
        write!(f, "final_speed_m_s           {:.6}", self.final_speed)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub summary: Summary,
}

/// Runs a scenario to completion, to its time budget, or until the ship
/// leaves the bounding box.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let model = cfg.force_model()?;
    let layout = cfg.vessel.layout;
    let allocator = Allocator::new(&layout, &model)?;
    let rows = cfg.path.waypoints()?;
    let db = WaypointDatabase::with_weight(rows, cfg.delta_k, cfg.waypoint_weight)?;
    if cfg.receiving_index >= db.len() {
        return Err(Error::Config(format!(
            "receiving_index {} outside {} waypoints",
            cfg.receiving_index,
            db.len()
        )));
    }
    let receiving = db.rows()[cfg.receiving_index];
    let final_pose = *db.final_pose();
    let bounds = cfg
        .bounds
        .unwrap_or_else(|| default_bounds(db.rows(), cfg.vessel.l_pp));

    let dt = cfg.dt_control;
    let substeps = cfg.substeps();
    let hover = *model.hover_angle();
    let mut state = SimState {
        eta: cfg.initial.pose,
        v: cfg.initial.velocities,
        actuators: match cfg.start_stage {
            Stage::Transition => ActuatorCommand::default(),
            _ => ActuatorCommand::new(hover[0], hover[1], 0.0),
        },
        t: 0.0,
    };
    let mut sensor = Sensor::new(cfg.sensor, cfg.seed);
    let mut pid = PidController::new(cfg.gains);
    let mut sat = SaturationFlags::default();
    let mut stage = cfg.start_stage;
    let mut handover = false;
    let mut docking_start = (stage >= Stage::Docking).then_some(0.0);
    let mut keeping_start = (stage == Stage::Keeping).then_some(0.0);
    let mut completed = false;
    let mut standing_from = None;

    let max_steps = (cfg.max_duration / dt).round() as usize;
    let mut trace = Vec::with_capacity(max_steps.min(1 << 20));

    for k in 0..max_steps {
        let t = k as f64 * dt;
        state.t = t;
        let (pose, vel) = sensor.read(&state, dt);

        if stage == Stage::Transition {
            if !handover && pose.distance_to(&receiving) < cfg.receiving_radius {
                handover = true;
            }
            if handover && cfg.vtps_limits.contains(&state.actuators) {
                stage = Stage::Docking;
                pid.reset(t);
                sat = SaturationFlags::default();
                docking_start = Some(t);
            }
        }
        let setpoint_index = db.desired_index(&pose);
        if stage.is_positioning() && setpoint_index == db.len() - 1 {
            standing_from.get_or_insert(trace.len());
        }
        if stage == Stage::Docking
            && setpoint_index == db.len() - 1
            && pose.distance_to(&final_pose) < cfg.final_radius
            && vel.planar_speed() < cfg.stop_speed
        {
            stage = Stage::Keeping;
            pid.reset(t);
            sat = SaturationFlags::default();
            keeping_start = Some(t);
        }
        if let Some(ks) = keeping_start {
            if t - ks >= cfg.keeping_duration - 1e-9 {
                completed = true;
                break;
            }
        }

        let (cmd, f_req, e, propulsion) = match stage {
            Stage::Transition => {
                let target = if handover {
                    [hover[0], hover[1]]
                } else {
                    let psi_des = los_heading(&pose, &db, &cfg.los);
                    let delta = cfg.los.rudder_command(psi_des, &pose, vel.r);
                    [delta, delta]
                };
                let lim = &cfg.transition_limits;
                let [delta_p, delta_s] = lim.limit_rudders(
                    target,
                    [state.actuators.delta_p, state.actuators.delta_s],
                    dt,
                );
                let n_b = 0.0f64.clamp(lim.n_b[0], lim.n_b[1]);
                (
                    ActuatorCommand::new(delta_p, delta_s, n_b),
                    RequiredForces::default(),
                    pose_error(&pose, &receiving),
                    Propulsion::Transition { n_prop: lim.n_prop },
                )
            }
            Stage::Docking | Stage::Keeping => {
                let target = if stage == Stage::Keeping {
                    final_pose
                } else {
                    db.rows()[setpoint_index]
                };
                let e = pose_error(&pose, &target);
                let raw = pid.step(&e, &vel, dt, &sat);
                let (f_req, flags) = cfg.force_limits.saturate(&raw);
                sat = flags;
                let u = allocator.allocate(&f_req);
                let cmd = to_physical(&u, &model, &cfg.vtps_limits, &state.actuators, dt);
                (cmd, f_req, e, Propulsion::Positioning)
            }
        };

        trace.push(record(t, &state, &cmd, &f_req, &e, stage));

        state.actuators = cmd;
        for _ in 0..substeps {
            state = step(
                &state,
                &model,
                &layout,
                &cfg.vessel,
                &cfg.gust,
                propulsion,
                cfg.dt_sim,
            )?;
        }
        let p = &state.eta;
        if p.x0 < bounds[0] || p.x0 > bounds[1] || p.y0 < bounds[2] || p.y0 > bounds[3] {
            return Err(Error::DivergedRun {
                t: state.t,
                x0: p.x0,
                y0: p.y0,
            });
        }
    }

    let stages = StageTimes {
        docking_start,
        keeping_start,
        standing_from,
    };
    let summary = summarize(cfg, &db, &trace, completed, &stages);
    Ok(RunOutput { trace, summary })
}

fn record(
    t: f64,
    state: &SimState,
    cmd: &ActuatorCommand,
    f: &RequiredForces,
    e: &BodyError,
    stage: Stage,
) -> TraceRecord {
    TraceRecord {
        t,
        x0: state.eta.x0,
        y0: state.eta.y0,
        psi: state.eta.psi,
        u: state.v.u,
        v: state.v.v,
        r: state.v.r,
        delta_p: cmd.delta_p,
        delta_s: cmd.delta_s,
        n_b: cmd.n_b,
        x_req: f.x_req,
        y_req: f.y_req,
        n_req: f.n_req,
        e_x: e.x_d,
        e_y: e.y_d,
        e_psi: e.psi_d,
        stage,
    }
}

/// Path bounding box widened by three ship lengths.
pub fn default_bounds(rows: &[Pose], l_pp: f64) -> [f64; 4] {
    let margin = 3.0 * l_pp;
    let mut b = [
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    ];
    for p in rows {
        b[0] = b[0].min(p.x0);
        b[1] = b[1].max(p.x0);
        b[2] = b[2].min(p.y0);
        b[3] = b[3].max(p.y0);
    }
    [b[0] - margin, b[1] + margin, b[2] - margin, b[3] + margin]
}

/// Net heading change along a trace with each step unwrapped.
pub fn heading_change(trace: &[TraceRecord]) -> f64 {
    trace
        .windows(2)
        .map(|w| wrap_angle(w[1].psi - w[0].psi))
        .sum()
}

struct StageTimes {
    docking_start: Option<f64>,
    keeping_start: Option<f64>,
    /// First record whose setpoint was the final row.
    standing_from: Option<usize>,
}

fn summarize(
    cfg: &ScenarioConfig,
    db: &WaypointDatabase,
    trace: &[TraceRecord],
    completed: bool,
    stages: &StageTimes,
) -> Summary {
    let StageTimes {
        docking_start,
        keeping_start,
        standing_from,
    } = *stages;
    let l_pp = cfg.vessel.l_pp;
    let fin = *db.final_pose();
    let dist = |r: &TraceRecord| (r.x0 - fin.x0).hypot(r.y0 - fin.y0);

    let dir = final_direction(db.rows()).unwrap_or((fin.psi.cos(), fin.psi.sin()));
    let overshoot = trace[standing_from.unwrap_or(trace.len())..]
        .iter()
        .map(|r| (r.x0 - fin.x0) * dir.0 + (r.y0 - fin.y0) * dir.1)
        .fold(0.0, f64::max);

    let keeping: Vec<&TraceRecord> = trace.iter().filter(|r| r.stage == Stage::Keeping).collect();
    let (max_dev, rms, settled) = if keeping.is_empty() {
        (None, None, None)
    } else {
        let max = keeping.iter().map(|r| dist(r)).fold(0.0, f64::max);
        let ms = keeping.iter().map(|r| dist(r).powi(2)).sum::<f64>() / keeping.len() as f64;
        let end = keeping.last().map_or(0.0, |r| r.t);
        let settled = keeping
            .iter()
            .filter(|r| r.t >= end - cfg.settle_window)
            .map(|r| dist(r))
            .fold(0.0, f64::max);
        (Some(max), Some(ms.sqrt()), Some(settled))
    };

    let (assessed, unrecovered) = match (keeping.first(), keeping.last()) {
        (Some(first), Some(last)) => burst_recovery(cfg, &keeping, first.t, last.t, dist),
        _ => (0, 0),
    };

    let last = trace.last();
    Summary {
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        completed,
        duration: last.map_or(0.0, |r| r.t + cfg.dt_control),
        docking_start,
        keeping_start,
        time_to_dock: docking_start.zip(keeping_start).map(|(d, k)| k - d),
        overshoot,
        overshoot_lpp: overshoot / l_pp,
        max_keeping_deviation: max_dev,
        max_keeping_deviation_lpp: max_dev.map(|d| d / l_pp),
        rms_keeping_error: rms,
        settled_keeping_error: settled,
        bursts_assessed: assessed,
        unrecovered_bursts: unrecovered,
        heading_change: heading_change(trace),
        final_distance: last.map_or(f64::NAN, dist),
        final_speed: last.map_or(f64::NAN, |r| r.planar_speed()),
    }
}

/// Counts keeping-stage gust pulses and those the ship did not recover
/// from. A pulse counts as recovered when the deviation drops below the
/// reconverge radius after it ends and before the next pulse starts (or
/// the run ends). Pulses ending less than `settle_window` before the end
/// are not assessed.
fn burst_recovery(
    cfg: &ScenarioConfig,
    keeping: &[&TraceRecord],
    start: f64,
    end: f64,
    dist: impl Fn(&TraceRecord) -> f64,
) -> (usize, usize) {
    if cfg.gust.is_calm() {
        return (0, 0);
    }
    let bursts = cfg
        .gust
        .bursts_between(start, end + cfg.gust.burst_interval);
    let mut assessed = 0;
    let mut unrecovered = 0;
    for (k, b) in bursts.iter().enumerate() {
        if b.start < start || b.end > end - cfg.settle_window {
            continue;
        }
        let window_end = bursts.get(k + 1).map_or(end, |n| n.start.min(end));
        assessed += 1;
        let recovered = keeping
            .iter()
            .filter(|r| r.t >= b.end && r.t <= window_end)
            .any(|r| dist(r) < cfg.reconverge_radius);
        if !recovered {
            unrecovered += 1;
        }
    }
    (assessed, unrecovered)
}

fn final_direction(rows: &[Pose]) -> Option<(f64, f64)> {
    rows.windows(2).rev().find_map(|w| {
        let (dx, dy) = (w[1].x0 - w[0].x0, w[1].y0 - w[0].y0);
        let len = dx.hypot(dy);
        (len > 0.0).then(|| (dx / len, dy / len))
    })
}

/// Violations found by [`audit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Audit {
    /// Records whose actuator command lies outside the stage's ranges.
    pub range: usize,
    /// Records whose rudders moved faster than the slew rate.
    pub rate: usize,
    /// Records whose required forces exceed the saturation limits.
    pub force: usize,
    /// Records whose stage is earlier than the previous one.
    pub stage_order: usize,
    /// Records whose timestamp is not `k * dt_control`.
    pub timing: usize,
}

impl Audit {
    pub fn is_clean(&self) -> bool {
        *self == Audit::default()
    }
}

/// Checks every record against the limits active in its stage.
pub fn audit(cfg: &ScenarioConfig, trace: &[TraceRecord]) -> Audit {
    const TOL: f64 = 1e-9;
    let limits = |s: Stage| -> &ActuatorLimits {
        if s.is_positioning() {
            &cfg.vtps_limits
        } else {
            &cfg.transition_limits
        }
    };
    let widened = |l: &ActuatorLimits| ActuatorLimits {
        delta_p: [l.delta_p[0] - TOL, l.delta_p[1] + TOL],
        delta_s: [l.delta_s[0] - TOL, l.delta_s[1] + TOL],
        n_b: [l.n_b[0] - TOL, l.n_b[1] + TOL],
        ..*l
    };
    let mut a = Audit::default();
    let mut prev_rudders = if cfg.start_stage.is_positioning() {
        cfg.force_model()
            .map(|m| {
                let h = *m.hover_angle();
                [h[0], h[1]]
            })
            .unwrap_or([0.0; 2])
    } else {
        [0.0; 2]
    };
    let mut prev_stage = cfg.start_stage;
    for (k, r) in trace.iter().enumerate() {
        let lim = limits(r.stage);
        let cmd = ActuatorCommand::new(r.delta_p, r.delta_s, r.n_b);
        if !widened(lim).contains(&cmd) {
            a.range += 1;
        }
        let max_step = lim.rudder_rate * cfg.dt_control + TOL;
        if (r.delta_p - prev_rudders[0]).abs() > max_step
            || (r.delta_s - prev_rudders[1]).abs() > max_step
        {
            a.rate += 1;
        }
        let f = RequiredForces::new(r.x_req, r.y_req, r.n_req);
        let fl = &cfg.force_limits;
        let inside = |x: f64, b: [f64; 2]| x >= b[0] - TOL && x <= b[1] + TOL;
        if !(inside(f.x_req, fl.x) && inside(f.y_req, fl.y) && inside(f.n_req, fl.n)) {
            a.force += 1;
        }
        if r.stage < prev_stage {
            a.stage_order += 1;
        }
        if r.t != k as f64 * cfg.dt_control {
            a.timing += 1;
        }
        prev_rudders = [r.delta_p, r.delta_s];
        prev_stage = r.stage;
    }
    a
}

/// Body-frame required force vector of a record.
pub fn required_forces(r: &TraceRecord) -> Vector3<f64> {
    Vector3::new(r.x_req, r.y_req, r.n_req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::{crash_stop, scenario_a};

    fn short_a() -> ScenarioConfig {
        let mut cfg = scenario_a().calm();
        cfg.max_duration = 30.0;
        cfg
    }

    #[test]
    fn trace_timing_and_stage_order() {
        let out = run_scenario(&short_a()).unwrap();
        assert_eq!(out.trace.len(), 300);
        assert!(audit(&short_a(), &out.trace).is_clean());
        assert!(!out.summary.completed);
        assert_eq!(out.trace[0].stage, Stage::Transition);
    }

    #[test]
    fn same_config_same_summary() {
        let a = run_scenario(&short_a()).unwrap();
        let b = run_scenario(&short_a()).unwrap();
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn crash_stop_starts_in_docking() {
        let mut cfg = crash_stop();
        cfg.max_duration = 5.0;
        let out = run_scenario(&cfg).unwrap();
        assert!(out.trace.iter().all(|r| r.stage == Stage::Docking));
        assert_eq!(out.summary.docking_start, Some(0.0));
        assert!(out.trace[0].x_req < 0.0);
    }

    #[test]
    fn leaving_the_box_is_an_error() {
        let mut cfg = short_a();
        cfg.bounds = Some([-1.0, 1.0, -1.0, 1.0]);
        assert!(matches!(run_scenario(&cfg), Err(Error::DivergedRun { .. })));
    }

    #[test]
    fn bad_receiving_index_is_a_config_error() {
        let mut cfg = short_a();
        cfg.receiving_index = 1_000_000;
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn heading_change_unwraps() {
        let mk = |psi: f64| TraceRecord {
            psi,
            ..record(
                0.0,
                &SimState::default(),
                &ActuatorCommand::default(),
                &RequiredForces::default(),
                &BodyError::default(),
                Stage::Docking,
            )
        };
        let trace: Vec<_> = [0.0, 1.5, 3.0, -3.0, -1.5].iter().map(|p| mk(*p)).collect();
        let total = heading_change(&trace);
        assert!((total - (2.0 * std::f64::consts::PI - 1.5)).abs() < 1e-12);
    }
}
