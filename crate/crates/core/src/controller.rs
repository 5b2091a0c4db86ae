//! Decoupled PID on the ship-frame pose error.
//!
//! The earth-frame error `e0 = eta_d - eta` is rotated into the ship frame,
//! `e = R(psi)^T e0`, and each axis gets its own PID. The derivative term
//! acts on the measured velocities rather than on `de/dt`, so a jump in the
//! setpoint never produces a derivative kick.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::allocation::SaturationFlags;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Earth-frame pose: position of the centre of gravity (m) and yaw (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x0: f64,
    pub y0: f64,
    pub psi: f64,
}

/// Setpoints share the pose layout.
pub type DesiredPose = Pose;

impl Pose {
    /// Creates a pose with yaw wrapped to `(-pi, pi]`.
    pub fn new(x0: f64, y0: f64, psi: f64) -> Self {
        Self {
            x0,
            y0,
            psi: wrap_angle(psi),
        }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x0, self.y0, self.psi)
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x0 - other.x0).hypot(self.y0 - other.y0)
    }
}

/// Body-frame velocities: surge (m/s), sway (m/s), yaw rate (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocities {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl Velocities {
    pub fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn planar_speed(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// Pose error in the ship frame: desired surge offset (m), sway offset (m)
/// and yaw offset (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyError {
    pub x_d: f64,
    pub y_d: f64,
    pub psi_d: f64,
}

impl BodyError {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x_d, self.y_d, self.psi_d)
    }
}

/// Rotation from the ship frame to the earth frame about the vertical axis.
pub fn rotation(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `e = R(psi)^T (eta_d - eta)` with the yaw difference wrapped.
pub fn pose_error(eta: &Pose, eta_d: &DesiredPose) -> BodyError {
    let e0 = Vector3::new(
        eta_d.x0 - eta.x0,
        eta_d.y0 - eta.y0,
        wrap_angle(eta_d.psi - eta.psi),
    );
    let e = rotation(eta.psi).transpose() * e0;
    BodyError {
        x_d: e[0],
        y_d: e[1],
        psi_d: e[2],
    }
}

/// Diagonal PID gains per axis `[surge, sway, yaw]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub k_p: [f64; 3],
    pub k_i: [f64; 3],
    pub k_d: [f64; 3],
}

impl Default for PidGains {
    /// Gains tuned on the 3 m model in the experiment pond.
    fn default() -> Self {
        Self {
            k_p: [4.0, 4.0, 4.0],
            k_i: [0.01, 0.01, 0.001],
            k_d: [25.0, 25.0, 30.0],
        }
    }
}

impl PidGains {
    pub fn is_valid(&self) -> bool {
        self.k_p
            .iter()
            .chain(&self.k_i)
            .chain(&self.k_d)
            .all(|g| *g >= 0.0 && g.is_finite())
    }
}

/// Integrator state of the PID.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    /// Accumulated `integral of e dt` per axis.
    pub integral: [f64; 3],
    pub last_time: f64,
}

impl PidState {
    pub fn reset(&mut self, t: f64) {
        self.integral = [0.0; 3];
        self.last_time = t;
    }
}

/// One controller update. The integral of an axis is frozen while that axis
/// was saturated (conditional integration); otherwise it advances by
/// `e * dt` before the output is formed.
pub fn pid_step(
    gains: &PidGains,
    state: &PidState,
    e: &BodyError,
    v: &Velocities,
    dt: f64,
    sat: &SaturationFlags,
) -> (Vector3<f64>, PidState) {
    debug_assert!(dt > 0.0);
    let e = e.as_vector();
    let v = v.as_vector();
    let frozen = sat.as_array();
    let mut next = *state;
    let mut f = Vector3::zeros();
    for k in 0..3 {
        if !frozen[k] {
            next.integral[k] += e[k] * dt;
        }
        f[k] = gains.k_p[k] * e[k] + gains.k_i[k] * next.integral[k] - gains.k_d[k] * v[k];
    }
    next.last_time = state.last_time + dt;
    (f, next)
}

/// PID gains bundled with their state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidController {
    pub gains: PidGains,
    pub state: PidState,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            state: PidState::default(),
        }
    }

    pub fn step(
        &mut self,
        e: &BodyError,
        v: &Velocities,
        dt: f64,
        sat: &SaturationFlags,
    ) -> Vector3<f64> {
        let (f, next) = pid_step(&self.gains, &self.state, e, v, dt, sat);
        self.state = next;
        f
    }

    pub fn reset(&mut self, t: f64) {
        self.state.reset(t);
    }
}
