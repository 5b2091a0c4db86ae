//! Planar 3-DOF vessel simulator.
//!
//! The hydrodynamics are a closure of our own: a diagonal inertia (mass plus
//! added mass) per axis with linear and quadratic damping,
//!
//! ```text
//! m_k * dv_k/dt = tau_k - (d_l,k + d_q,k |v_k|) v_k
//! d(eta)/dt     = R(psi) v
//! ```
//!
//! integrated with explicit Euler. The default coefficients are calibrated
//! so the 3 m model accelerates from 0.10 to 0.37 m/s in well under two
//! minutes during the transition stage, and crash-stops from 0.37 m/s to a
//! crawl within roughly 40 s once the positioning controller takes over.
//! They are not identified hydrodynamics.

use std::f64::consts::TAU;

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::allocation::ActuatorLayout;
use crate::command::{ActuatorCommand, ActuatorForces};
use crate::controller::{rotation, wrap_angle, Pose, Velocities};
use crate::error::{Error, Result};
use crate::force_model::{signed_square, FullForceModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselParams {
    /// Effective inertia per axis: surge and sway mass (kg), yaw inertia
    /// (kg m²), each including added mass.
    pub inertia: [f64; 3],
    pub linear_damping: [f64; 3],
    pub quadratic_damping: [f64; 3],
    /// Length between perpendiculars (m).
    pub l_pp: f64,
    pub layout: ActuatorLayout,
    /// Net surge drive with centred rudders at `reference_revolution` (N).
    /// Scales with the square of the propeller revolution.
    pub prop_thrust_at_zero_rudder: f64,
    pub reference_revolution: f64,
    /// Lateral force per degree of mirrored rudder in the transition stage
    /// (N/deg).
    pub transition_rudder_gain: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            inertia: [180.0, 260.0, 120.0],
            linear_damping: [1.0, 8.0, 10.0],
            quadratic_damping: [8.0, 40.0, 20.0],
            l_pp: 3.0,
            layout: ActuatorLayout::default(),
            prop_thrust_at_zero_rudder: 2.07,
            reference_revolution: 10.0,
            transition_rudder_gain: 0.02,
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<()> {
        if self.inertia.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Config(format!(
                "inertia must be > 0: {:?}",
                self.inertia
            )));
        }
        let damping = self.linear_damping.iter().chain(&self.quadratic_damping);
        if damping.clone().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::Config("damping must be >= 0".into()));
        }
        if !(self.l_pp > 0.0) {
            return Err(Error::Config("l_pp must be > 0".into()));
        }
        if self.layout.x_fr == self.layout.x_b {
            return Err(Error::Config("rudders and bow thruster coincide".into()));
        }
        if !(self.reference_revolution > 0.0) {
            return Err(Error::Config("reference_revolution must be > 0".into()));
        }
        Ok(())
    }

    /// Hydrodynamic damping force per axis (opposes motion).
    pub fn damping(&self, v: &Velocities) -> Vector3<f64> {
        let v = v.as_vector();
        Vector3::from_fn(|k, _| {
            -(self.linear_damping[k] + self.quadratic_damping[k] * v[k].abs()) * v[k]
        })
    }

    /// Kinetic energy of the effective inertias (J).
    pub fn kinetic_energy(&self, v: &Velocities) -> f64 {
        0.5 * (self.inertia[0] * v.u * v.u
            + self.inertia[1] * v.v * v.v
            + self.inertia[2] * v.r * v.r)
    }
}

/// How the rudder-propeller forces are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propulsion {
    /// Rudders used as conventional steering; the propeller drives the ship
    /// at `n_prop` rps.
    Transition { n_prop: f64 },
    /// Rudders around the hover angle; forces from the fitted force model.
    Positioning,
}

/// Seeded, piecewise-constant gust pulses in the earth frame.
///
/// Time is divided into slots of `burst_interval` seconds. Each slot holds
/// exactly one pulse starting at a random offset within its first half, with
/// a random direction and a magnitude between half and all of
/// `burst_amplitude`. The force at any instant is a pure function of the
/// seed and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GustModel {
    /// Steady force (N), earth frame.
    pub mean_force: [f64; 2],
    pub burst_amplitude: f64,
    pub burst_duration: f64,
    pub burst_interval: f64,
    /// Longitudinal position where the gust acts, from the centre of gravity
    /// (m). Produces a yaw moment from the lateral component.
    pub lever_arm: f64,
    pub seed: u64,
}

/// One gust pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub start: f64,
    pub end: f64,
    pub force: [f64; 2],
}

impl Default for GustModel {
    fn default() -> Self {
        Self::calm()
    }
}

impl GustModel {
    pub fn calm() -> Self {
        Self {
            mean_force: [0.0, 0.0],
            burst_amplitude: 0.0,
            burst_duration: 0.0,
            burst_interval: 100.0,
            lever_arm: 0.0,
            seed: 0,
        }
    }

    pub fn is_calm(&self) -> bool {
        self.mean_force == [0.0, 0.0] && (self.burst_amplitude == 0.0 || self.burst_duration == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.burst_amplitude >= 0.0 && self.burst_duration >= 0.0) {
            return Err(Error::Config(
                "gust amplitude and duration must be >= 0".into(),
            ));
        }
        if !(self.burst_interval > 0.0 && 2.0 * self.burst_duration <= self.burst_interval) {
            return Err(Error::Config(
                "gust burst_interval must be > 0 and at least twice burst_duration".into(),
            ));
        }
        if !self.mean_force.iter().all(|f| f.is_finite()) {
            return Err(Error::Config("non-finite mean gust force".into()));
        }
        Ok(())
    }

    /// The pulse scheduled in slot `k`.
    pub fn burst(&self, k: u64) -> Burst {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        let offset = rng.random_range(0.0..=0.5) * self.burst_interval;
        let dir = rng.random_range(0.0..TAU);
        let mag = self.burst_amplitude * rng.random_range(0.5..=1.0);
        let start = k as f64 * self.burst_interval + offset;
        Burst {
            start,
            end: start + self.burst_duration,
            force: [mag * dir.cos(), mag * dir.sin()],
        }
    }

    /// Pulses overlapping `[t0, t1)`.
    pub fn bursts_between(&self, t0: f64, t1: f64) -> Vec<Burst> {
        if self.burst_amplitude == 0.0 || self.burst_duration == 0.0 || t1 <= t0 {
            return Vec::new();
        }
        let first = (t0.max(0.0) / self.burst_interval).floor() as u64;
        let last = (t1 / self.burst_interval).floor() as u64;
        (first..=last)
            .map(|k| self.burst(k))
            .filter(|b| b.end > t0 && b.start < t1)
            .collect()
    }

    /// Earth-frame gust force at time `t` (N).
    pub fn force_at(&self, t: f64) -> Vector2<f64> {
        let mut f = Vector2::new(self.mean_force[0], self.mean_force[1]);
        if self.burst_amplitude > 0.0 && self.burst_duration > 0.0 && t >= 0.0 {
            let b = self.burst((t / self.burst_interval).floor() as u64);
            if t >= b.start && t < b.end {
                f += Vector2::new(b.force[0], b.force[1]);
            }
        }
        f
    }
}

/// Full simulator state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimState {
    pub eta: Pose,
    pub v: Velocities,
    pub actuators: ActuatorCommand,
    pub t: f64,
}

impl SimState {
    pub fn is_finite(&self) -> bool {
        [
            self.eta.x0,
            self.eta.y0,
            self.eta.psi,
            self.v.u,
            self.v.v,
            self.v.r,
            self.t,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

/// Actuator forces produced by the current actuator positions.
pub fn actuator_forces(
    actuators: &ActuatorCommand,
    model: &FullForceModel,
    params: &VesselParams,
    propulsion: Propulsion,
) -> ActuatorForces {
    let y_b = model.bow.c_b * signed_square(actuators.n_b);
    match propulsion {
        Propulsion::Positioning => {
            let f = model
                .rudder
                .rudder_forces(&Vector2::new(actuators.delta_p, actuators.delta_s));
            ActuatorForces {
                x_ct: f[0],
                y_ct: f[1],
                y_b,
            }
        }
        Propulsion::Transition { n_prop } => {
            let ratio = n_prop / params.reference_revolution;
            let mean_rudder = 0.5 * (actuators.delta_p + actuators.delta_s);
            ActuatorForces {
                x_ct: params.prop_thrust_at_zero_rudder * ratio * ratio,
                y_ct: -params.transition_rudder_gain * mean_rudder,
                y_b,
            }
        }
    }
}

/// Body-frame forces and moment from actuators, gust and damping.
pub fn body_forces(
    state: &SimState,
    model: &FullForceModel,
    layout: &ActuatorLayout,
    params: &VesselParams,
    gust: &GustModel,
    propulsion: Propulsion,
) -> Vector3<f64> {
    let fc = actuator_forces(&state.actuators, model, params, propulsion);
    let tau_act = layout.configuration_matrix() * fc.as_vector();
    let g = gust.force_at(state.t);
    let g_body = rotation(state.eta.psi).transpose() * Vector3::new(g[0], g[1], 0.0);
    let tau_gust = Vector3::new(g_body[0], g_body[1], g_body[1] * gust.lever_arm);
    tau_act + tau_gust + params.damping(&state.v)
}

/// Advances the state by one explicit Euler step of `dt` seconds.
pub fn step(
    state: &SimState,
    model: &FullForceModel,
    layout: &ActuatorLayout,
    params: &VesselParams,
    gust: &GustModel,
    propulsion: Propulsion,
    dt: f64,
) -> Result<SimState> {
    debug_assert!(dt > 0.0);
    let tau = body_forces(state, model, layout, params, gust, propulsion);
    let nu = state.v.as_vector();
    let acc = Vector3::from_fn(|k, _| tau[k] / params.inertia[k]);
    let eta_dot = rotation(state.eta.psi) * nu;

    let next = SimState {
        eta: Pose {
            x0: state.eta.x0 + dt * eta_dot[0],
            y0: state.eta.y0 + dt * eta_dot[1],
            psi: wrap_angle(state.eta.psi + dt * eta_dot[2]),
        },
        v: Velocities::from_vector(&(nu + dt * acc)),
        actuators: state.actuators,
        t: state.t + dt,
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFiniteState { t: next.t })
    }
}

/// Measurement noise and optional first-order low-pass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorNoise {
    /// Standard deviations for `[x0, y0, psi, u, v, r]`.
    pub std: [f64; 6],
    /// Low-pass time constant (s); `None` disables filtering.
    pub filter_time_constant: Option<f64>,
}

impl SensorNoise {
    pub fn validate(&self) -> Result<()> {
        if self.std.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Config("sensor noise std must be >= 0".into()));
        }
        if let Some(tau) = self.filter_time_constant {
            if !(tau > 0.0) {
                return Err(Error::Config("filter time constant must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Adds independent Gaussian noise to each measured channel.
pub fn sensor_read<R: Rng>(state: &SimState, std: &[f64; 6], rng: &mut R) -> (Pose, Velocities) {
    let truth = [
        state.eta.x0,
        state.eta.y0,
        state.eta.psi,
        state.v.u,
        state.v.v,
        state.v.r,
    ];
    let mut m = truth;
    for (k, s) in std.iter().enumerate() {
        if *s > 0.0 {
            m[k] += Normal::new(0.0, *s).expect("std validated").sample(rng);
        }
    }
    (
        Pose::new(m[0], m[1], m[2]),
        Velocities::new(m[3], m[4], m[5]),
    )
}

/// Stateful measurement chain: noise then optional low-pass.
#[derive(Debug, Clone)]
pub struct Sensor {
    noise: SensorNoise,
    rng: ChaCha8Rng,
    filtered: Option<[f64; 6]>,
}

impl Sensor {
    pub fn new(noise: SensorNoise, seed: u64) -> Self {
        Self {
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
            filtered: None,
        }
    }

    pub fn read(&mut self, state: &SimState, dt: f64) -> (Pose, Velocities) {
        let (pose, vel) = sensor_read(state, &self.noise.std, &mut self.rng);
        let Some(tau) = self.noise.filter_time_constant else {
            return (pose, vel);
        };
        let raw = [pose.x0, pose.y0, pose.psi, vel.u, vel.v, vel.r];
        let y = match self.filtered {
            None => raw,
            Some(prev) => {
                let alpha = 1.0 - (-dt / tau).exp();
                let mut y = prev;
                for k in 0..6 {
                    let diff = if k == 2 {
                        wrap_angle(raw[k] - prev[k])
                    } else {
                        raw[k] - prev[k]
                    };
                    y[k] = prev[k] + alpha * diff;
                }
                y[2] = wrap_angle(y[2]);
                y
            }
        };
        self.filtered = Some(y);
        (
            Pose::new(y[0], y[1], y[2]),
            Velocities::new(y[3], y[4], y[5]),
        )
    }
}
