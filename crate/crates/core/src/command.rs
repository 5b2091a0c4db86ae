//! Actuator command and force vectors shared by the force model, the
//! allocator and the simulator.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Physical actuator command: port and starboard rudder angles (deg) and bow
/// thruster revolution (rps).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub delta_p: f64,
    pub delta_s: f64,
    pub n_b: f64,
}

impl ActuatorCommand {
    pub fn new(delta_p: f64, delta_s: f64, n_b: f64) -> Self {
        Self {
            delta_p,
            delta_s,
            n_b,
        }
    }
}

/// Hover-relative command: rudder angles measured from the hover angle (deg)
/// and the signed-square bow thruster variable `n_b * |n_b|` (rps²).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModifiedCommand {
    pub delta_p: f64,
    pub delta_s: f64,
    pub n_b_sq: f64,
}

impl ModifiedCommand {
    pub fn new(delta_p: f64, delta_s: f64, n_b_sq: f64) -> Self {
        Self {
            delta_p,
            delta_s,
            n_b_sq,
        }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.delta_p, self.delta_s, self.n_b_sq)
    }

    pub fn from_vector(u: &Vector3<f64>) -> Self {
        Self::new(u[0], u[1], u[2])
    }
}

/// Forces produced by the actuators before they are mapped to body axes:
/// rudder-propeller surge and sway force acting at the rudders, and the
/// lateral bow thruster force (all N).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorForces {
    pub x_ct: f64,
    pub y_ct: f64,
    pub y_b: f64,
}

impl ActuatorForces {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x_ct, self.y_ct, self.y_b)
    }

    pub fn from_vector(f: &Vector3<f64>) -> Self {
        Self {
            x_ct: f[0],
            y_ct: f[1],
            y_b: f[2],
        }
    }
}
