//! Low-speed positioning for a single-propeller ship with twin VecTwin-style
//! rudders and a bow thruster.
//!
//! The crate covers the whole chain from force data to a closed-loop docking
//! run:
//!
//! - [`force_model`]: least-squares rudder force model, hover angle, bow
//!   thruster and scale conversion.
//! - [`allocation`]: required forces to actuator commands through `Z = T V`.
//! - [`controller`]: ship-frame PID with conditional integration.
//! - [`guidance`]: waypoint setpoints and line-of-sight steering.
//! - [`sim`]: a 3-DOF planar vessel with gusts and sensor noise.
//! - [`harness`]: scenarios, the mission state machine and CSV traces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod command;
pub mod controller;
pub mod error;
pub mod force_model;
pub mod guidance;
pub mod harness;
pub mod sim;

pub use error::{Error, Result};
