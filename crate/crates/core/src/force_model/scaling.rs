//! Dimensional scaling of the force model to other hulls.
//!
//! Forces are made dimensionless with `rho * A_R * u_R^2`, where the rudder
//! inflow speed is `u_R = k_x * sqrt(8 C_1 mu / pi) * n * D_P`. Because the
//! model is linear, moving it to another ship multiplies `V~` (and `C_B`) by
//! the ratio of the two denominators. The hover angle does not move, so the
//! intercept is rescaled along with the slopes.

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{BowThrusterModel, FullForceModel, RudderForceModel};
use crate::error::{Error, Result};

/// Rudder and propeller properties for the nondimensionalization. There are
/// no defaults; every value has to come from the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    /// Water density (kg/m³).
    pub rho: f64,
    /// Rudder sectional area (m²).
    pub a_r: f64,
    /// Inflow acceleration coefficient at the rudder.
    pub k_x: f64,
    /// Intercept of the K_T regression.
    pub c_1: f64,
    /// Propeller diameter over rudder height.
    pub mu: f64,
    /// Propeller diameter (m).
    pub d_p: f64,
    /// Propeller revolution (rps).
    pub n: f64,
}

impl ScalingParams {
    pub fn new(rho: f64, a_r: f64, k_x: f64, c_1: f64, mu: f64, d_p: f64, n: f64) -> Result<Self> {
        let p = Self {
            rho,
            a_r,
            k_x,
            c_1,
            mu,
            d_p,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho", self.rho),
            ("a_r", self.a_r),
            ("k_x", self.k_x),
            ("c_1", self.c_1),
            ("mu", self.mu),
            ("d_p", self.d_p),
            ("n", self.n),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "scaling parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `rho * A_R * u_R^2`.
    pub fn denominator(&self) -> f64 {
        let u_r = inflow_velocity(self);
        self.rho * self.a_r * u_r * u_r
    }
}

/// Longitudinal inflow velocity at the rudder (m/s).
pub fn inflow_velocity(p: &ScalingParams) -> f64 {
    p.k_x * (8.0 * p.c_1 * p.mu / PI).sqrt() * p.n * p.d_p
}

fn checked_denominator(p: &ScalingParams) -> Result<f64> {
    let d = p.denominator();
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::DegenerateScale(d))
    }
}

pub fn nondimensionalize(forces: &Vector2<f64>, p: &ScalingParams) -> Result<Vector2<f64>> {
    Ok(forces / checked_denominator(p)?)
}

pub fn redimensionalize(forces: &Vector2<f64>, p: &ScalingParams) -> Result<Vector2<f64>> {
    Ok(forces * checked_denominator(p)?)
}

/// Factor that carries forces from the `from` configuration to `to`.
pub fn scaling_factor(from: &ScalingParams, to: &ScalingParams) -> Result<f64> {
    Ok(checked_denominator(to)? / checked_denominator(from)?)
}

/// Multiplies the rudder slopes and the bow thruster coefficient by `factor`,
/// keeping the hover angle fixed.
pub fn scale_model(model: &FullForceModel, factor: f64) -> Result<FullForceModel> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Config(format!(
            "scale factor must be > 0, got {factor}"
        )));
    }
    let rudder =
        RudderForceModel::from_hover(model.rudder.v_tilde() * factor, *model.rudder.hover_angle())?;
    let bow = BowThrusterModel {
        c_b: model.bow.c_b * factor,
        n_max: model.bow.n_max,
    };
    Ok(FullForceModel::new(rudder, bow))
}
