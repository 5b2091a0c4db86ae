//! Command-to-force relationship of the twin-rudder / bow-thruster ship.
//!
//! The rudder-propeller-hull force at bollard pull is modelled as a plane in
//! the two rudder angles, fitted by ordinary least squares:
//!
//! ```text
//! f_CT = V~ * delta + f_itcp            (fit)
//! delta_h = -V~^-1 * f_itcp             (hover angle, f_CT = 0)
//! f_CT = V~ * (delta - delta_h)         (hover-relative form used downstream)
//! ```
//!
//! Angles are degrees throughout this module; coefficients are N/deg.

mod data;
mod scaling;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::command::{ActuatorForces, ModifiedCommand};
use crate::error::{Error, Result};

pub use data::{cfd_forces, load_samples, parse_samples, CfdSample, CFD_FORCES_CSV};
pub use scaling::{
    inflow_velocity, nondimensionalize, redimensionalize, scale_model, scaling_factor,
    ScalingParams,
};

/// Largest accepted condition number of the normal-equation matrix.
pub const MAX_CONDITION: f64 = 1e8;

/// Below this |det V~| the fitted rudder map is treated as singular.
const MIN_DET: f64 = 1e-12;

/// Linear rudder force model around the hover angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RudderForceModel {
    v_tilde: Matrix2<f64>,
    f_itcp: Vector2<f64>,
    hover_angle: Vector2<f64>,
}

impl RudderForceModel {
    /// Builds a model from its slope matrix and intercept, solving for the
    /// hover angle.
    pub fn new(v_tilde: Matrix2<f64>, f_itcp: Vector2<f64>) -> Result<Self> {
        let det = v_tilde.determinant();
        if !det.is_finite() || det.abs() < MIN_DET {
            return Err(Error::SingularModel { det });
        }
        let hover_angle = -(v_tilde
            .lu()
            .solve(&f_itcp)
            .ok_or(Error::SingularModel { det })?);
        Ok(Self {
            v_tilde,
            f_itcp,
            hover_angle,
        })
    }

    /// Builds a model from its slope matrix and a known hover angle; the
    /// intercept follows as `-V~ * hover`.
    pub fn from_hover(v_tilde: Matrix2<f64>, hover_angle: Vector2<f64>) -> Result<Self> {
        let det = v_tilde.determinant();
        if !det.is_finite() || det.abs() < MIN_DET {
            return Err(Error::SingularModel { det });
        }
        Ok(Self {
            v_tilde,
            f_itcp: -(v_tilde * hover_angle),
            hover_angle,
        })
    }

    pub fn v_tilde(&self) -> &Matrix2<f64> {
        &self.v_tilde
    }

    pub fn f_itcp(&self) -> &Vector2<f64> {
        &self.f_itcp
    }

    /// Hover rudder angle `(delta_ph, delta_sh)` in degrees.
    pub fn hover_angle(&self) -> &Vector2<f64> {
        &self.hover_angle
    }

    /// Surge and sway force `(X_CT, Y_CT)` for a physical rudder pair.
    ///
    /// No clamping is applied here; the model is only trusted inside the
    /// docking rudder ranges.
    pub fn rudder_forces(&self, delta: &Vector2<f64>) -> Vector2<f64> {
        self.v_tilde * (delta - self.hover_angle)
    }

    /// Same as [`rudder_forces`](Self::rudder_forces) but taking the
    /// hover-relative angles directly.
    pub fn forces_from_relative(&self, delta_rel: &Vector2<f64>) -> Vector2<f64> {
        self.v_tilde * delta_rel
    }
}

/// Fits the rudder force plane to CFD (or tank) samples.
pub fn fit_rudder_model(samples: &[CfdSample]) -> Result<RudderForceModel> {
    let mut xtx = Matrix3::<f64>::zeros();
    let mut xty_x = Vector3::<f64>::zeros();
    let mut xty_y = Vector3::<f64>::zeros();
    for s in samples {
        let row = Vector3::new(s.delta_p, s.delta_s, 1.0);
        xtx += row * row.transpose();
        xty_x += row * s.x_ct;
        xty_y += row * s.y_ct;
    }

    let sv = xtx.singular_values();
    let condition = sv.max() / sv.min();
    if samples.len() < 3 || !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::RankDeficientDesign {
            condition: if samples.len() < 3 {
                f64::INFINITY
            } else {
                condition
            },
        });
    }
    let chol = xtx
        .cholesky()
        .ok_or(Error::RankDeficientDesign { condition })?;
    let beta_x = chol.solve(&xty_x);
    let beta_y = chol.solve(&xty_y);

    let v_tilde = Matrix2::new(beta_x[0], beta_x[1], beta_y[0], beta_y[1]);
    let f_itcp = Vector2::new(beta_x[2], beta_y[2]);
    RudderForceModel::new(v_tilde, f_itcp)
}

/// Per-sample and aggregate absolute residuals of a model against data.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearityReport {
    /// `|f_observed - f_model|` for each sample, `[x, y]`.
    pub per_sample: Vec<[f64; 2]>,
    pub max: [f64; 2],
    pub mean: [f64; 2],
}

/// Compares a fitted model with (possibly wider-range) samples. Returns
/// `None` for an empty sample list.
pub fn linearity_diagnostic(
    model: &RudderForceModel,
    samples: &[CfdSample],
) -> Option<LinearityReport> {
    if samples.is_empty() {
        return None;
    }
    let per_sample: Vec<[f64; 2]> = samples
        .iter()
        .map(|s| {
            let pred = model.rudder_forces(&Vector2::new(s.delta_p, s.delta_s));
            [(s.x_ct - pred[0]).abs(), (s.y_ct - pred[1]).abs()]
        })
        .collect();
    let n = per_sample.len() as f64;
    let mut max = [0.0f64; 2];
    let mut sum = [0.0f64; 2];
    for r in &per_sample {
        for k in 0..2 {
            max[k] = max[k].max(r[k]);
            sum[k] += r[k];
        }
    }
    Some(LinearityReport {
        per_sample,
        max,
        mean: [sum[0] / n, sum[1] / n],
    })
}

/// Bow thruster with the "forced linearization" `Y_B = C_B * n_B * |n_B|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowThrusterModel {
    /// Force coefficient (N s²). Absorbs water density, diameter and K_T.
    pub c_b: f64,
    /// Revolution limit (rps).
    pub n_max: f64,
}

impl Default for BowThrusterModel {
    /// Full thrust at 27 rps equals 1.0 N, the sway force saturation.
    fn default() -> Self {
        Self {
            c_b: 1.0 / 729.0,
            n_max: 27.0,
        }
    }
}

impl BowThrusterModel {
    pub fn new(c_b: f64, n_max: f64) -> Result<Self> {
        if !(c_b > 0.0 && c_b.is_finite()) {
            return Err(Error::Config(format!(
                "bow thruster c_b must be > 0, got {c_b}"
            )));
        }
        if !(n_max > 0.0 && n_max.is_finite()) {
            return Err(Error::Config(format!(
                "bow thruster n_max must be > 0, got {n_max}"
            )));
        }
        Ok(Self { c_b, n_max })
    }

    /// Lateral force for a revolution in `[-n_max, n_max]`.
    pub fn force(&self, n_b: f64) -> Result<f64> {
        if !(n_b.abs() <= self.n_max) {
            return Err(Error::RangeViolation {
                what: "n_b",
                value: n_b,
                min: -self.n_max,
                max: self.n_max,
            });
        }
        Ok(self.c_b * signed_square(n_b))
    }
}

pub fn signed_square(x: f64) -> f64 {
    x * x.abs()
}

/// Inverse of [`signed_square`].
pub fn signed_sqrt(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

/// Rudder model and bow thruster combined into the 3x3 coefficient matrix
///
/// ```text
///     | V11 V12  0  |
/// V = | V21 V22  0  |
///     |  0   0  C_B |
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullForceModel {
    pub rudder: RudderForceModel,
    pub bow: BowThrusterModel,
}

impl FullForceModel {
    pub fn new(rudder: RudderForceModel, bow: BowThrusterModel) -> Self {
        Self { rudder, bow }
    }

    /// Model fitted to the embedded CFD table with the default bow thruster.
    pub fn reference() -> Self {
        let rudder = fit_rudder_model(&cfd_forces()).expect("embedded CFD table is well posed");
        Self::new(rudder, BowThrusterModel::default())
    }

    pub fn v_full(&self) -> Matrix3<f64> {
        let v = self.rudder.v_tilde();
        Matrix3::new(
            v[(0, 0)],
            v[(0, 1)],
            0.0,
            v[(1, 0)],
            v[(1, 1)],
            0.0,
            0.0,
            0.0,
            self.bow.c_b,
        )
    }

    /// `f_c = V * u`.
    pub fn command_to_forces(&self, u: &ModifiedCommand) -> ActuatorForces {
        ActuatorForces::from_vector(&(self.v_full() * u.as_vector()))
    }

    pub fn hover_angle(&self) -> &Vector2<f64> {
        self.rudder.hover_angle()
    }
}
