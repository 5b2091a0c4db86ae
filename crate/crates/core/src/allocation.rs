//! Control forces allocation.
//!
//! Body forces relate to actuator forces through the configuration matrix
//!
//! ```text
//!     | 1   0     0   |
//! T = | 0   1     1   |      f_req = T * V * u = Z * u
//!     | 0  x_fR  x_B  |
//! ```
//!
//! The system is square, so allocation is a single multiplication by the
//! cached `Z^-1`. Physical commands are then recovered by shifting back to
//! the hover angle, clamping to the active actuator ranges and rate-limiting
//! the rudders, in that order. No force lost to clamping is redistributed.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::command::{ActuatorCommand, ModifiedCommand};
use crate::error::{Error, Result};
use crate::force_model::{signed_sqrt, FullForceModel};

/// Longitudinal actuator positions measured from the centre of gravity (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLayout {
    pub x_fr: f64,
    pub x_b: f64,
}

impl Default for ActuatorLayout {
    fn default() -> Self {
        Self {
            x_fr: -1.657,
            x_b: 1.263,
        }
    }
}

impl ActuatorLayout {
    pub fn configuration_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, self.x_fr, self.x_b)
    }
}

/// Surge force (N), sway force (N) and yaw moment (N m) requested from the
/// actuators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RequiredForces {
    pub x_req: f64,
    pub y_req: f64,
    pub n_req: f64,
}

impl RequiredForces {
    pub fn new(x_req: f64, y_req: f64, n_req: f64) -> Self {
        Self {
            x_req,
            y_req,
            n_req,
        }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x_req, self.y_req, self.n_req)
    }

    pub fn from_vector(f: &Vector3<f64>) -> Self {
        Self::new(f[0], f[1], f[2])
    }
}

/// Axes on which the last saturation was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaturationFlags {
    pub surge: bool,
    pub sway: bool,
    pub yaw: bool,
}

impl SaturationFlags {
    pub fn as_array(&self) -> [bool; 3] {
        [self.surge, self.sway, self.yaw]
    }

    pub fn any(&self) -> bool {
        self.surge || self.sway || self.yaw
    }
}

/// Saturation box on the required forces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceLimits {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub n: [f64; 2],
}

impl Default for ForceLimits {
    fn default() -> Self {
        Self {
            x: [-1.5, 0.8],
            y: [-1.0, 1.0],
            n: [-1.7, 1.5],
        }
    }
}

impl ForceLimits {
    pub fn contains(&self, f: &RequiredForces) -> bool {
        within(f.x_req, self.x) && within(f.y_req, self.y) && within(f.n_req, self.n)
    }

    /// Component-wise clamp, reporting which axes were cut.
    pub fn saturate(&self, raw: &Vector3<f64>) -> (RequiredForces, SaturationFlags) {
        let (x, sx) = clamp_flag(raw[0], self.x);
        let (y, sy) = clamp_flag(raw[1], self.y);
        let (n, sn) = clamp_flag(raw[2], self.n);
        (
            RequiredForces::new(x, y, n),
            SaturationFlags {
                surge: sx,
                sway: sy,
                yaw: sn,
            },
        )
    }
}

/// Saturates raw PID output with the default docking limits.
pub fn saturate_forces(raw: &Vector3<f64>) -> (RequiredForces, SaturationFlags) {
    ForceLimits::default().saturate(raw)
}

fn within(v: f64, range: [f64; 2]) -> bool {
    v >= range[0] && v <= range[1]
}

fn clamp_flag(v: f64, range: [f64; 2]) -> (f64, bool) {
    if v < range[0] {
        (range[0], true)
    } else if v > range[1] {
        (range[1], true)
    } else {
        (v, false)
    }
}

/// Actuator ranges for one mission stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLimits {
    /// Port rudder range (deg).
    pub delta_p: [f64; 2],
    /// Starboard rudder range (deg).
    pub delta_s: [f64; 2],
    /// Rudder slew rate (deg/s).
    pub rudder_rate: f64,
    /// Bow thruster range (rps).
    pub n_b: [f64; 2],
    /// Constant propeller revolution (rps).
    pub n_prop: f64,
}

impl ActuatorLimits {
    /// Ranges while the positioning controller is active (docking and
    /// keeping).
    pub fn vtps() -> Self {
        Self {
            delta_p: [-105.0, -60.0],
            delta_s: [60.0, 105.0],
            rudder_rate: 23.0,
            n_b: [-27.0, 27.0],
            n_prop: 10.0,
        }
    }

    /// Ranges during the line-of-sight transition. The bow thruster is off.
    pub fn transition() -> Self {
        Self {
            delta_p: [-105.0, 35.0],
            delta_s: [-35.0, 105.0],
            rudder_rate: 23.0,
            n_b: [0.0, 0.0],
            n_prop: 10.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "vtps" => Some(Self::vtps()),
            "transition" => Some(Self::transition()),
            _ => None,
        }
    }

    pub fn contains(&self, cmd: &ActuatorCommand) -> bool {
        within(cmd.delta_p, self.delta_p)
            && within(cmd.delta_s, self.delta_s)
            && within(cmd.n_b, self.n_b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("delta_p", self.delta_p),
            ("delta_s", self.delta_s),
            ("n_b", self.n_b),
        ] {
            if !(r[0] <= r[1]) {
                return Err(Error::Config(format!("empty {name} range {r:?}")));
            }
        }
        if !(self.rudder_rate > 0.0) {
            return Err(Error::Config("rudder_rate must be > 0".into()));
        }
        Ok(())
    }

    /// Clamps the rudder target to range, then limits its step from
    /// `previous` to `rudder_rate * dt`.
    pub fn limit_rudders(&self, target: [f64; 2], previous: [f64; 2], dt: f64) -> [f64; 2] {
        let max_step = self.rudder_rate * dt;
        let ranges = [self.delta_p, self.delta_s];
        let mut out = [0.0; 2];
        for k in 0..2 {
            let clamped = target[k].clamp(ranges[k][0], ranges[k][1]);
            out[k] = previous[k] + (clamped - previous[k]).clamp(-max_step, max_step);
        }
        out
    }
}

/// Precomputed allocation matrices for one layout and force model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocator {
    layout: ActuatorLayout,
    z: Matrix3<f64>,
    z_inv: Matrix3<f64>,
}

/// Below this |det Z| the allocation is rejected.
const MIN_DET_Z: f64 = 1e-12;

/// Builds `Z = T * V` and caches its inverse.
pub fn build_z(layout: &ActuatorLayout, model: &FullForceModel) -> Result<Allocator> {
    Allocator::from_matrices(layout, &layout.configuration_matrix(), &model.v_full())
}

impl Allocator {
    pub fn new(layout: &ActuatorLayout, model: &FullForceModel) -> Result<Self> {
        build_z(layout, model)
    }

    /// Allocator for arbitrary `T` and `V`.
    pub fn from_matrices(
        layout: &ActuatorLayout,
        t: &Matrix3<f64>,
        v: &Matrix3<f64>,
    ) -> Result<Self> {
        let z = t * v;
        let det = z.determinant();
        if !det.is_finite() || det.abs() < MIN_DET_Z {
            return Err(Error::SingularAllocation { det });
        }
        let z_inv = z.try_inverse().ok_or(Error::SingularAllocation { det })?;
        Ok(Self {
            layout: *layout,
            z,
            z_inv,
        })
    }

    pub fn z(&self) -> &Matrix3<f64> {
        &self.z
    }

    pub fn z_inv(&self) -> &Matrix3<f64> {
        &self.z_inv
    }

    pub fn layout(&self) -> &ActuatorLayout {
        &self.layout
    }

    /// `u = Z^-1 * f_req`.
    pub fn allocate(&self, f_req: &RequiredForces) -> ModifiedCommand {
        allocate(&self.z_inv, f_req)
    }
}

/// `u = Z^-1 * f_req`; the bow channel is the signed square `n_B |n_B|`.
pub fn allocate(z_inv: &Matrix3<f64>, f_req: &RequiredForces) -> ModifiedCommand {
    ModifiedCommand::from_vector(&(z_inv * f_req.as_vector()))
}

/// Maps a hover-relative command to a physical one inside `limits`, moving
/// the rudders no faster than the slew rate from `previous`.
pub fn to_physical(
    u: &ModifiedCommand,
    model: &FullForceModel,
    limits: &ActuatorLimits,
    previous: &ActuatorCommand,
    dt: f64,
) -> ActuatorCommand {
    debug_assert!(dt > 0.0);
    let hover: &Vector2<f64> = model.hover_angle();
    let target = [u.delta_p + hover[0], u.delta_s + hover[1]];
    let [delta_p, delta_s] = limits.limit_rudders(target, [previous.delta_p, previous.delta_s], dt);
    let n_b = signed_sqrt(u.n_b_sq).clamp(limits.n_b[0], limits.n_b[1]);
    ActuatorCommand {
        delta_p,
        delta_s,
        n_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force_model::signed_square;
    use approx::assert_relative_eq;

    fn allocator() -> (FullForceModel, Allocator) {
        let model = FullForceModel::reference();
        let alloc = build_z(&ActuatorLayout::default(), &model).unwrap();
        (model, alloc)
    }

    /// Eliminates Y_B from the force balance, then solves the 2x2 rudder
    /// system by Cramer's rule.
    fn analytic_allocation(
        model: &FullForceModel,
        layout: &ActuatorLayout,
        f: &RequiredForces,
    ) -> [f64; 3] {
        let y_ct = (f.n_req - layout.x_b * f.y_req) / (layout.x_fr - layout.x_b);
        let y_b = f.y_req - y_ct;
        let v = model.rudder.v_tilde();
        let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        let dp = (f.x_req * v[(1, 1)] - v[(0, 1)] * y_ct) / det;
        let ds = (v[(0, 0)] * y_ct - v[(1, 0)] * f.x_req) / det;
        [dp, ds, y_b / model.bow.c_b]
    }

    #[test]
    fn z_is_invertible_for_default_layout() {
        let (model, alloc) = allocator();
        let v = model.rudder.v_tilde();
        // det Z = det T * det V = (x_B - x_fR) * det(V~) * C_B
        let expected =
            (1.263 + 1.657) * (v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)]) * model.bow.c_b;
        assert_relative_eq!(alloc.z().determinant(), expected, max_relative = 1e-12);
        assert!(expected.abs() > 1e-12);
        assert_relative_eq!(
            alloc.z() * alloc.z_inv(),
            Matrix3::identity(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn coincident_actuators_are_singular() {
        let model = FullForceModel::reference();
        let layout = ActuatorLayout {
            x_fr: 0.5,
            x_b: 0.5,
        };
        assert!(matches!(
            build_z(&layout, &model),
            Err(Error::SingularAllocation { .. })
        ));
    }

    #[test]
    fn identity_matrices_give_identity_z() {
        let alloc = Allocator::from_matrices(
            &ActuatorLayout::default(),
            &Matrix3::identity(),
            &Matrix3::identity(),
        )
        .unwrap();
        assert_eq!(*alloc.z(), Matrix3::identity());
    }

    #[test]
    fn zero_request_is_hover() {
        let (model, alloc) = allocator();
        let u = alloc.allocate(&RequiredForces::default());
        assert_eq!(u, ModifiedCommand::default());
        let hover = model.hover_angle();
        let prev = ActuatorCommand::new(hover[0], hover[1], 0.0);
        let cmd = to_physical(&u, &model, &ActuatorLimits::vtps(), &prev, 0.1);
        assert_eq!(cmd, prev);
        assert!((cmd.delta_p + 78.60).abs() < 0.05 && (cmd.delta_s - 73.38).abs() < 0.05);
    }

    #[test]
    fn pure_yaw_request_splits_between_rudders_and_bow() {
        let (model, alloc) = allocator();
        let layout = ActuatorLayout::default();
        let f = RequiredForces::new(0.0, 0.0, 1.0);
        let u = alloc.allocate(&f);
        let fc = model.command_to_forces(&u);
        let y_ct = 1.0 / (layout.x_fr - layout.x_b);
        assert_relative_eq!(fc.y_ct, y_ct, epsilon = 1e-12);
        assert_relative_eq!(fc.y_b, -y_ct, epsilon = 1e-12);
        assert!(fc.x_ct.abs() < 1e-12);
        assert!((fc.y_ct + 0.342).abs() < 5e-4);

        let oracle = analytic_allocation(&model, &layout, &f);
        assert_relative_eq!(u.delta_p, oracle[0], epsilon = 1e-9);
        assert_relative_eq!(u.delta_s, oracle[1], epsilon = 1e-9);
        assert_relative_eq!(u.n_b_sq, oracle[2], epsilon = 1e-9);
    }

    #[test]
    fn allocation_matches_analytic_elimination() {
        let (model, alloc) = allocator();
        let layout = ActuatorLayout::default();
        for f in [
            RequiredForces::new(-1.5, 1.0, -1.7),
            RequiredForces::new(0.8, -1.0, 1.5),
            RequiredForces::new(0.1, 0.2, -0.3),
        ] {
            let u = alloc.allocate(&f);
            let oracle = analytic_allocation(&model, &layout, &f);
            assert_relative_eq!(u.delta_p, oracle[0], max_relative = 1e-10);
            assert_relative_eq!(u.delta_s, oracle[1], max_relative = 1e-10);
            assert_relative_eq!(u.n_b_sq, oracle[2], max_relative = 1e-10);
        }
    }

    #[test]
    fn clamps_to_range() {
        let model = FullForceModel::reference();
        let hover = *model.hover_angle();
        let prev = ActuatorCommand::new(-104.0, 104.0, 0.0);
        let u = ModifiedCommand::new(-120.0 - hover[0], 200.0, signed_square(40.0));
        let cmd = to_physical(&u, &model, &ActuatorLimits::vtps(), &prev, 0.1);
        assert_eq!(cmd.delta_p, -105.0);
        assert_eq!(cmd.delta_s, 105.0);
        assert_eq!(cmd.n_b, 27.0);
    }

    #[test]
    fn rate_limits_rudders() {
        let model = FullForceModel::reference();
        let hover = *model.hover_angle();
        let prev = ActuatorCommand::new(-75.0, 75.0, 0.0);
        let u = ModifiedCommand::new(-70.0 - hover[0], 75.0 - hover[1], 0.0);
        let cmd = to_physical(&u, &model, &ActuatorLimits::vtps(), &prev, 0.1);
        assert_relative_eq!(cmd.delta_p, -72.7, epsilon = 1e-12);
        assert_relative_eq!(cmd.delta_s, 75.0, epsilon = 1e-12);
    }

    #[test]
    fn bow_channel_uses_signed_root() {
        let model = FullForceModel::reference();
        let hover = *model.hover_angle();
        let prev = ActuatorCommand::new(hover[0], hover[1], 0.0);
        let cmd = to_physical(
            &ModifiedCommand::new(0.0, 0.0, -144.0),
            &model,
            &ActuatorLimits::vtps(),
            &prev,
            0.1,
        );
        assert_relative_eq!(cmd.n_b, -12.0, epsilon = 1e-12);
        // Off in the transition preset.
        let cmd = to_physical(
            &ModifiedCommand::new(0.0, 0.0, -144.0),
            &model,
            &ActuatorLimits::transition(),
            &prev,
            0.1,
        );
        assert_eq!(cmd.n_b, 0.0);
    }

    #[test]
    fn saturation_examples() {
        let (f, flags) = saturate_forces(&Vector3::zeros());
        assert_eq!(f, RequiredForces::default());
        assert!(!flags.any());

        let (f, flags) = saturate_forces(&Vector3::new(-2.0, 0.0, 0.0));
        assert_eq!(f, RequiredForces::new(-1.5, 0.0, 0.0));
        assert_eq!(flags.as_array(), [true, false, false]);

        let (f, flags) = saturate_forces(&Vector3::new(0.5, -1.3, 2.0));
        assert_eq!(f, RequiredForces::new(0.5, -1.0, 1.5));
        assert_eq!(flags.as_array(), [false, true, true]);
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(ActuatorLimits::preset("vtps"), Some(ActuatorLimits::vtps()));
        assert_eq!(
            ActuatorLimits::preset("transition"),
            Some(ActuatorLimits::transition())
        );
        assert!(ActuatorLimits::preset("docking").is_none());
        assert!(ActuatorLimits::vtps().validate().is_ok());
    }
}
