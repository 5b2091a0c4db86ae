use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2, Vector3};
use proptest::prelude::*;

use vtps::allocation::{
    saturate_forces, to_physical, ActuatorLayout, ActuatorLimits, Allocator, RequiredForces,
    SaturationFlags,
};
use vtps::command::ActuatorCommand;
use vtps::controller::{
    pid_step, pose_error, rotation, BodyError, PidGains, PidState, Pose, Velocities,
};
use vtps::force_model::{
    cfd_forces, fit_rudder_model, scale_model, BowThrusterModel, CfdSample, FullForceModel,
    RudderForceModel,
};
use vtps::guidance::WaypointDatabase;
use vtps::sim::{step, GustModel, Propulsion, SimState, VesselParams};

fn reference() -> FullForceModel {
    FullForceModel::reference()
}

fn ssr(v: &Matrix2<f64>, f: &Vector2<f64>, samples: &[CfdSample]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let p = v * Vector2::new(s.delta_p, s.delta_s) + f;
            (p[0] - s.x_ct).powi(2) + (p[1] - s.y_ct).powi(2)
        })
        .sum()
}

#[test]
fn refit_on_own_predictions_is_idempotent() {
    let m = reference().rudder;
    let predicted: Vec<CfdSample> = cfd_forces()
        .iter()
        .map(|s| {
            let f = m.rudder_forces(&Vector2::new(s.delta_p, s.delta_s));
            CfdSample::new(s.delta_p, s.delta_s, f[0], f[1])
        })
        .collect();
    let again = fit_rudder_model(&predicted).unwrap();
    assert!((again.v_tilde() - m.v_tilde()).amax() < 1e-10);
    assert!((again.f_itcp() - m.f_itcp()).amax() < 1e-10);
}

#[test]
fn perturbing_any_slope_increases_residuals() {
    let m = reference().rudder;
    let data = cfd_forces();
    let best = ssr(m.v_tilde(), m.f_itcp(), &data);
    for k in 0..4 {
        for step in [-1e-3, 1e-3] {
            let mut v = *m.v_tilde();
            v[k] += step;
            assert!(ssr(&v, m.f_itcp(), &data) > best, "entry {k} step {step}");
        }
    }
}

#[test]
fn fitted_determinant_sign_and_size() {
    let det = reference().rudder.v_tilde().determinant();
    assert!(det > 0.0);
    assert!(det > 8.6e-4 / 2.0 && det < 8.6e-4 * 2.0);
}

#[test]
fn coincident_actuators_cannot_be_allocated() {
    let layout = ActuatorLayout {
        x_fr: 1.0,
        x_b: 1.0,
    };
    assert!(matches!(
        Allocator::new(&layout, &reference()),
        Err(vtps::Error::SingularAllocation { .. })
    ));
}

fn body_force(alloc: &Allocator, model: &FullForceModel, f: &RequiredForces) -> Vector3<f64> {
    let u = alloc.allocate(f);
    alloc.layout().configuration_matrix() * model.v_full() * u.as_vector()
}

proptest! {
    #[test]
    fn hover_is_a_fixed_point_of_any_fit(
        v in prop::array::uniform4(-0.05f64..0.05),
        h in (-100.0f64..-60.0, 60.0f64..100.0),
    ) {
        let vt = Matrix2::new(v[0], v[1], v[2], v[3]);
        prop_assume!(vt.determinant().abs() > 1e-6);
        let m = RudderForceModel::from_hover(vt, Vector2::new(h.0, h.1)).unwrap();
        let samples: Vec<CfdSample> = cfd_forces()
            .iter()
            .map(|s| {
                let f = m.rudder_forces(&Vector2::new(s.delta_p, s.delta_s));
                CfdSample::new(s.delta_p, s.delta_s, f[0], f[1])
            })
            .collect();
        let fit = fit_rudder_model(&samples).unwrap();
        prop_assert!(fit.rudder_forces(fit.hover_angle()).norm() < 1e-9);
    }

    #[test]
    fn scaling_multiplies_every_force(
        factor in 1e-3f64..1e3,
        dp in -105.0f64..35.0,
        ds in -105.0f64..105.0,
        n in -27.0f64..27.0,
    ) {
        let m = reference();
        let s = scale_model(&m, factor).unwrap();
        let d = Vector2::new(dp, ds);
        let a = s.rudder.rudder_forces(&d);
        let b = m.rudder.rudder_forces(&d) * factor;
        prop_assert!((a - b).amax() <= 1e-12 * b.amax().max(1.0));
        let yb = s.bow.force(n).unwrap();
        prop_assert!((yb - factor * m.bow.force(n).unwrap()).abs() <= 1e-12 * factor);
        prop_assert!((s.hover_angle() - m.hover_angle()).amax() < 1e-9);
    }

    #[test]
    fn bow_force_is_odd(n in 0.0f64..27.0) {
        let bow = BowThrusterModel::default();
        prop_assert_eq!(bow.force(-n).unwrap(), -bow.force(n).unwrap());
    }

    #[test]
    fn allocation_inverts_exactly(
        x in -1.5f64..0.8,
        y in -1.0f64..1.0,
        n in -1.7f64..1.5,
    ) {
        let model = reference();
        let alloc = Allocator::new(&ActuatorLayout::default(), &model).unwrap();
        let f = RequiredForces::new(x, y, n);
        prop_assert!((body_force(&alloc, &model, &f) - f.as_vector()).norm() < 1e-10);
    }

    #[test]
    fn to_physical_is_idempotent(
        x in -1.5f64..0.8,
        y in -1.0f64..1.0,
        n in -1.7f64..1.5,
        dp in -105.0f64..-60.0,
        ds in 60.0f64..105.0,
    ) {
        let model = reference();
        let alloc = Allocator::new(&ActuatorLayout::default(), &model).unwrap();
        let limits = ActuatorLimits::vtps();
        let prev = ActuatorCommand::new(dp, ds, 0.0);
        let u = alloc.allocate(&RequiredForces::new(x, y, n));
        let once = to_physical(&u, &model, &limits, &prev, 0.1);
        let twice = to_physical(&u, &model, &limits, &prev, 0.1);
        prop_assert_eq!(once, twice);
        prop_assert!(limits.contains(&once));
        prop_assert!((once.delta_p - dp).abs() <= 2.3 + 1e-12);
        prop_assert!((once.delta_s - ds).abs() <= 2.3 + 1e-12);
    }

    #[test]
    fn saturation_is_monotone_and_identity_inside(
        a in prop::array::uniform3(-5.0f64..5.0),
        d in prop::array::uniform3(0.0f64..3.0),
    ) {
        let lo = Vector3::from(a);
        let hi = lo + Vector3::from(d);
        let (sl, _) = saturate_forces(&lo);
        let (sh, _) = saturate_forces(&hi);
        prop_assert!(sl.x_req <= sh.x_req && sl.y_req <= sh.y_req && sl.n_req <= sh.n_req);
        let (s2, flags) = saturate_forces(&sl.as_vector());
        prop_assert_eq!(s2, sl);
        prop_assert!(!flags.any());
    }

    #[test]
    fn pose_error_properties(
        x in -50.0f64..50.0,
        y in -50.0f64..50.0,
        psi in -PI..PI,
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
    ) {
        let eta = Pose::new(x, y, psi);
        prop_assert_eq!(pose_error(&eta, &eta).as_vector(), Vector3::zeros());
        let e = pose_error(&eta, &Pose::new(x + dx, y + dy, psi));
        prop_assert!((e.x_d.hypot(e.y_d) - dx.hypot(dy)).abs() < 1e-12);
    }

    #[test]
    fn rotation_group(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let (ra, rb) = (rotation(a), rotation(b));
        prop_assert!((ra.transpose() * ra - nalgebra::Matrix3::identity()).amax() < 1e-12);
        prop_assert!((ra.determinant() - 1.0).abs() < 1e-12);
        prop_assert!((ra * rb - rotation(a + b)).amax() < 1e-12);
        prop_assert!((rotation(-a) - ra.transpose()).amax() < 1e-12);
    }

    #[test]
    fn surge_error_only_moves_surge(ex in -2.0f64..2.0) {
        let g = PidGains::default();
        let base = BodyError { x_d: 0.1, y_d: -0.2, psi_d: 0.05 };
        let moved = BodyError { x_d: base.x_d + ex, ..base };
        let v = Velocities::default();
        let sat = SaturationFlags::default();
        let (f0, s0) = pid_step(&g, &PidState::default(), &base, &v, 0.1, &sat);
        let (f1, s1) = pid_step(&g, &PidState::default(), &moved, &v, 0.1, &sat);
        prop_assert_eq!((f0[1], f0[2]), (f1[1], f1[2]));
        prop_assert_eq!(&s0.integral[1..], &s1.integral[1..]);
    }

    #[test]
    fn setpoint_jump_has_no_derivative_kick(
        e1 in prop::array::uniform3(-1.0f64..1.0),
        e2 in prop::array::uniform3(-1.0f64..1.0),
        v in prop::array::uniform3(-0.5f64..0.5),
    ) {
        let g = PidGains::default();
        let vel = Velocities::new(v[0], v[1], v[2]);
        let sat = SaturationFlags::default();
        let s = PidState::default();
        let err = |e: [f64; 3]| BodyError { x_d: e[0], y_d: e[1], psi_d: e[2] };
        let (fa, sa) = pid_step(&g, &s, &err(e1), &vel, 0.1, &sat);
        let (fb, sb) = pid_step(&g, &s, &err(e2), &vel, 0.1, &sat);
        for k in 0..3 {
            let pi_a = g.k_p[k] * e1[k] + g.k_i[k] * sa.integral[k];
            let pi_b = g.k_p[k] * e2[k] + g.k_i[k] * sb.integral[k];
            prop_assert!(((fa[k] - fb[k]) - (pi_a - pi_b)).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_index_is_brute_force_argmin(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -PI..PI), 1..60),
        eta in (-12.0f64..12.0, -12.0f64..12.0, -PI..PI),
        scale in 0.01f64..100.0,
    ) {
        let rows: Vec<Pose> = pts.iter().map(|p| Pose::new(p.0, p.1, p.2)).collect();
        let db = WaypointDatabase::new(rows.clone(), 3).unwrap();
        let eta = Pose::new(eta.0, eta.1, eta.2);
        let j = db.nearest_index(&eta);
        let costs: Vec<f64> = (0..rows.len()).map(|k| db.cost(k, &eta)).collect();
        let min = costs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(costs[j], min);
        prop_assert!(costs[j + 1..].iter().all(|c| *c > min));

        let scaled = WaypointDatabase::with_weight(rows.clone(), 3, [scale, scale, 0.0]).unwrap();
        prop_assert_eq!(scaled.nearest_index(&eta), j);

        let turned = Pose::new(eta.x0, eta.y0, eta.psi + 1.234);
        prop_assert_eq!(db.nearest_index(&turned), j);

        let i = db.desired_index(&eta);
        prop_assert!(i < rows.len());
        prop_assert_eq!(i, (j + 3).min(rows.len() - 1));
    }

    #[test]
    fn setpoint_advances_along_the_path(spacing in 0.05f64..1.0, delta_k in 1usize..20) {
        let rows: Vec<Pose> = (0..80)
            .map(|k| {
                let a = k as f64 * 0.05;
                Pose::new(5.0 * a.sin(), 5.0 * (1.0 - a.cos()), a)
            })
            .collect();
        let db = WaypointDatabase::new(rows, delta_k).unwrap();
        let mut last = 0;
        let mut s = 0.0f64;
        while s < 4.0 {
            let eta = Pose::new(5.0 * s.sin(), 5.0 * (1.0 - s.cos()), s);
            let i = db.desired_index(&eta);
            prop_assert!(i >= last);
            last = i;
            s += spacing * 0.05;
        }
    }

    #[test]
    fn kinetic_energy_never_grows_at_hover(
        u in -0.6f64..0.6,
        v in -0.6f64..0.6,
        r in -0.3f64..0.3,
    ) {
        let model = reference();
        let params = VesselParams::default();
        let h = model.hover_angle();
        let mut s = SimState {
            v: Velocities::new(u, v, r),
            actuators: ActuatorCommand::new(h[0], h[1], 0.0),
            ..Default::default()
        };
        let mut ke = params.kinetic_energy(&s.v);
        for _ in 0..200 {
            s = step(&s, &model, &params.layout, &params, &GustModel::calm(), Propulsion::Positioning, 0.02).unwrap();
            let next = params.kinetic_energy(&s.v);
            prop_assert!(next <= ke + 1e-15);
            ke = next;
        }
    }

    #[test]
    fn earth_frame_drift_is_heading_independent(psi in -PI..PI) {
        let model = reference();
        let params = VesselParams {
            inertia: [200.0, 200.0, 100.0],
            linear_damping: [5.0, 5.0, 5.0],
            quadratic_damping: [0.0; 3],
            ..VesselParams::default()
        };
        let gust = GustModel { mean_force: [0.3, -0.2], ..GustModel::calm() };
        let h = model.hover_angle();
        let start = |psi: f64| SimState {
            eta: Pose::new(0.0, 0.0, psi),
            actuators: ActuatorCommand::new(h[0], h[1], 0.0),
            ..Default::default()
        };
        let run = |mut s: SimState| {
            for _ in 0..100 {
                s = step(&s, &model, &params.layout, &params, &gust, Propulsion::Positioning, 0.02).unwrap();
            }
            s
        };
        let a = run(start(0.0));
        let b = run(start(psi));
        prop_assert!((a.eta.x0 - b.eta.x0).abs() < 1e-6);
        prop_assert!((a.eta.y0 - b.eta.y0).abs() < 1e-6);
    }
}

#[test]
fn hover_holds_still_for_1000_steps() {
    let model = reference();
    let params = VesselParams::default();
    let h = model.hover_angle();
    let mut s = SimState {
        actuators: ActuatorCommand::new(h[0], h[1], 0.0),
        ..Default::default()
    };
    for _ in 0..1000 {
        s = step(
            &s,
            &model,
            &params.layout,
            &params,
            &GustModel::calm(),
            Propulsion::Positioning,
            0.02,
        )
        .unwrap();
        assert!(s.v.planar_speed() < 1e-9);
    }
}

#[test]
fn pure_bow_thrust_yaws_without_surge() {
    let model = reference();
    let params = VesselParams::default();
    let h = model.hover_angle();
    let s = SimState {
        actuators: ActuatorCommand::new(h[0], h[1], 20.0),
        ..Default::default()
    };
    let next = step(
        &s,
        &model,
        &params.layout,
        &params,
        &GustModel::calm(),
        Propulsion::Positioning,
        0.02,
    )
    .unwrap();
    assert!(next.v.u.abs() < 1e-12);
    assert!(next.v.r > 0.0 && next.v.v > 0.0);
}

#[test]
fn anti_windup_freezes_then_resumes() {
    let g = PidGains::default();
    let e = BodyError {
        x_d: 2.0,
        y_d: 0.0,
        psi_d: 0.0,
    };
    let v = Velocities::default();
    let mut state = PidState::default();
    let mut sat = SaturationFlags::default();
    let mut history = Vec::new();
    for k in 0..30 {
        let (raw, next) = pid_step(&g, &state, &e, &v, 0.1, &sat);
        state = next;
        history.push(state.integral[0]);
        // Scripted episode: the surge demand saturates for steps 10..20.
        let (_, flags) = saturate_forces(&raw);
        sat = SaturationFlags {
            surge: flags.surge && (10..20).contains(&k),
            ..flags
        };
    }
    // Step k integrates unless step k-1 saturated.
    assert!(history[10] > history[9]);
    for k in 11..=20 {
        assert_eq!(history[k], history[10], "step {k} should be frozen");
    }
    assert!(history[21] > history[20]);
    assert!((history[29] - history[21] - 8.0 * 0.2).abs() < 1e-12);
}
