//! Setpoint selection from a waypoint database, and line-of-sight heading
//! guidance for the transition stage.
//!
//! Indices are zero-based: row `0` is the first waypoint and row `q - 1` the
//! final docking pose.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::{wrap_angle, DesiredPose, Pose};
use crate::error::{Error, Result};

/// Time-ordered reference poses with the lookahead used to pick setpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointDatabase {
    rows: Vec<Pose>,
    delta_k: usize,
    weight: [f64; 3],
}

impl WaypointDatabase {
    /// Database with the position-only weight `(1, 1, 0)`.
    pub fn new(rows: Vec<Pose>, delta_k: usize) -> Result<Self> {
        Self::with_weight(rows, delta_k, [1.0, 1.0, 0.0])
    }

    pub fn with_weight(rows: Vec<Pose>, delta_k: usize, weight: [f64; 3]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("waypoint database is empty".into()));
        }
        if delta_k == 0 {
            return Err(Error::Config("delta_k must be at least 1".into()));
        }
        if weight.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config(format!("invalid waypoint weight {weight:?}")));
        }
        Ok(Self {
            rows,
            delta_k,
            weight,
        })
    }

    pub fn rows(&self) -> &[Pose] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn delta_k(&self) -> usize {
        self.delta_k
    }

    pub fn weight(&self) -> [f64; 3] {
        self.weight
    }

    pub fn final_pose(&self) -> &Pose {
        self.rows.last().expect("database is never empty")
    }

    /// Weighted quadratic form `(eta - P_k)^T W (eta - P_k)`.
    pub fn cost(&self, k: usize, eta: &Pose) -> f64 {
        let p = &self.rows[k];
        let d = [eta.x0 - p.x0, eta.y0 - p.y0, wrap_angle(eta.psi - p.psi)];
        self.weight[0] * d[0] * d[0] + self.weight[1] * d[1] * d[1] + self.weight[2] * d[2] * d[2]
    }

    /// Index of the nearest waypoint. Ties go to the later row so the
    /// setpoint never steps backwards between equidistant rows.
    pub fn nearest_index(&self, eta: &Pose) -> usize {
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for k in 0..self.rows.len() {
            let c = self.cost(k, eta);
            if c <= best_cost {
                best = k;
                best_cost = c;
            }
        }
        best
    }

    /// Index `min(j + delta_k, q - 1)` of the active setpoint.
    pub fn desired_index(&self, eta: &Pose) -> usize {
        (self.nearest_index(eta) + self.delta_k).min(self.rows.len() - 1)
    }

    /// Active setpoint for the current pose. Once the lookahead reaches the
    /// last row the setpoint stays there.
    pub fn desired_pose(&self, eta: &Pose) -> DesiredPose {
        self.rows[self.desired_index(eta)]
    }

    /// Total polyline length (m).
    pub fn path_length(&self) -> f64 {
        self.rows.windows(2).map(|w| w[0].distance_to(&w[1])).sum()
    }
}

/// Parses a waypoint table: one `x0_m y0_m psi_rad` row per line, blank
/// lines and `#` comments ignored.
pub fn parse_waypoints(text: &str, origin: &Path) -> Result<Vec<Pose>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        let cols: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 3 {
            return Err(err(format!("expected 3 columns, found {}", cols.len())));
        }
        let mut vals = [0.0; 3];
        for (v, c) in vals.iter_mut().zip(&cols) {
            *v = c
                .parse::<f64>()
                .map_err(|e| err(format!("bad number {c:?}: {e}")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite value {c:?}")));
            }
        }
        rows.push(Pose::new(vals[0], vals[1], vals[2]));
    }
    Ok(rows)
}

pub fn load_waypoints(path: impl AsRef<Path>) -> Result<Vec<Pose>> {
    let path = path.as_ref();
    parse_waypoints(&fs::read_to_string(path)?, path)
}

pub fn format_waypoints(rows: &[Pose]) -> String {
    let mut out = String::from("# x0_m  y0_m  psi_rad\n");
    for p in rows {
        let _ = writeln!(out, "{:.9e} {:.9e} {:.9e}", p.x0, p.y0, p.psi);
    }
    out
}

pub fn save_waypoints(path: impl AsRef<Path>, rows: &[Pose]) -> Result<()> {
    fs::write(path, format_waypoints(rows))?;
    Ok(())
}

/// Line-of-sight guidance for the transition stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosParams {
    /// Distance ahead of the closest path point that the ship aims at (m).
    pub lookahead_distance: f64,
    /// Heading PD: rudder degrees per radian of heading error.
    pub heading_kp: f64,
    /// Heading PD: rudder degrees per rad/s of yaw rate.
    pub heading_kd: f64,
    /// Within this distance of the path end, the final segment direction is
    /// held instead of aiming at a point (m).
    pub acceptance_radius: f64,
    /// Mirrored rudder limit (deg).
    pub max_rudder: f64,
}

impl Default for LosParams {
    fn default() -> Self {
        Self {
            lookahead_distance: 6.0,
            heading_kp: 40.0,
            heading_kd: 120.0,
            acceptance_radius: 0.5,
            max_rudder: 35.0,
        }
    }
}

impl LosParams {
    /// Mirrored rudder angle (deg, positive turns to starboard) steering
    /// towards `psi_des`.
    pub fn rudder_command(&self, psi_des: f64, eta: &Pose, r: f64) -> f64 {
        let cmd = self.heading_kp * wrap_angle(psi_des - eta.psi) - self.heading_kd * r;
        cmd.clamp(-self.max_rudder, self.max_rudder)
    }
}

/// Closest point on the polyline: segment index and fraction along it.
fn closest_on_path(rows: &[Pose], x: f64, y: f64) -> (usize, f64) {
    let mut best = (0, 0.0);
    let mut best_d2 = f64::INFINITY;
    for (k, w) in rows.windows(2).enumerate() {
        let (ax, ay) = (w[0].x0, w[0].y0);
        let (dx, dy) = (w[1].x0 - ax, w[1].y0 - ay);
        let len2 = dx * dx + dy * dy;
        let s = if len2 > 0.0 {
            (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (px, py) = (ax + s * dx, ay + s * dy);
        let d2 = (x - px).powi(2) + (y - py).powi(2);
        if d2 <= best_d2 {
            best_d2 = d2;
            best = (k, s);
        }
    }
    best
}

/// Direction of the last non-degenerate segment.
fn final_direction(rows: &[Pose]) -> Option<(f64, f64)> {
    rows.windows(2).rev().find_map(|w| {
        let (dx, dy) = (w[1].x0 - w[0].x0, w[1].y0 - w[0].y0);
        let len = dx.hypot(dy);
        (len > 0.0).then(|| (dx / len, dy / len))
    })
}

/// Bearing (rad) from the ship to the point `lookahead_distance` further
/// along the path than the ship's projection onto it. Past the end, the
/// path is extended along its final direction.
pub fn los_heading(eta: &Pose, db: &WaypointDatabase, p: &LosParams) -> f64 {
    let rows = db.rows();
    let Some((fx, fy)) = final_direction(rows) else {
        let last = db.final_pose();
        return (last.y0 - eta.y0).atan2(last.x0 - eta.x0);
    };
    let last = db.final_pose();
    if eta.distance_to(last) < p.acceptance_radius {
        return fy.atan2(fx);
    }

    let (mut k, s) = closest_on_path(rows, eta.x0, eta.y0);
    let seg = |k: usize| {
        let (a, b) = (&rows[k], &rows[k + 1]);
        (a.x0, a.y0, b.x0 - a.x0, b.y0 - a.y0)
    };
    let (ax, ay, dx, dy) = seg(k);
    let (mut px, mut py) = (ax + s * dx, ay + s * dy);
    let mut remaining = p.lookahead_distance;
    loop {
        let b = &rows[k + 1];
        let to_end = (b.x0 - px).hypot(b.y0 - py);
        if remaining <= to_end {
            if to_end > 0.0 {
                px += remaining * (b.x0 - px) / to_end;
                py += remaining * (b.y0 - py) / to_end;
            }
            break;
        }
        remaining -= to_end;
        px = b.x0;
        py = b.y0;
        k += 1;
        if k + 1 >= rows.len() {
            px += remaining * fx;
            py += remaining * fy;
            break;
        }
    }
    (py - eta.y0).atan2(px - eta.x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn line_db(n: usize, delta_k: usize) -> WaypointDatabase {
        let rows = (0..n).map(|k| Pose::new(k as f64, 0.0, 0.0)).collect();
        WaypointDatabase::new(rows, delta_k).unwrap()
    }

    #[test]
    fn nearest_on_a_row() {
        let db = line_db(5, 1);
        assert_eq!(db.nearest_index(&Pose::new(2.0, 0.0, 0.0)), 2);
    }

    #[test]
    fn ties_go_forward() {
        let rows = vec![
            Pose::new(0.0, 5.0, 0.0),
            Pose::new(-1.0, 0.0, 0.0),
            Pose::new(0.0, 9.0, 0.0),
            Pose::new(1.0, 0.0, 0.0),
            Pose::new(0.0, 7.0, 0.0),
        ];
        let db = WaypointDatabase::new(rows, 1).unwrap();
        assert_eq!(db.nearest_index(&Pose::new(0.0, 0.0, 0.0)), 3);
    }

    #[test]
    fn yaw_is_ignored_with_position_weight() {
        let db = line_db(5, 1);
        assert_eq!(db.nearest_index(&Pose::new(1.0, 0.0, 3.0)), 1);
        let weighted =
            WaypointDatabase::with_weight(db.rows().to_vec(), 1, [1.0, 1.0, 100.0]).unwrap();
        // With yaw weighted in, a mis-pointed ship still picks the closest
        // row because all rows share the same heading.
        assert_eq!(weighted.nearest_index(&Pose::new(1.0, 0.0, 3.0)), 1);
    }

    #[test]
    fn lookahead_and_end_clamp() {
        let db = line_db(10, 2);
        assert_eq!(db.desired_index(&Pose::new(0.0, 0.0, 0.0)), 2);
        let db = line_db(10, 5);
        assert_eq!(db.desired_index(&Pose::new(8.0, 0.1, 0.0)), 9);
        assert_eq!(db.desired_pose(&Pose::new(9.0, 0.0, 0.0)), db.rows()[9]);
        assert_eq!(
            db.desired_pose(&Pose::new(25.0, 3.0, 1.0)),
            *db.final_pose()
        );
    }

    #[test]
    fn empty_or_zero_lookahead_is_rejected() {
        assert!(WaypointDatabase::new(vec![], 1).is_err());
        assert!(WaypointDatabase::new(vec![Pose::default()], 0).is_err());
        assert!(WaypointDatabase::with_weight(vec![Pose::default()], 1, [1.0, -1.0, 0.0]).is_err());
    }

    fn east_path() -> WaypointDatabase {
        let rows = (0..50)
            .map(|k| Pose::new(0.0, k as f64, FRAC_PI_2))
            .collect();
        WaypointDatabase::new(rows, 3).unwrap()
    }

    #[test]
    fn los_on_track_follows_path() {
        let db = east_path();
        let h = los_heading(&Pose::new(0.0, 10.0, FRAC_PI_2), &db, &LosParams::default());
        assert_relative_eq!(h, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn los_corrects_towards_track() {
        let db = east_path();
        // x0 points north, so +x is left of an east-bound track.
        let h = los_heading(&Pose::new(2.0, 10.0, FRAC_PI_2), &db, &LosParams::default());
        assert!(h > FRAC_PI_2 && h < PI);
        let h = los_heading(
            &Pose::new(-2.0, 10.0, FRAC_PI_2),
            &db,
            &LosParams::default(),
        );
        assert!(h < FRAC_PI_2 && h > 0.0);
    }

    #[test]
    fn long_lookahead_tends_to_path_direction() {
        let db = east_path();
        let eta = Pose::new(3.0, 10.0, 0.0);
        let mut prev_err = f64::INFINITY;
        for la in [1.0, 10.0, 100.0, 1e4, 1e7] {
            let p = LosParams {
                lookahead_distance: la,
                ..Default::default()
            };
            let err = (los_heading(&eta, &db, &p) - FRAC_PI_2).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-6);
    }

    #[test]
    fn rudder_command_is_clamped_and_signed() {
        let p = LosParams::default();
        let eta = Pose::new(0.0, 0.0, 0.0);
        assert!(p.rudder_command(0.1, &eta, 0.0) > 0.0);
        assert!(p.rudder_command(-0.1, &eta, 0.0) < 0.0);
        assert_eq!(p.rudder_command(2.0, &eta, 0.0), 35.0);
        assert_eq!(p.rudder_command(0.0, &eta, 0.0), 0.0);
    }

    #[test]
    fn waypoint_text_round_trip() {
        let rows = vec![Pose::new(0.0, 1.5, 0.25), Pose::new(-3.25, 2.0, -3.0)];
        let parsed = parse_waypoints(&format_waypoints(&rows), Path::new("mem")).unwrap();
        assert_eq!(parsed, rows);
        let text = "# header\n\n1 2 0.5\n3,4,0.6  # trailing\n";
        let parsed = parse_waypoints(text, Path::new("mem")).unwrap();
        assert_eq!(
            parsed,
            vec![Pose::new(1.0, 2.0, 0.5), Pose::new(3.0, 4.0, 0.6)]
        );
    }

    #[test]
    fn malformed_waypoint_line_reports_location() {
        let err = parse_waypoints("1 2 3\n1 2\n", Path::new("p.txt")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_waypoints("1 x 3\n", Path::new("p.txt")).is_err());
    }
}
