//! Setpoint selection along a waypoint table and line-of-sight headings.

use vtps::controller::{pose_error, Pose};
use vtps::guidance::{los_heading, LosParams, WaypointDatabase};
use vtps::harness::PathSpec;

fn main() -> vtps::Result<()> {
    let path = PathSpec::UTurn {
        start: [0.0, 0.0],
        heading: 0.0,
        lead_in: 4.0,
        radius: 2.0,
        lead_out: 2.0,
        spacing: 0.25,
        starboard: true,
    };
    let db = WaypointDatabase::new(path.waypoints()?, 3)?;
    println!("{} waypoints, {:.2} m of path", db.len(), db.path_length());

    let los = LosParams {
        lookahead_distance: 1.5,
        ..LosParams::default()
    };
    let probes = [
        Pose::new(-1.0, 0.3, 0.0),
        Pose::new(2.0, -0.2, 0.1),
        Pose::new(5.5, 1.0, 1.2),
        Pose::new(4.2, 4.3, 3.0),
        Pose::new(1.0, 4.1, -3.1),
    ];
    println!("\n    x0     y0    psi |   j   i | e_x    e_y    e_psi | LOS psi  rudder");
    for eta in probes {
        let j = db.nearest_index(&eta);
        let i = db.desired_index(&eta);
        let e = pose_error(&eta, &db.rows()[i]);
        let psi_los = los_heading(&eta, &db, &los);
        println!(
            "{:6.2} {:6.2} {:6.2} | {:3} {:3} | {:5.2} {:6.2} {:6.2} | {:7.3} {:7.2}",
            eta.x0,
            eta.y0,
            eta.psi,
            j,
            i,
            e.x_d,
            e.y_d,
            e.psi_d,
            psi_los,
            los.rudder_command(psi_los, &eta, 0.0)
        );
    }
    Ok(())
}
