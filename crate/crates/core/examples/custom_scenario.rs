//! Build a scenario from a TOML snippet and a waypoint file, run it and
//! write the trace.
//!
//! ```text
//! cargo run --example custom_scenario -- /tmp/trace.csv
//! ```

use vtps::controller::Pose;
use vtps::guidance::save_waypoints;
use vtps::harness::{emit_trace, run_scenario, PathSpec, ScenarioConfig};

const OVERRIDES: &str = r#"
name = "diagonal"
seed = 7
keeping_duration = 120.0
receiving_index = 250
delta_k = 8

[initial.pose]
x0 = -2.0
y0 = 1.0
psi = 0.3

[initial.velocities]
u = 0.15
v = 0.0
r = 0.0

[gust]
mean_force = [0.0, 0.0]
burst_amplitude = 0.6
burst_duration = 6.0
burst_interval = 60.0
lever_arm = 0.3
seed = 7
"#;

fn main() -> vtps::Result<()> {
    let dir = std::env::temp_dir().join("vtps-custom-scenario");
    std::fs::create_dir_all(&dir)?;
    let waypoints = dir.join("diagonal.txt");
    let heading = 0.5f64;
    let rows: Vec<Pose> = (0..=500)
        .map(|k| {
            let d = k as f64 * 0.03;
            Pose::new(d * heading.cos(), d * heading.sin(), heading)
        })
        .collect();
    save_waypoints(&waypoints, &rows)?;

    let mut cfg = ScenarioConfig::from_toml(OVERRIDES)?;
    cfg.path = PathSpec::File { file: waypoints };
    let run = run_scenario(&cfg)?;
    println!("{}", run.summary);

    let out = std::env::args()
        .nth(1)
        .map_or_else(|| dir.join("trace.csv"), Into::into);
    emit_trace(&run.trace, &out)?;
    println!("trace: {} ({} records)", out.display(), run.trace.len());
    Ok(())
}
