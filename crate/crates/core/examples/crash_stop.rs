//! Switch the positioning controller on at 0.37 m/s and watch the ship
//! stop with the propeller still turning.

use vtps::harness::{crash_stop, run_scenario};

fn main() -> vtps::Result<()> {
    let cfg = crash_stop();
    let out = run_scenario(&cfg)?;
    println!("   t [s]   u [m/s]   X_req [N]  delta_p  delta_s");
    for r in out.trace.iter().step_by(50) {
        println!(
            "{:8.1} {:9.4} {:11.3} {:8.2} {:8.2}",
            r.t, r.u, r.x_req, r.delta_p, r.delta_s
        );
    }
    let stop = out.trace.iter().find(|r| r.u < 0.05).map(|r| r.t);
    match stop {
        Some(t) => println!("u < 0.05 m/s after {t:.1} s"),
        None => println!("u stayed above 0.05 m/s"),
    }
    let at_40 = out
        .trace
        .iter()
        .find(|r| r.t >= 40.0)
        .map_or(f64::NAN, |r| r.u);
    println!("u at 40 s: {at_40:.3} m/s");
    Ok(())
}
