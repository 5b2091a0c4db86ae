//! Run the shipped docking scenarios and report their metrics. Pass a
//! directory to also write each trace as CSV.

use std::path::PathBuf;

use vtps::harness::{audit, builtin, emit_trace, run_scenario};

fn main() -> vtps::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    for name in ["a", "b", "c"] {
        let cfg = builtin(name).expect("shipped scenario");
        let run = run_scenario(&cfg)?;
        let a = audit(&cfg, &run.trace);
        println!("{}", run.summary);
        println!(
            "records {}  range {}  rate {}  force {}\n",
            run.trace.len(),
            a.range,
            a.rate,
            a.force
        );
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
            emit_trace(&run.trace, dir.join(format!("scenario_{name}.csv")))?;
        }
    }
    Ok(())
}
