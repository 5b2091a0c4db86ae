//! Position keeping under gust pulses across many seeds, one thread per
//! run.

use std::thread;

use vtps::harness::{audit, scenario_b, Summary};

fn main() {
    let seeds: Vec<u64> = (1..=20).collect();
    let results: Vec<(u64, vtps::Result<(Summary, bool)>)> = thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                s.spawn(move || {
                    let cfg = scenario_b().with_seed(seed);
                    let r = vtps::harness::run_scenario(&cfg)
                        .map(|run| (run.summary.clone(), audit(&cfg, &run.trace).is_clean()));
                    (seed, r)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let l_pp = 3.0;
    let mut worst: f64 = 0.0;
    println!("seed  max_dev [m]  [L_pp]  recovered  overshoot [m]  clean");
    for (seed, r) in results {
        match r {
            Ok((s, clean)) => {
                let dev = s.max_keeping_deviation.unwrap_or(f64::NAN);
                worst = worst.max(dev);
                println!(
                    "{seed:4}  {dev:11.4}  {:6.3}  {:>5}/{:<3}  {:13.4}  {clean}",
                    dev / l_pp,
                    s.bursts_assessed - s.unrecovered_bursts,
                    s.bursts_assessed,
                    s.overshoot
                );
            }
            Err(e) => println!("{seed:4}  error: {e}"),
        }
    }
    println!("worst deviation {worst:.4} m = {:.3} L_pp", worst / l_pp);
}
