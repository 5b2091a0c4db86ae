//! Fit the rudder force model to bollard-pull force data and inspect it.
//!
//! ```text
//! cargo run --example fit_force_model [-- forces.csv]
//! ```

use nalgebra::Vector2;
use vtps::force_model::{
    cfd_forces, fit_rudder_model, linearity_diagnostic, load_samples, BowThrusterModel,
};

fn main() -> vtps::Result<()> {
    let samples = match std::env::args().nth(1) {
        Some(path) => load_samples(path)?,
        None => cfd_forces(),
    };
    let model = fit_rudder_model(&samples)?;
    let v = model.v_tilde();
    let h = model.hover_angle();
    println!("V~     = [{:8.4} {:8.4}]", v[(0, 0)], v[(0, 1)]);
    println!("         [{:8.4} {:8.4}]", v[(1, 0)], v[(1, 1)]);
    println!(
        "f_itcp = [{:8.4} {:8.4}] N",
        model.f_itcp()[0],
        model.f_itcp()[1]
    );
    println!("hover  = ({:.2}, {:.2}) deg", h[0], h[1]);

    let report = linearity_diagnostic(&model, &samples).expect("non-empty sample set");
    println!("\n delta_p  delta_s    X_CT   X_fit    Y_CT   Y_fit");
    for s in &samples {
        let f = model.rudder_forces(&Vector2::new(s.delta_p, s.delta_s));
        println!(
            "{:8.1} {:8.1} {:7.3} {:7.3} {:7.3} {:7.3}",
            s.delta_p, s.delta_s, s.x_ct, f[0], s.y_ct, f[1]
        );
    }
    println!(
        "max |residual| = ({:.4}, {:.4}) N, mean = ({:.4}, {:.4}) N",
        report.max[0], report.max[1], report.mean[0], report.mean[1]
    );

    let bow = BowThrusterModel::default();
    for n in [-27.0, -13.5, 0.0, 13.5, 27.0] {
        println!("bow n_B = {n:6.1} rps -> Y_B = {:+.4} N", bow.force(n)?);
    }
    Ok(())
}
