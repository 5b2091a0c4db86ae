//! Carry the fitted force model from the 3 m model to a larger hull.

use nalgebra::Vector2;
use vtps::force_model::{
    inflow_velocity, nondimensionalize, redimensionalize, scale_model, scaling_factor,
    FullForceModel, ScalingParams,
};

fn main() -> vtps::Result<()> {
    let model = ScalingParams::new(1000.0, 0.0045, 1.1, 0.35, 1.2, 0.12, 10.0)?;
    let ship = ScalingParams::new(1025.0, 1.8, 1.1, 0.35, 1.2, 2.4, 2.2)?;

    let base = FullForceModel::reference();
    let k = scaling_factor(&model, &ship)?;
    let scaled = scale_model(&base, k)?;

    println!(
        "inflow speed: model {:.3} m/s, ship {:.3} m/s",
        inflow_velocity(&model),
        inflow_velocity(&ship)
    );
    println!("force scale factor {k:.1}");
    println!("V~ model {:.4}", base.rudder.v_tilde());
    println!("V~ ship  {:.2}", scaled.rudder.v_tilde());
    println!(
        "hover angle model ({:.2}, {:.2}), ship ({:.2}, {:.2})",
        base.hover_angle()[0],
        base.hover_angle()[1],
        scaled.hover_angle()[0],
        scaled.hover_angle()[1]
    );

    let f_model = base.rudder.forces_from_relative(&Vector2::new(-20.0, 25.0));
    let coeff = nondimensionalize(&f_model, &model)?;
    let f_ship = redimensionalize(&coeff, &ship)?;
    println!(
        "crash-stop-like deflection: model ({:.3}, {:.3}) N -> C = ({:.4}, {:.4}) -> ship ({:.0}, {:.0}) N",
        f_model[0], f_model[1], coeff[0], coeff[1], f_ship[0], f_ship[1]
    );
    Ok(())
}
