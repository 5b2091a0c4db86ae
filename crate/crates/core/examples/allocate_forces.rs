//! Map required surge/sway/yaw forces to rudder angles and bow thruster
//! revolution, then check what the actuators actually deliver.

use nalgebra::Vector3;
use vtps::allocation::{to_physical, ActuatorLayout, ActuatorLimits, Allocator, ForceLimits};
use vtps::command::ActuatorCommand;
use vtps::force_model::{signed_square, FullForceModel};

fn main() -> vtps::Result<()> {
    let model = FullForceModel::reference();
    let layout = ActuatorLayout::default();
    let alloc = Allocator::new(&layout, &model)?;
    let limits = ActuatorLimits::vtps();
    let h = model.hover_angle();
    let hover = ActuatorCommand::new(h[0], h[1], 0.0);

    println!("Z = T V =\n{:.5}", alloc.z());

    let demands = [
        (0.0, 0.0, 0.0),
        (-1.5, 0.0, 0.0),
        (0.8, 0.0, 0.0),
        (0.0, 0.5, 0.0),
        (0.0, 0.0, 0.5),
        (-0.4, -0.3, 0.2),
        (3.0, 0.0, 0.0),
    ];
    println!("\n   X_req   Y_req   N_req | delta_p delta_s    n_B |   X_out   Y_out   N_out");
    for (x, y, n) in demands {
        let (f, sat) = ForceLimits::default().saturate(&Vector3::new(x, y, n));
        let u = alloc.allocate(&f);
        // A long step lets the rudders reach the target from hover.
        let cmd = to_physical(&u, &model, &limits, &hover, 10.0);
        let delivered = model.command_to_forces(&vtps::command::ModifiedCommand::new(
            cmd.delta_p - h[0],
            cmd.delta_s - h[1],
            signed_square(cmd.n_b),
        ));
        let tau = layout.configuration_matrix() * delivered.as_vector();
        println!(
            "{:7.2} {:7.2} {:7.2} | {:7.2} {:7.2} {:6.2} | {:7.3} {:7.3} {:7.3}{}",
            x,
            y,
            n,
            cmd.delta_p,
            cmd.delta_s,
            cmd.n_b,
            tau[0],
            tau[1],
            tau[2],
            if sat.any() { "  (saturated)" } else { "" }
        );
    }

    let mut previous = hover;
    println!("\nslewing to full astern from hover at 23 deg/s:");
    let u = alloc.allocate(&vtps::allocation::RequiredForces::new(-1.5, 0.0, 0.0));
    for k in 1..=8 {
        previous = to_physical(&u, &model, &limits, &previous, 0.1);
        println!(
            "  t = {:.1} s  delta = ({:.2}, {:.2})",
            k as f64 * 0.1,
            previous.delta_p,
            previous.delta_s
        );
    }
    Ok(())
}
