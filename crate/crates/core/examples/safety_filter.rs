//! The barrier stack and the explicit filter at a few states on the track.

mod common;

use learned_iccbf::barrier::BarrierStack;
use learned_iccbf::vehicle::{VehicleParams, VehicleState};

fn main() {
    let t = common::track();
    let params = VehicleParams { speed: 3.0, ..VehicleParams::default() };
    let stack = BarrierStack::new(t.model, 1.0, [1.0, 1.0, 1.0], params).unwrap();

    let (p, heading) = t.spec.centerline(0.3);
    let cases = [
        ("centerline, straight", VehicleState::with_steering(p, heading, 0.0, &params).unwrap(), 0.0),
        ("centerline, turning in", VehicleState::with_steering(p, heading, 0.0, &params).unwrap(), 1.0),
        // pointed at the infield, 3 m from the inner edge
        ("facing the edge", VehicleState::with_steering([77.0, 0.0], std::f64::consts::PI, 0.0, &params).unwrap(), 0.0),
    ];
    for (name, s, u_nom) in cases {
        let d = stack.safety_filter(&s, u_nom).unwrap();
        println!("{name}:");
        println!("  h = [{:.3}, {:.3}, {:.3}], L_f h2 = {:.3}, L_g h2 = {:.3}", d.h[0], d.h[1], d.h[2], d.lie.0, d.lie.1);
        println!(
            "  u_nom {u_nom:+.3} -> u {:+.3}{}{}",
            d.u_applied,
            if d.overridden { " (override)" } else { "" },
            if d.violation > 0.0 { format!(", infeasible by {:.3}", d.violation) } else { String::new() }
        );
    }
}
