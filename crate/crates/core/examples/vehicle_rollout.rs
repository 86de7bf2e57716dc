//! Open-loop bicycle model: a sinusoidal steering-rate input with the
//! steering angle kept inside its bound by the sigmoid reparameterization.

use learned_iccbf::vehicle::{step_rk4, VehicleParams, VehicleState};

fn main() {
    let p = VehicleParams::default();
    let mut s = VehicleState::new(0.0, 0.0, 0.0, 0.0);
    let dt = 0.05;
    let mut widest: f64 = 0.0;
    println!("{:>5} {:>8} {:>8} {:>7} {:>7}", "t", "x", "y", "theta", "delta");
    for k in 0..=200 {
        let t = k as f64 * dt;
        if k % 20 == 0 {
            println!("{t:>5.1} {:>8.2} {:>8.2} {:>7.3} {:>7.3}", s.x, s.y, s.theta, s.steering(&p));
        }
        // saturating input: delta approaches but never reaches delta_max
        let u = if t < 5.0 { p.u_max } else { -p.u_max * (t - 5.0).cos() };
        s = step_rk4(&s, u, dt, &p);
        widest = widest.max(s.steering(&p).abs());
    }
    println!("closest approach to delta_max: {:e} rad", p.delta_max - widest);
}
