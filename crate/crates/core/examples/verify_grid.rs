//! Samples the barrier condition over positions, headings and steering angles
//! on the free cells of the track.

mod common;

use learned_iccbf::barrier::{BarrierStack, GridRegion};
use learned_iccbf::vehicle::VehicleParams;

fn main() {
    let t = common::track();
    let params = VehicleParams { speed: 3.0, ..VehicleParams::default() };
    let stack = BarrierStack::new(t.model, 1.0, [1.0, 1.0, 1.0], params).unwrap();
    let region = GridRegion::covering(t.grid.geometry(), 3, 16, 5, params.delta_max);
    let report = stack.verify_on_grid_where(&region, |p| t.grid.occupied_at(p) == Some(false)).unwrap();
    println!("{}", report.summary());

    // the worst sampled states
    let mut rows: Vec<_> = report.rows.iter().filter(|r| r.violates()).collect();
    rows.sort_by(|a, b| a.sup_residual.total_cmp(&b.sup_residual));
    for r in rows.iter().take(5) {
        let s = r.state;
        println!(
            "  ({:.1}, {:.1}) theta {:.2} delta {:.2}: best residual {:.3}",
            s.x,
            s.y,
            s.theta,
            s.steering(&params),
            r.sup_residual
        );
    }
}
