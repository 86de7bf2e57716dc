//! Drives toward the infield from the track's start line with and without the
//! filter, then writes both trajectories and an SVG overlay.
//!
//!     cargo run --release --example closed_loop_sim

mod common;

use learned_iccbf::barrier::BarrierStack;
use learned_iccbf::plot::{overlay_svg, Lattice};
use learned_iccbf::sim::{rollout, safety_report, SimConfig};
use learned_iccbf::vehicle::{VehicleParams, VehicleState};

fn main() {
    let t = common::track();
    let out = common::out_dir();
    let params = VehicleParams { speed: 3.0, ..VehicleParams::default() };
    let stack = BarrierStack::new(t.model.clone(), 1.0, [1.0, 1.0, 1.0], params).unwrap();
    let cfg = SimConfig {
        initial_state: VehicleState::with_steering([80.0, 0.0], std::f64::consts::FRAC_PI_2, 0.0, &params).unwrap(),
        goal: t.spec.infield(),
        ..SimConfig::default()
    };

    let mut paths = Vec::new();
    for filter in [true, false] {
        let (traj, warning) = rollout(&cfg, &stack, Some(t.grid.geometry()), filter).unwrap();
        if let Some(w) = warning {
            println!("warning: {w}");
        }
        let r = safety_report(&traj, &t.field).unwrap();
        let tag = if filter { "filtered" } else { "unfiltered" };
        println!(
            "{tag}: min true distance {:.3} m, min h0 {:.3}, {} overrides, safe {}",
            r.min_true_distance,
            r.min_h0,
            r.overridden_steps,
            r.is_safe()
        );
        std::fs::write(out.join(format!("trajectory_{tag}.csv")), traj.to_csv()).unwrap();
        paths.push(traj.positions());
    }

    let learned = Lattice::learned_distance(&t.model, &t.grid, 2);
    let svg = overlay_svg(&t.grid, &learned, stack.beta(), &[(&paths[0], "#1f78b4"), (&paths[1], "#e7298a")], cfg.goal);
    let path = out.join("closed_loop.svg");
    std::fs::write(&path, svg).unwrap();
    println!("wrote {}", path.display());
}
