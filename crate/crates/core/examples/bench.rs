//! Times the batched filter against the per-entry reference on 1000 random
//! states of the track.
//!
//!     cargo run --release --example bench

mod common;

use learned_iccbf::barrier::BarrierStack;
use learned_iccbf::bench::{compare, sample_cases};
use learned_iccbf::vehicle::VehicleParams;

fn main() {
    let t = common::track();
    let params = VehicleParams { speed: 3.0, ..VehicleParams::default() };
    let stack = BarrierStack::new(t.model, 1.0, [1.0, 1.0, 1.0], params).unwrap();
    let cases = sample_cases(&t.grid, &params, 1000, 0).unwrap();
    let report = compare(&stack, &cases).unwrap();
    print!("{}", report.to_text());
}
