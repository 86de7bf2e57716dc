//! Builds the synthetic race track and writes it as a PGM map with its
//! resolution/origin sidecar.
//!
//!     cargo run --release --example make_track -- out/examples

use learned_iccbf::map::{load_grid, TrackSpec};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/examples".into());
    std::fs::create_dir_all(&out).unwrap();
    let spec = TrackSpec::default();
    let grid = spec.grid().unwrap();
    let path = std::path::Path::new(&out).join("track.pgm");
    grid.save(&path).unwrap();

    let g = grid.geometry();
    let (lo, hi) = g.extent();
    println!("{}x{} cells at {} m, extent {lo:?} .. {hi:?}", g.width, g.height, g.resolution);
    println!("{} of {} cells occupied", grid.occupied_count(), g.len());
    let (p, heading) = spec.centerline(0.0);
    println!("centerline starts at {p:?} heading {heading:.4} rad");

    // the sidecar restores the world frame on load
    let back = load_grid(&path, None).unwrap();
    assert_eq!(back, grid);
    println!("wrote {}", path.display());
}
