//! Level sets of the exact distance field as SVG contours.

use learned_iccbf::map::{exact_edf, TrackSpec};
use learned_iccbf::plot::{marching_squares, Lattice, SvgCanvas};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/examples".into());
    std::fs::create_dir_all(&out).unwrap();
    let grid = TrackSpec::default().grid().unwrap();
    let field = exact_edf(&grid);
    let g = grid.geometry();
    let lattice = Lattice {
        origin: g.cell_center(0, 0),
        spacing: g.resolution,
        nx: g.width,
        ny: g.height,
        values: field.values().to_vec(),
    };
    let (lo, hi) = g.extent();
    let mut canvas = SvgCanvas::new(lo, hi);
    canvas.segments(&marching_squares(&Lattice::occupancy(&grid), 0.5), "black", 0.6);
    for (level, color) in [(1.0, "#d95f02"), (3.0, "#7570b3"), (5.0, "#1b9e77")] {
        let segs = marching_squares(&lattice, level);
        println!("level {level} m: {} segments", segs.len());
        canvas.segments(&segs, color, 0.4);
    }
    let path = std::path::Path::new(&out).join("edf_contours.svg");
    std::fs::write(&path, canvas.finish()).unwrap();
    println!("wrote {}", path.display());
}
