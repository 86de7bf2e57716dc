//! Exact distance field of the track and the training set sampled from it.

use learned_iccbf::map::{exact_edf, sample_dataset, sample_dataset_near_free, TrackSpec};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/examples".into());
    std::fs::create_dir_all(&out).unwrap();
    let grid = TrackSpec::default().grid().unwrap();
    let field = exact_edf(&grid);
    println!("max distance {:.3} m", field.max_value());
    for p in [[80.0, 0.0], [86.0, 0.0], [90.0, 0.0], [0.0, 0.0]] {
        println!("d({p:?}) = {:.3}", field.interpolate(p));
    }

    // every cell, and only cells within 1 m of free space
    let full = sample_dataset(&field, 1).unwrap();
    let near = sample_dataset_near_free(&grid, &field, 1, 1.0).unwrap();
    println!("{} samples on the full grid, {} near free space", full.len(), near.len());

    let path = std::path::Path::new(&out).join("edf.csv");
    near.save(&path).unwrap();
    println!("wrote {}", path.display());
}
