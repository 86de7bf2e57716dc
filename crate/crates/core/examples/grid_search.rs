//! Cross-validated hyperparameter search on a coarse subsample of the track.

use learned_iccbf::map::{exact_edf, sample_dataset_near_free, TrackSpec};
use learned_iccbf::svr::{grid_search_cv, HyperGrid, TrainOptions};

fn main() {
    let grid = TrackSpec::default().grid().unwrap();
    let field = exact_edf(&grid);
    // every other cell keeps this to a few seconds
    let data = sample_dataset_near_free(&grid, &field, 2, 1.0).unwrap();
    let hg = HyperGrid {
        c: vec![1.0, 7.0],
        epsilon: vec![0.1],
        gamma: vec![10.0, 30.0, 90.0],
        length_scale: 20.0,
    };
    let cv = grid_search_cv(&data, &hg, 3, 0, &TrainOptions::default()).unwrap();
    println!("{:>6} {:>6} {:>6} {:>9} {:>8}", "C", "eps", "gamma", "mean R2", "mean SV");
    for row in &cv.table {
        let h = row.hyperparams;
        println!("{:>6} {:>6} {:>6} {:>9.5} {:>8.1}", h.c, h.epsilon, h.gamma, row.mean_r2, row.mean_n_sv);
    }
    println!("best: C {} gamma {} (R2 {:.5})", cv.best.c, cv.best.gamma, cv.score);
}
