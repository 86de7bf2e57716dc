//! Fits the distance regressor on the track and scores it on held-out samples.
//!
//!     cargo run --release --example train_svr

use std::time::Instant;

use learned_iccbf::map::{exact_edf, sample_dataset_near_free, TrackSpec};
use learned_iccbf::svr::{evaluate, residual_sigma, save_model, split_half, train_with, SvrHyperparams, TrainOptions};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/examples".into());
    std::fs::create_dir_all(&out).unwrap();
    let grid = TrackSpec::default().grid().unwrap();
    let field = exact_edf(&grid);
    let data = sample_dataset_near_free(&grid, &field, 1, 1.0).unwrap();
    let (train, valid) = split_half(&data, 0);

    let hp = SvrHyperparams::default();
    println!("C {} eps {} gamma {} length scale {} (kernel gamma {})", hp.c, hp.epsilon, hp.gamma, hp.length_scale, hp.kernel_gamma());
    let t0 = Instant::now();
    let fit = train_with(&train, &hp, &TrainOptions::default()).unwrap();
    println!(
        "{} pair updates, KKT gap {:e}, {:.1} s",
        fit.report.pair_updates,
        fit.report.kkt_violation,
        t0.elapsed().as_secs_f64()
    );

    let m = evaluate(&fit.model, &valid).unwrap();
    println!("validation: R2 {:.4}, max error {:.3} m, {} support vectors", m.r2, m.max_abs_error, m.n_sv);
    println!("residual sigma over free samples {:.4} m", residual_sigma(&fit.model, &data).unwrap());

    let path = std::path::Path::new(&out).join("track_model.txt");
    save_model(&fit.model, &path).unwrap();
    println!("wrote {}", path.display());
}
