#![allow(dead_code)]

use std::path::PathBuf;

use learned_iccbf::map::{exact_edf, sample_dataset_near_free, DistanceField, OccupancyGrid, TrackSpec};
use learned_iccbf::svr::{load_model, save_model, split_half, train_with, SvrHyperparams, SvrModel, TrainOptions};

/// Output directory for example artifacts (first CLI argument, default `out/examples`).
pub fn out_dir() -> PathBuf {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out/examples"));
    std::fs::create_dir_all(&dir).expect("create output directory");
    dir
}

pub struct Track {
    pub spec: TrackSpec,
    pub grid: OccupancyGrid,
    pub field: DistanceField,
    pub model: SvrModel,
}

/// Built-in track with a model fitted on half of its near-free samples.
/// The fit takes about half a minute, so it is cached next to the outputs.
pub fn track() -> Track {
    let spec = TrackSpec::default();
    let grid = spec.grid().unwrap();
    let field = exact_edf(&grid);
    let cache = out_dir().join("track_model.txt");
    let model = match load_model(&cache) {
        Ok(m) => m,
        Err(_) => {
            eprintln!("fitting the track model (cached at {})", cache.display());
            let data = sample_dataset_near_free(&grid, &field, 1, 1.0).unwrap();
            let (train, _) = split_half(&data, 0);
            let fit = train_with(&train, &SvrHyperparams::default(), &TrainOptions::default()).unwrap();
            save_model(&fit.model, &cache).unwrap();
            fit.model
        }
    };
    Track { spec, grid, field, model }
}
