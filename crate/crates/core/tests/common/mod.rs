#![allow(dead_code)]

pub mod oracles;

use learned_iccbf::map::{exact_edf, sample_dataset_near_free, DistanceField, GridGeometry, OccupancyGrid};
use learned_iccbf::svr::{train, SvrHyperparams, SvrModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small ring road: 60 m square map, centerline radius 16 m, 8 m wide.
pub fn small_ring() -> OccupancyGrid {
    let g = GridGeometry::new(60, 60, 1.0, [-29.5, -29.5]).unwrap();
    OccupancyGrid::from_fn(g, |p| {
        let r = p[0].hypot(p[1]);
        !(12.0..=20.0).contains(&r)
    })
    .unwrap()
}

pub fn small_ring_model() -> (OccupancyGrid, DistanceField, SvrModel) {
    let grid = small_ring();
    let field = exact_edf(&grid);
    let data = sample_dataset_near_free(&grid, &field, 1, 1.0).unwrap();
    let model = train(&data, &SvrHyperparams::default()).unwrap();
    (grid, field, model)
}

/// Random expansion with support vectors in `[-5, 5]^2`.
pub fn random_model(n: usize, gamma: f64, seed: u64) -> SvrModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let svs = (0..n)
        .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
        .collect();
    let kappas = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    SvrModel::new(svs, kappas, 1.5, gamma).unwrap()
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
