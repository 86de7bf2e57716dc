//! ε-support-vector regression of the distance field with an RBF kernel.

pub mod cv;
pub mod io;
pub mod kernel;
pub mod model;
pub mod smo;

pub use cv::{evaluate, grid_search_cv, r2_score, residual_sigma, split_half, CvResult, HyperGrid, Metrics};
pub use io::{load_model, save_model};
pub use kernel::kernel;
pub use model::{DerivativeBundle, SvrModel};
pub use smo::{train, train_with, SvrHyperparams, TrainOptions, TrainReport, Trained};
