//! Map ingestion, exact distance transform and training-set extraction.

pub mod dataset;
pub mod edf;
pub mod grid;
pub mod track;

pub use dataset::{sample_dataset, sample_dataset_near_free, EdfDataset, Sample};
pub use edf::{exact_edf, squared_cell_distances, DistanceField};
pub use grid::{load_grid, load_grid_with_meta, GridGeometry, MapMeta, OccupancyGrid};
pub use track::TrackSpec;
