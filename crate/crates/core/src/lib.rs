//! Safety filtering for a kinematic bicycle on an occupancy map: exact
//! distance transform, RBF support-vector regression of the distance field,
//! a depth-two input-constrained control barrier function on the learned
//! field, and closed-loop simulation.
//!
//! Pipeline: [`map`] -> [`svr`] -> [`barrier`] (with [`vehicle`]) -> [`sim`].

pub mod barrier;
pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod map;
pub mod plot;
pub mod sim;
pub mod svr;
pub mod vehicle;

pub use error::{Error, Result};

/// Planar position in meters.
pub type Point = [f64; 2];
