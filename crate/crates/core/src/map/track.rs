//! Synthetic closed race track used by the examples and the acceptance suite.

use super::grid::{GridGeometry, OccupancyGrid};
use crate::error::Result;
use crate::Point;

/// Elliptical road ring centered in a square map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSpec {
    /// Map side length in cells.
    pub cells: usize,
    pub resolution: f64,
    /// Semi-axes of the road centerline (meters).
    pub radii: Point,
    /// Road width (meters).
    pub width: f64,
}

impl Default for TrackSpec {
    /// 300 m x 300 m at 1 m resolution with a 12 m wide ring.
    fn default() -> Self {
        TrackSpec {
            cells: 300,
            resolution: 1.0,
            radii: [80.0, 55.0],
            width: 12.0,
        }
    }
}

impl TrackSpec {
    pub fn geometry(&self) -> Result<GridGeometry> {
        let c = -0.5 * (self.cells as f64 - 1.0) * self.resolution;
        GridGeometry::new(self.cells, self.cells, self.resolution, [c, c])
    }

    /// A point is on the road if it lies inside the outer ellipse and outside the inner one.
    pub fn on_road(&self, p: Point) -> bool {
        let h = 0.5 * self.width;
        let outer = (p[0] / (self.radii[0] + h)).powi(2) + (p[1] / (self.radii[1] + h)).powi(2);
        let inner = (p[0] / (self.radii[0] - h)).powi(2) + (p[1] / (self.radii[1] - h)).powi(2);
        outer <= 1.0 && inner >= 1.0
    }

    pub fn grid(&self) -> Result<OccupancyGrid> {
        OccupancyGrid::from_fn(self.geometry()?, |p| !self.on_road(p))
    }

    /// Centerline point at parameter `t` and the counter-clockwise heading there.
    pub fn centerline(&self, t: f64) -> (Point, f64) {
        let [rx, ry] = self.radii;
        let p = [rx * t.cos(), ry * t.sin()];
        let heading = (ry * t.cos()).atan2(-rx * t.sin());
        (p, heading)
    }

    /// Center of the hole enclosed by the ring (off-road).
    pub fn infield(&self) -> Point {
        [0.0, 0.0]
    }
}
