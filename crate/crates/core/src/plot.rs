//! Minimal SVG output: level-set contours by marching squares, polylines for
//! trajectories, and a goal marker.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::map::OccupancyGrid;
use crate::svr::SvrModel;
use crate::Point;

/// Scalar samples on a regular lattice of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub origin: Point,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major from the bottom row, `values[j * nx + i]`.
    pub values: Vec<f64>,
}

impl Lattice {
    pub fn from_fn(origin: Point, spacing: f64, nx: usize, ny: usize, f: impl Fn(Point) -> f64 + Sync) -> Self {
        let values = (0..nx * ny)
            .into_par_iter()
            .map(|k| f([origin[0] + (k % nx) as f64 * spacing, origin[1] + (k / nx) as f64 * spacing]))
            .collect();
        Lattice {
            origin,
            spacing,
            nx,
            ny,
            values,
        }
    }

    /// 1 on occupied cells and 0 on free ones, contoured at 0.5.
    pub fn occupancy(grid: &OccupancyGrid) -> Self {
        let g = grid.geometry();
        Lattice {
            origin: g.cell_center(0, 0),
            spacing: g.resolution,
            nx: g.width,
            ny: g.height,
            values: grid.cells().iter().map(|&o| if o { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Learned distance sampled every `stride` cells of `grid`.
    pub fn learned_distance(model: &SvrModel, grid: &OccupancyGrid, stride: usize) -> Self {
        let g = grid.geometry();
        let stride = stride.max(1);
        Lattice::from_fn(
            g.cell_center(0, 0),
            g.resolution * stride as f64,
            (g.width - 1) / stride + 1,
            (g.height - 1) / stride + 1,
            |p| model.predict(p),
        )
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn node(&self, i: usize, j: usize) -> Point {
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }
}

/// Line segments of the `level` set.
pub fn marching_squares(lat: &Lattice, level: f64) -> Vec<[Point; 2]> {
    let mut out = Vec::new();
    if lat.nx < 2 || lat.ny < 2 {
        return out;
    }
    let lerp = |a: Point, b: Point, va: f64, vb: f64| {
        let t = if vb == va { 0.5 } else { ((level - va) / (vb - va)).clamp(0.0, 1.0) };
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };
    for j in 0..lat.ny - 1 {
        for i in 0..lat.nx - 1 {
            // corners counter-clockwise from bottom-left
            let p = [lat.node(i, j), lat.node(i + 1, j), lat.node(i + 1, j + 1), lat.node(i, j + 1)];
            let v = [lat.at(i, j), lat.at(i + 1, j), lat.at(i + 1, j + 1), lat.at(i, j + 1)];
            let mut case = 0;
            for (k, &vk) in v.iter().enumerate() {
                if vk >= level {
                    case |= 1 << k;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            // edge k joins corner k and corner k+1
            let e = |k: usize| lerp(p[k], p[(k + 1) % 4], v[k], v[(k + 1) % 4]);
            let crossing: Vec<usize> = (0..4).filter(|&k| ((case >> k) & 1) != ((case >> ((k + 1) % 4)) & 1)).collect();
            if crossing.len() == 2 {
                out.push([e(crossing[0]), e(crossing[1])]);
            } else {
                // saddle: resolve with the cell average
                let center_high = v.iter().sum::<f64>() / 4.0 >= level;
                let corner0_high = case & 1 == 1;
                if center_high == corner0_high {
                    out.push([e(0), e(1)]);
                    out.push([e(2), e(3)]);
                } else {
                    out.push([e(3), e(0)]);
                    out.push([e(1), e(2)]);
                }
            }
        }
    }
    out
}

/// SVG canvas in world coordinates (meters, y up).
pub struct SvgCanvas {
    lo: Point,
    hi: Point,
    body: String,
}

impl SvgCanvas {
    pub fn new(lo: Point, hi: Point) -> Self {
        SvgCanvas {
            lo,
            hi,
            body: String::new(),
        }
    }

    fn map(&self, p: Point) -> Point {
        [p[0] - self.lo[0], self.hi[1] - p[1]]
    }

    pub fn segments(&mut self, segs: &[[Point; 2]], color: &str, width: f64) -> &mut Self {
        if segs.is_empty() {
            return self;
        }
        let mut d = String::new();
        for s in segs {
            let (a, b) = (self.map(s[0]), self.map(s[1]));
            let _ = write!(d, "M{:.3} {:.3}L{:.3} {:.3}", a[0], a[1], b[0], b[1]);
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" stroke="{color}" stroke-width="{width}" fill="none"/>"#
        );
        self
    }

    pub fn polyline(&mut self, pts: &[Point], color: &str, width: f64) -> &mut Self {
        if pts.is_empty() {
            return self;
        }
        let mut s = String::new();
        for p in pts {
            let q = self.map(*p);
            let _ = write!(s, "{:.3},{:.3} ", q[0], q[1]);
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" stroke="{color}" stroke-width="{width}" fill="none"/>"#,
            s.trim_end()
        );
        self
    }

    pub fn marker(&mut self, p: Point, radius: f64, color: &str) -> &mut Self {
        let q = self.map(p);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{radius}" fill="{color}"/>"#,
            q[0], q[1]
        );
        self
    }

    pub fn finish(&self) -> String {
        let (w, h) = (self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{}\" height=\"{}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            (w * 3.0).round(),
            (h * 3.0).round(),
            self.body
        )
    }
}

/// Map boundary, learned `beta` level set, paths and goal in one figure.
pub fn overlay_svg(
    grid: &OccupancyGrid,
    learned: &Lattice,
    beta: f64,
    paths: &[(&[Point], &str)],
    goal: Point,
) -> String {
    let (lo, hi) = grid.geometry().extent();
    let mut c = SvgCanvas::new(lo, hi);
    c.segments(&marching_squares(&Lattice::occupancy(grid), 0.5), "black", 0.6);
    c.segments(&marching_squares(learned, beta), "#d95f02", 0.4);
    for (pts, color) in paths {
        c.polyline(pts, color, 0.5);
    }
    c.marker(goal, 1.5, "#1b9e77");
    c.finish()
}
