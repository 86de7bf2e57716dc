use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Point;

/// Default gray level at or below which a pixel counts as occupied.
pub const DEFAULT_THRESHOLD: u8 = 128;

/// Placement of a regular grid in the plane.
///
/// Cell `(i, j)` has its center at `origin + (i, j) * resolution`: `i` grows
/// to the right and `j` grows upward. Image rows are flipped on load so that
/// image row 0 (the top) becomes the last grid row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: Point,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Point) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::NonFinite("grid origin"));
        }
        Ok(GridGeometry {
            width,
            height,
            resolution,
            origin,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + i as f64 * self.resolution,
            self.origin[1] + j as f64 * self.resolution,
        ]
    }

    /// Axis-aligned extent covered by the cells, `([x_min, y_min], [x_max, y_max])`.
    pub fn extent(&self) -> (Point, Point) {
        let half = 0.5 * self.resolution;
        (
            [self.origin[0] - half, self.origin[1] - half],
            [
                self.origin[0] + (self.width as f64 - 0.5) * self.resolution,
                self.origin[1] + (self.height as f64 - 0.5) * self.resolution,
            ],
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        let (lo, hi) = self.extent();
        p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]
    }

    /// Continuous cell coordinates of `p` (cell centers sit on integers).
    #[inline]
    pub fn to_cell_coords(&self, p: Point) -> [f64; 2] {
        [
            (p[0] - self.origin[0]) / self.resolution,
            (p[1] - self.origin[1]) / self.resolution,
        ]
    }
}

/// Sidecar metadata stored next to a map image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapMeta {
    pub resolution: f64,
    pub origin: Point,
    pub threshold: u8,
}

impl Default for MapMeta {
    fn default() -> Self {
        MapMeta {
            resolution: 1.0,
            origin: [0.0, 0.0],
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl MapMeta {
    /// Parses `key = value` (or `key: value`) lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = MapMeta::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| {
                    Error::MalformedMap(format!("metadata line {}: expected key = value", lineno + 1))
                })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::MalformedMap(format!("metadata line {}: bad {what} {value:?}", lineno + 1))
            };
            match key {
                "resolution_m" => meta.resolution = value.parse().map_err(|_| bad(key))?,
                "origin_x" => meta.origin[0] = value.parse().map_err(|_| bad(key))?,
                "origin_y" => meta.origin[1] = value.parse().map_err(|_| bad(key))?,
                "threshold" => meta.threshold = value.parse().map_err(|_| bad(key))?,
                other => {
                    return Err(Error::MalformedMap(format!(
                        "metadata line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(meta)
    }

    pub fn to_text(&self) -> String {
        format!(
            "# map metadata: cell (0,0) is the bottom-left pixel\nresolution_m = {}\norigin_x = {}\norigin_y = {}\nthreshold = {}\n",
            self.resolution, self.origin[0], self.origin[1], self.threshold
        )
    }

    /// Sidecar location for a map image: same path with a `.meta` extension.
    pub fn sidecar_path(map: &Path) -> std::path::PathBuf {
        map.with_extension("meta")
    }
}

/// Occupancy grid; `true` marks an occupied cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(geometry: GridGeometry, occupied: Vec<bool>) -> Result<Self> {
        if occupied.len() != geometry.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} cells, got {}",
                geometry.len(),
                occupied.len()
            )));
        }
        let n_occ = occupied.iter().filter(|&&o| o).count();
        if n_occ == 0 {
            return Err(Error::DegenerateGrid("no occupied cell"));
        }
        if n_occ == occupied.len() {
            return Err(Error::DegenerateGrid("no free cell"));
        }
        Ok(OccupancyGrid { geometry, occupied })
    }

    /// Builds a grid by evaluating `is_occupied` at every cell center.
    pub fn from_fn(geometry: GridGeometry, mut is_occupied: impl FnMut(Point) -> bool) -> Result<Self> {
        let mut cells = Vec::with_capacity(geometry.len());
        for j in 0..geometry.height {
            for i in 0..geometry.width {
                cells.push(is_occupied(geometry.cell_center(i, j)));
            }
        }
        Self::new(geometry, cells)
    }

    /// Thresholds 8-bit gray levels given in image order (row 0 at the top).
    pub fn from_gray(
        width: usize,
        height: usize,
        pixels: &[u8],
        resolution: f64,
        origin: Point,
        threshold: u8,
    ) -> Result<Self> {
        let geometry = GridGeometry::new(width, height, resolution, origin)?;
        if pixels.len() != width * height {
            return Err(Error::MalformedMap(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        let mut cells = Vec::with_capacity(pixels.len());
        for j in 0..height {
            let row = height - 1 - j;
            cells.extend(pixels[row * width..(row + 1) * width].iter().map(|&g| g <= threshold));
        }
        Self::new(geometry, cells)
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        self.occupied[self.geometry.index(i, j)]
    }

    /// Occupancy of the cell containing `p`, `None` off the map.
    pub fn occupied_at(&self, p: Point) -> Option<bool> {
        if !self.geometry.contains(p) {
            return None;
        }
        let [ci, cj] = self.geometry.to_cell_coords(p);
        let i = (ci.round().max(0.0) as usize).min(self.geometry.width - 1);
        let j = (cj.round().max(0.0) as usize).min(self.geometry.height - 1);
        Some(self.is_occupied(i, j))
    }

    pub fn cells(&self) -> &[bool] {
        &self.occupied
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Free cells become occupied and vice versa.
    pub fn inverted(&self) -> Self {
        OccupancyGrid {
            geometry: self.geometry,
            occupied: self.occupied.iter().map(|o| !o).collect(),
        }
    }

    /// Gray image in image order: occupied cells black, free cells white.
    pub fn to_gray(&self) -> Vec<u8> {
        let GridGeometry { width, height, .. } = self.geometry;
        let mut out = Vec::with_capacity(width * height);
        for row in 0..height {
            let j = height - 1 - row;
            out.extend((0..width).map(|i| if self.is_occupied(i, j) { 0 } else { 255 }));
        }
        out
    }

    /// Writes the grid as a binary graymap (or PNG, by extension) plus its sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let GridGeometry { width, height, .. } = self.geometry;
        let img = image::GrayImage::from_raw(width as u32, height as u32, self.to_gray())
            .expect("buffer size matches dimensions");
        img.save(path)
            .map_err(|e| Error::MalformedMap(format!("{}: {e}", path.display())))?;
        let meta = MapMeta {
            resolution: self.geometry.resolution,
            origin: self.geometry.origin,
            threshold: DEFAULT_THRESHOLD,
        };
        let sidecar = MapMeta::sidecar_path(path);
        fs::write(&sidecar, meta.to_text()).map_err(|e| Error::io(sidecar, e))
    }
}

/// Reads a graymap (P2/P5) or single-channel PNG.
///
/// Geometry comes from the `.meta` sidecar when one exists, otherwise a
/// 1 m grid with cell (0,0) at the origin is assumed. `threshold` wins over
/// the sidecar's threshold.
pub fn load_grid(path: &Path, threshold: Option<u8>) -> Result<OccupancyGrid> {
    let sidecar = MapMeta::sidecar_path(path);
    let mut meta = if sidecar.exists() {
        let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        MapMeta::parse(&text)?
    } else {
        MapMeta::default()
    };
    if let Some(t) = threshold {
        meta.threshold = t;
    }
    load_grid_with_meta(path, &meta)
}

pub fn load_grid_with_meta(path: &Path, meta: &MapMeta) -> Result<OccupancyGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = image::load_from_memory(&bytes)
        .map_err(|e| Error::MalformedMap(format!("{}: {e}", path.display())))?;
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    OccupancyGrid::from_gray(
        w as usize,
        h as usize,
        gray.as_raw(),
        meta.resolution,
        meta.origin,
        meta.threshold,
    )
}
