use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::edf::{exact_edf, DistanceField};
use super::grid::OccupancyGrid;
use crate::error::{Error, Result};
use crate::Point;

pub const CSV_HEADER: &str = "x_m,y_m,d_m";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub z: Point,
    pub d: f64,
}

/// Training pairs `(z_i, d_i)` for the distance regressor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdfDataset {
    pub samples: Vec<Sample>,
}

impl EdfDataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        EdfDataset { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.samples.iter().map(|s| s.z)
    }

    pub fn targets(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.d)
    }

    pub fn subset(&self, indices: &[usize]) -> EdfDataset {
        EdfDataset::new(indices.iter().map(|&i| self.samples[i]).collect())
    }

    /// Samples with a positive distance, i.e. those lying in free space.
    pub fn free_only(&self) -> EdfDataset {
        EdfDataset::new(self.samples.iter().copied().filter(|s| s.d > 0.0).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.samples.len() + 16);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            // `{}` prints the shortest representation that parses back exactly
            let _ = writeln!(out, "{},{},{}", s.z[0], s.z[1], s.d);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::Csv {
                    line: 1,
                    reason: format!("expected header {CSV_HEADER:?}"),
                })
            }
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Csv {
                    line: idx + 1,
                    reason: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let mut vals = [0.0f64; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.trim().parse().map_err(|_| Error::Csv {
                    line: idx + 1,
                    reason: format!("not a number: {f:?}"),
                })?;
            }
            if vals.iter().any(|v| !v.is_finite()) || vals[2] < 0.0 {
                return Err(Error::Csv {
                    line: idx + 1,
                    reason: "distance must be finite and non-negative".into(),
                });
            }
            samples.push(Sample {
                z: [vals[0], vals[1]],
                d: vals[2],
            });
        }
        Ok(EdfDataset { samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

fn check_stride(field: &DistanceField, stride: usize) -> Result<()> {
    let g = field.geometry();
    if stride == 0 || stride > g.width || stride > g.height {
        return Err(Error::InvalidArgument(format!(
            "stride {stride} does not fit a {}x{} grid",
            g.width, g.height
        )));
    }
    Ok(())
}

/// Every `stride`-th cell center in both directions, row by row from the bottom.
pub fn sample_dataset(field: &DistanceField, stride: usize) -> Result<EdfDataset> {
    sample_where(field, stride, |_, _| true)
}

/// Like [`sample_dataset`], but occupied cells are kept only within `band`
/// meters of free space. Interior obstacle cells carry no information about
/// the boundary and would dominate the sample count on mostly-occupied maps.
pub fn sample_dataset_near_free(
    grid: &OccupancyGrid,
    field: &DistanceField,
    stride: usize,
    band: f64,
) -> Result<EdfDataset> {
    if grid.geometry() != field.geometry() {
        return Err(Error::InvalidArgument("grid and field geometries differ".into()));
    }
    if !(band >= 0.0) {
        return Err(Error::InvalidArgument(format!("band must be >= 0, got {band}")));
    }
    let to_free = exact_edf(&grid.inverted());
    sample_where(field, stride, |i, j| field.at(i, j) > 0.0 || to_free.at(i, j) <= band)
}

fn sample_where(
    field: &DistanceField,
    stride: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<EdfDataset> {
    check_stride(field, stride)?;
    let g = *field.geometry();
    let mut samples = Vec::new();
    for j in (0..g.height).step_by(stride) {
        for i in (0..g.width).step_by(stride) {
            if keep(i, j) {
                samples.push(Sample {
                    z: g.cell_center(i, j),
                    d: field.at(i, j),
                });
            }
        }
    }
    Ok(EdfDataset { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::grid::GridGeometry;

    fn field_3x3() -> (OccupancyGrid, DistanceField) {
        let geom = GridGeometry::new(3, 3, 1.0, [0.0, 0.0]).unwrap();
        let mut cells = vec![false; 9];
        cells[0] = true;
        let g = OccupancyGrid::new(geom, cells).unwrap();
        let f = exact_edf(&g);
        (g, f)
    }

    #[test]
    fn stride_one_is_exhaustive() {
        let (_, f) = field_3x3();
        assert_eq!(sample_dataset(&f, 1).unwrap().len(), 9);
        assert_eq!(sample_dataset(&f, 2).unwrap().len(), 4);
    }

    #[test]
    fn oversized_stride_is_rejected() {
        let (_, f) = field_3x3();
        assert!(sample_dataset(&f, 4).is_err());
        assert!(sample_dataset(&f, 0).is_err());
    }

    #[test]
    fn band_limits_occupied_samples() {
        let geom = GridGeometry::new(5, 1, 1.0, [0.0, 0.0]).unwrap();
        let g = OccupancyGrid::new(geom, vec![true, true, true, false, false]).unwrap();
        let f = exact_edf(&g);
        let ds = sample_dataset_near_free(&g, &f, 1, 1.0).unwrap();
        let xs: Vec<f64> = ds.points().map(|p| p[0]).collect();
        assert_eq!(xs, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = EdfDataset::new(vec![
            Sample { z: [0.1, -2.5], d: 1.0 / 3.0 },
            Sample { z: [1e-9, 149.5], d: 0.0 },
        ]);
        let text = ds.to_csv();
        assert!(text.starts_with("x_m,y_m,d_m\n"));
        assert_eq!(EdfDataset::from_csv(&text).unwrap(), ds);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = EdfDataset::from_csv("x_m,y_m,d_m\n1,2,3\n1,x,3\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
        assert!(EdfDataset::from_csv("a,b,c\n").is_err());
        assert!(EdfDataset::from_csv("x_m,y_m,d_m\n1,2,-1\n").is_err());
    }
}
