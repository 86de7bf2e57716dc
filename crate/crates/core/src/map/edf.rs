//! Exact Euclidean distance transform.
//!
//! Two separable passes of the lower-envelope-of-parabolas transform run on
//! integer squared distances (in cell units), so the result is exact: the
//! value of every cell equals the distance from its center to the nearest
//! occupied cell center, without chamfer approximation.

use std::cmp::Ordering;

use super::grid::{GridGeometry, OccupancyGrid};
use crate::Point;

/// Squared cell distance for "no site on this line".
const UNREACHED: i64 = i64::MAX;

/// Per-cell distance (meters) to the nearest occupied cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl DistanceField {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.geometry.index(i, j)]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Bilinear interpolation between cell centers, clamped at the border.
    pub fn interpolate(&self, p: Point) -> f64 {
        let g = &self.geometry;
        let [u, v] = g.to_cell_coords(p);
        let u = u.clamp(0.0, (g.width - 1) as f64);
        let v = v.clamp(0.0, (g.height - 1) as f64);
        let i0 = (u.floor() as usize).min(g.width.saturating_sub(2));
        let j0 = (v.floor() as usize).min(g.height.saturating_sub(2));
        let i1 = (i0 + 1).min(g.width - 1);
        let j1 = (j0 + 1).min(g.height - 1);
        let (tu, tv) = (u - i0 as f64, v - j0 as f64);
        let a = self.at(i0, j0) * (1.0 - tu) + self.at(i1, j0) * tu;
        let b = self.at(i0, j1) * (1.0 - tu) + self.at(i1, j1) * tu;
        a * (1.0 - tv) + b * tv
    }
}

/// Exact EDF of `grid`; occupied cells get 0.
pub fn exact_edf(grid: &OccupancyGrid) -> DistanceField {
    let geometry = *grid.geometry();
    let squared = squared_cell_distances(grid);
    let values = squared
        .into_iter()
        .map(|sq| (sq as f64).sqrt() * geometry.resolution)
        .collect();
    DistanceField { geometry, values }
}

/// Squared distances in cell units to the nearest occupied cell.
pub fn squared_cell_distances(grid: &OccupancyGrid) -> Vec<i64> {
    let GridGeometry { width, height, .. } = *grid.geometry();
    let mut field: Vec<i64> = grid
        .cells()
        .iter()
        .map(|&occ| if occ { 0 } else { UNREACHED })
        .collect();

    let mut line = Vec::with_capacity(width.max(height));
    let mut out = vec![0i64; width.max(height)];
    let mut env = Envelope::with_capacity(width.max(height));

    // columns first, then rows
    for i in 0..width {
        line.clear();
        line.extend((0..height).map(|j| field[j * width + i]));
        env.transform(&line, &mut out[..height]);
        for j in 0..height {
            field[j * width + i] = out[j];
        }
    }
    for j in 0..height {
        let row = &mut field[j * width..(j + 1) * width];
        line.clear();
        line.extend_from_slice(row);
        env.transform(&line, &mut out[..width]);
        row.copy_from_slice(&out[..width]);
    }
    field
}

/// Boundary between two envelope parabolas, kept as an exact rational.
#[derive(Debug, Clone, Copy)]
enum Boundary {
    NegInf,
    At { num: i128, den: i128 },
    PosInf,
}

impl Boundary {
    fn cmp_rational(&self, num: i128, den: i128) -> Ordering {
        match *self {
            Boundary::NegInf => Ordering::Less,
            Boundary::PosInf => Ordering::Greater,
            Boundary::At { num: n, den: d } => (n * den).cmp(&(num * d)),
        }
    }
}

struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<Boundary>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
        }
    }

    /// 1-D squared distance transform: `out[x] = min_q (x - q)^2 + f[q]`.
    fn transform(&mut self, f: &[i64], out: &mut [i64]) {
        self.sites.clear();
        self.bounds.clear();
        self.bounds.push(Boundary::NegInf);

        for (q, &fq) in f.iter().enumerate() {
            if fq == UNREACHED {
                continue;
            }
            loop {
                let Some(&p) = self.sites.last() else { break };
                // intersection of the parabolas rooted at p and q
                let num = (fq as i128 + (q * q) as i128) - (f[p] as i128 + (p * p) as i128);
                let den = 2 * (q as i128 - p as i128);
                let last = *self.bounds.last().unwrap();
                if last.cmp_rational(num, den) != Ordering::Less {
                    self.sites.pop();
                    self.bounds.pop();
                } else {
                    self.bounds.push(Boundary::At { num, den });
                    break;
                }
            }
            if self.sites.is_empty() {
                // bounds still holds the -inf sentinel
                self.bounds.truncate(1);
            }
            self.sites.push(q);
        }

        if self.sites.is_empty() {
            out.fill(UNREACHED);
            return;
        }
        self.bounds.push(Boundary::PosInf);

        let mut k = 0;
        for (x, slot) in out.iter_mut().enumerate() {
            while self.bounds[k + 1].cmp_rational(x as i128, 1) == Ordering::Less {
                k += 1;
            }
            let v = self.sites[k];
            let dx = x as i64 - v as i64;
            *slot = dx * dx + f[v];
        }
    }
}
