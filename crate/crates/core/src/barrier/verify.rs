use rayon::prelude::*;

use super::{BarrierStack, OVERRIDE_TOLERANCE};
use crate::error::{Error, Result};
use crate::map::GridGeometry;
use crate::vehicle::{inverse_sigmoid, VehicleState};
use crate::Point;

/// Uniform samples `lo, ..., hi` (`n == 1` gives `lo`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Axis { lo, hi, n }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Sampled box of states: positions on a grid, headings, and steering
/// angles (converted to `zeta`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    pub x: Axis,
    pub y: Axis,
    pub theta: Axis,
    pub delta: Axis,
}

impl GridRegion {
    /// Every position of `geometry` at `stride` cells, `n_theta` headings on
    /// `[-pi, pi)` and `n_delta` steering angles within 90% of `delta_max`.
    pub fn covering(geometry: &GridGeometry, stride: usize, n_theta: usize, n_delta: usize, delta_max: f64) -> Self {
        let stride = stride.max(1);
        let nx = (geometry.width - 1) / stride + 1;
        let ny = (geometry.height - 1) / stride + 1;
        let step = geometry.resolution * stride as f64;
        let c0 = geometry.cell_center(0, 0);
        let pi = std::f64::consts::PI;
        let theta_hi = -pi + std::f64::consts::TAU * n_theta.saturating_sub(1) as f64 / n_theta.max(1) as f64;
        GridRegion {
            x: Axis::new(c0[0], c0[0] + step * (nx - 1) as f64, nx),
            y: Axis::new(c0[1], c0[1] + step * (ny - 1) as f64, ny),
            theta: Axis::new(-pi, theta_hi, n_theta),
            delta: Axis::new(-0.9 * delta_max, 0.9 * delta_max, n_delta),
        }
    }

    pub fn len(&self) -> usize {
        self.x.n * self.y.n * self.theta.n * self.delta.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Errors if any sampled position falls outside the map extent.
    pub fn check_within(&self, geometry: &GridGeometry) -> Result<()> {
        let (lo, hi) = geometry.extent();
        let inside = |a: &Axis, k: usize| {
            a.values().iter().all(|&v| v >= lo[k] && v <= hi[k])
        };
        if inside(&self.x, 0) && inside(&self.y, 1) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("verification region leaves the map extent".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityRow {
    pub state: VehicleState,
    pub h: [f64; 3],
    /// `max over u in {-u_max, u_max}` of `L_f h2 + L_g h2 u + a2 h2`.
    pub sup_residual: f64,
}

impl ValidityRow {
    pub fn in_safe_set(&self) -> bool {
        self.h.iter().all(|&h| h >= 0.0)
    }

    pub fn violates(&self) -> bool {
        self.in_safe_set() && self.sup_residual < -OVERRIDE_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub sampled: usize,
    pub in_safe_set: usize,
    pub violations: usize,
    pub worst_residual: f64,
    /// Rows for every state inside the safe set, in sampling order.
    pub rows: Vec<ValidityRow>,
}

impl ValidityReport {
    pub fn safe_fraction(&self) -> f64 {
        self.in_safe_set as f64 / self.sampled as f64
    }

    /// No sampled state lies in the safe set, so the check says nothing.
    pub fn is_vacuous(&self) -> bool {
        self.in_safe_set == 0
    }

    pub fn summary(&self) -> String {
        if self.is_vacuous() {
            format!("validity: sampled={} in_safe_set=0 vacuous", self.sampled)
        } else {
            format!(
                "validity: sampled={} in_safe_set={} fraction={:.6} violations={} worst_sup_residual={:.6e}",
                self.sampled,
                self.in_safe_set,
                self.safe_fraction(),
                self.violations,
                self.worst_residual
            )
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_f,y_f,theta,zeta,h0,h1,h2,sup_residual\n");
        for r in &self.rows {
            let s = r.state;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.x, s.y, s.theta, s.zeta, r.h[0], r.h[1], r.h[2], r.sup_residual
            ));
        }
        out
    }
}

impl BarrierStack {
    /// Checks the barrier condition with the best admissible input at every
    /// sampled state of the safe set. The constraint is affine in `u`, so the
    /// two endpoint inputs cover the whole interval.
    pub fn verify_on_grid(&self, region: &GridRegion) -> Result<ValidityReport> {
        self.verify_on_grid_where(region, |_| true)
    }

    /// [`verify_on_grid`](Self::verify_on_grid) restricted to sampled
    /// positions accepted by `keep` (for example the free cells of the map,
    /// since far from its training data the regressor relaxes to its bias).
    pub fn verify_on_grid_where(
        &self,
        region: &GridRegion,
        keep: impl Fn(Point) -> bool,
    ) -> Result<ValidityReport> {
        if region.is_empty() {
            return Err(Error::Empty("verification grid"));
        }
        let p = *self.params();
        let mut states = Vec::with_capacity(region.len());
        for y in region.y.values() {
            for x in region.x.values() {
                if !keep([x, y]) {
                    continue;
                }
                for theta in region.theta.values() {
                    for delta in region.delta.values() {
                        let zeta = inverse_sigmoid(delta, p.delta_max)?;
                        states.push(VehicleState::new(x, y, theta, zeta));
                    }
                }
            }
        }
        if states.is_empty() {
            return Err(Error::Empty("verification grid"));
        }
        let a2 = self.alphas()[2];
        let rows: Vec<ValidityRow> = states
            .par_iter()
            .filter_map(|s| {
                // h0 first: most of the map is outside the safe set
                if self.h0(s) < 0.0 {
                    return None;
                }
                let e = self.evaluate(s);
                let sup = e.lf_h2 + a2 * e.h[2] + e.lg_h2.abs() * p.u_max;
                let row = ValidityRow {
                    state: *s,
                    h: e.h,
                    sup_residual: sup,
                };
                row.in_safe_set().then_some(row)
            })
            .collect();
        let violations = rows.iter().filter(|r| r.violates()).count();
        let worst_residual = rows.iter().map(|r| r.sup_residual).fold(f64::INFINITY, f64::min);
        Ok(ValidityReport {
            sampled: states.len(),
            in_safe_set: rows.len(),
            violations,
            worst_residual,
            rows,
        })
    }
}
