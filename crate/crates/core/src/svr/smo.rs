//! ε-SVR training by sequential minimal optimization.
//!
//! The dual is written over `2n` variables `beta = (alpha, alpha*)`:
//!
//! ```text
//!     min  1/2 beta^T Q beta + p^T beta
//!     s.t. y^T beta = 0,  0 <= beta_t <= C
//! ```
//!
//! with `y = (+1.., -1..)`, `p = (eps - d, eps + d)` and
//! `Q_st = y_s y_t k(z_s, z_t)`. Each step updates the maximal violating
//! pair; the regression coefficients are `kappa_i = alpha_i - alpha*_i`.

use std::collections::VecDeque;

use super::kernel::kernel;
use super::model::SvrModel;
use crate::error::{Error, Result};
use crate::map::EdfDataset;
use crate::Point;

/// Coefficients at or below this magnitude are not kept as support vectors.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrHyperparams {
    /// Penalty on residuals outside the tube (the box bound on `|kappa|`).
    pub c: f64,
    /// Tube half-width in meters.
    pub epsilon: f64,
    /// Kernel width on coordinates divided by `length_scale`.
    pub gamma: f64,
    /// Meters per kernel coordinate unit.
    pub length_scale: f64,
}

impl Default for SvrHyperparams {
    fn default() -> Self {
        SvrHyperparams {
            c: 7.0,
            epsilon: 0.1,
            gamma: 30.0,
            length_scale: 20.0,
        }
    }
}

impl SvrHyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c > 0.0
            && self.c.is_finite()
            && self.epsilon >= 0.0
            && self.epsilon.is_finite()
            && self.gamma > 0.0
            && self.gamma.is_finite()
            && self.length_scale > 0.0
            && self.length_scale.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid SVR hyperparameters {self:?}")))
        }
    }

    /// Kernel width in 1/m^2.
    pub fn kernel_gamma(&self) -> f64 {
        self.gamma / (self.length_scale * self.length_scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    /// Stop when the maximal KKT violation drops to this value.
    pub tolerance: f64,
    pub max_pair_updates: u64,
    /// Upper bound on cached kernel-row memory.
    pub cache_bytes: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            tolerance: 1e-6,
            max_pair_updates: 10_000_000,
            cache_bytes: 1 << 30,
        }
    }
}

/// Solver diagnostics returned alongside the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub pair_updates: u64,
    pub kkt_violation: f64,
    /// Dual objective `1/2 kappa^T K kappa - d^T kappa + eps |kappa|_1`.
    pub objective: f64,
    pub free_count: usize,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: SvrModel,
    pub report: TrainReport,
    /// Coefficient of every training sample (zero for non-support samples).
    pub coefficients: Vec<f64>,
}

pub fn train(dataset: &EdfDataset, hp: &SvrHyperparams) -> Result<SvrModel> {
    train_with(dataset, hp, &TrainOptions::default()).map(|t| t.model)
}

pub fn train_with(dataset: &EdfDataset, hp: &SvrHyperparams, opts: &TrainOptions) -> Result<Trained> {
    hp.validate()?;
    if dataset.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "training needs at least 2 samples, got {}",
            dataset.len()
        )));
    }
    let points: Vec<Point> = dataset.points().collect();
    let targets: Vec<f64> = dataset.targets().collect();
    let gamma = hp.kernel_gamma();
    let mut solver = Solver::new(&points, &targets, hp.c, hp.epsilon, gamma, opts);
    solver.solve()?;

    let l = points.len();
    let coefficients: Vec<f64> = (0..l).map(|i| solver.beta[i] - solver.beta[i + l]).collect();
    let rho = solver.rho();
    let objective = solver.objective();

    let mut svs = Vec::new();
    let mut kappas = Vec::new();
    for (i, &k) in coefficients.iter().enumerate() {
        if k.abs() > PRUNE_THRESHOLD {
            svs.push(points[i]);
            kappas.push(k);
        }
    }
    let free_count = (0..2 * l).filter(|&t| solver.is_free(t)).count();
    let model = SvrModel::new(svs, kappas, -rho, gamma)?;
    Ok(Trained {
        model,
        report: TrainReport {
            pair_updates: solver.updates,
            kkt_violation: solver.last_gap,
            objective,
            free_count,
        },
        coefficients,
    })
}

/// Kernel rows computed on demand, evicted first-in first-out once the
/// memory budget is spent.
struct KernelRows<'a> {
    points: &'a [Point],
    gamma: f64,
    rows: Vec<Option<Box<[f64]>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(points: &'a [Point], gamma: f64, cache_bytes: usize) -> Self {
        let l = points.len();
        let capacity = (cache_bytes / (8 * l)).clamp(2, l);
        KernelRows {
            points,
            gamma,
            rows: vec![None; l],
            order: VecDeque::new(),
            capacity,
        }
    }

    /// Loads row `i` without evicting row `keep`.
    fn ensure(&mut self, i: usize, keep: usize) {
        if self.rows[i].is_some() {
            return;
        }
        if self.order.len() >= self.capacity {
            if self.order.front() == Some(&keep) {
                self.order.rotate_left(1);
            }
            if let Some(old) = self.order.pop_front() {
                self.rows[old] = None;
            }
        }
        let zi = self.points[i];
        let row: Box<[f64]> = self.points.iter().map(|&z| kernel(zi, z, self.gamma)).collect();
        self.rows[i] = Some(row);
        self.order.push_back(i);
    }

    fn row(&self, i: usize) -> &[f64] {
        self.rows[i].as_deref().expect("row loaded")
    }
}

struct Solver<'a> {
    l: usize,
    c: f64,
    targets: &'a [f64],
    epsilon: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
    kernel: KernelRows<'a>,
    tolerance: f64,
    max_updates: u64,
    updates: u64,
    last_gap: f64,
}

impl<'a> Solver<'a> {
    fn new(
        points: &'a [Point],
        targets: &'a [f64],
        c: f64,
        epsilon: f64,
        gamma: f64,
        opts: &TrainOptions,
    ) -> Self {
        let l = points.len();
        let mut grad = Vec::with_capacity(2 * l);
        grad.extend(targets.iter().map(|d| epsilon - d));
        grad.extend(targets.iter().map(|d| epsilon + d));
        Solver {
            l,
            c,
            targets,
            epsilon,
            beta: vec![0.0; 2 * l],
            grad,
            kernel: KernelRows::new(points, gamma, opts.cache_bytes),
            tolerance: opts.tolerance,
            max_updates: opts.max_pair_updates,
            updates: 0,
            last_gap: f64::INFINITY,
        }
    }

    #[inline]
    fn y(&self, t: usize) -> f64 {
        if t < self.l {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn in_up(&self, t: usize) -> bool {
        if t < self.l {
            self.beta[t] < self.c
        } else {
            self.beta[t] > 0.0
        }
    }

    #[inline]
    fn in_low(&self, t: usize) -> bool {
        if t < self.l {
            self.beta[t] > 0.0
        } else {
            self.beta[t] < self.c
        }
    }

    fn is_free(&self, t: usize) -> bool {
        self.beta[t] > 0.0 && self.beta[t] < self.c
    }

    /// Maximal violating pair `(i, j)` and the violation `m - M`.
    fn select(&self) -> (usize, usize, f64) {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..2 * self.l {
            let v = -self.y(t) * self.grad[t];
            if self.in_up(t) && v > gmax {
                gmax = v;
                i = t;
            }
            if self.in_low(t) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        (i, j, gmax - gmin)
    }

    fn solve(&mut self) -> Result<()> {
        loop {
            let (i, j, gap) = self.select();
            self.last_gap = gap;
            if gap <= self.tolerance || i == usize::MAX || j == usize::MAX {
                return Ok(());
            }
            if self.updates >= self.max_updates {
                return Err(Error::NotConverged {
                    iterations: self.updates,
                    violation: gap,
                });
            }
            self.update_pair(i, j);
            self.updates += 1;
        }
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let l = self.l;
        let (si, sj) = (i % l, j % l);
        self.kernel.ensure(si, sj);
        self.kernel.ensure(sj, si);
        let (yi, yj) = (self.y(i), self.y(j));
        let kij = self.kernel.row(si)[sj];
        let qij = yi * yj * kij;
        let c = self.c;
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let mut quad = 2.0 + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = 2.0 - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.beta[i] = ai;
        self.beta[j] = aj;

        // grad_t += Q_ti dA_i + Q_tj dA_j, with Q_ts = y_t y_s K
        let wi = yi * (ai - old_i);
        let wj = yj * (aj - old_j);
        let ki = self.kernel.row(si);
        let kj = self.kernel.row(sj);
        let (lo, hi) = self.grad.split_at_mut(l);
        for s in 0..l {
            let dk = ki[s] * wi + kj[s] * wj;
            lo[s] += dk;
            hi[s] -= dk;
        }
    }

    /// Threshold `rho` of the decision function `sum kappa k - rho`.
    fn rho(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut sum_free = 0.0;
        let mut n_free = 0usize;
        for t in 0..2 * self.l {
            let y = self.y(t);
            let yg = y * self.grad[t];
            if self.beta[t] >= self.c {
                if y < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.beta[t] <= 0.0 {
                if y > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            0.5 * (ub + lb)
        }
    }

    /// `1/2 beta^T Q beta + p^T beta = 1/2 sum_t beta_t (grad_t + p_t)`.
    fn objective(&self) -> f64 {
        let l = self.l;
        let mut s = 0.0;
        for t in 0..2 * l {
            let p = if t < l {
                self.epsilon - self.targets[t]
            } else {
                self.epsilon + self.targets[t - l]
            };
            s += self.beta[t] * (self.grad[t] + p);
        }
        0.5 * s
    }
}
