//! Per-call timing of the batched safety filter against the per-entry
//! reference implementation on the same random states.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barrier::BarrierStack;
use crate::error::{Error, Result};
use crate::map::OccupancyGrid;
use crate::vehicle::{VehicleParams, VehicleState};

/// `(state, u_nom)` pairs on free cells with uniform heading, steering within
/// 90% of its bound and uniform nominal input.
pub fn sample_cases(grid: &OccupancyGrid, params: &VehicleParams, n: usize, seed: u64) -> Result<Vec<(VehicleState, f64)>> {
    let g = grid.geometry();
    let free: Vec<usize> = grid
        .cells()
        .iter()
        .enumerate()
        .filter_map(|(k, &o)| (!o).then_some(k))
        .collect();
    if free.is_empty() {
        return Err(Error::Empty("free cells"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 * g.resolution;
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|_| {
            let k = free[rng.random_range(0..free.len())];
            let c = g.cell_center(k % g.width, k / g.width);
            let p = [c[0] + rng.random_range(-half..half), c[1] + rng.random_range(-half..half)];
            let theta = rng.random_range(-pi..pi);
            let delta = 0.9 * params.delta_max * rng.random_range(-1.0..1.0);
            let s = VehicleState::with_steering(p, theta, delta, params)?;
            Ok((s, params.u_max * rng.random_range(-1.0..=1.0)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub mean: f64,
    pub std: f64,
}

impl Timing {
    fn from_samples(t: &[f64]) -> Self {
        let n = t.len() as f64;
        let mean = t.iter().sum::<f64>() / n;
        let var = t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Timing { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub cases: usize,
    pub n_sv: usize,
    pub vectorized: Timing,
    pub naive: Timing,
    /// Largest difference in applied input between the two paths.
    pub max_abs_diff: f64,
}

impl BenchReport {
    pub fn speedup(&self) -> f64 {
        self.naive.mean / self.vectorized.mean
    }

    pub fn to_text(&self) -> String {
        format!(
            "cases = {}\nn_sv = {}\nvectorized_mean_s = {:e}\nvectorized_std_s = {:e}\nnaive_mean_s = {:e}\nnaive_std_s = {:e}\nspeedup = {:.1}\nmax_abs_diff = {:e}\n",
            self.cases,
            self.n_sv,
            self.vectorized.mean,
            self.vectorized.std,
            self.naive.mean,
            self.naive.std,
            self.speedup(),
            self.max_abs_diff
        )
    }
}

/// Times every call individually on the current thread.
pub fn compare(stack: &BarrierStack, cases: &[(VehicleState, f64)]) -> Result<BenchReport> {
    if cases.is_empty() {
        return Err(Error::Empty("benchmark cases"));
    }
    // warm caches and page in the model
    for (s, u) in cases.iter().take(8) {
        black_box(stack.safety_filter(s, *u)?);
    }
    let mut tv = Vec::with_capacity(cases.len());
    let mut tn = Vec::with_capacity(cases.len());
    let mut max_abs_diff: f64 = 0.0;
    for (s, u) in cases {
        let t0 = Instant::now();
        let a = black_box(stack.safety_filter(black_box(s), black_box(*u))?);
        tv.push(t0.elapsed().as_secs_f64());
        let t0 = Instant::now();
        let b = black_box(stack.naive_filter(black_box(s), black_box(*u))?);
        tn.push(t0.elapsed().as_secs_f64());
        max_abs_diff = max_abs_diff.max((a.u_applied - b.u_applied).abs());
    }
    Ok(BenchReport {
        cases: cases.len(),
        n_sv: stack.model().n_sv(),
        vectorized: Timing::from_samples(&tv),
        naive: Timing::from_samples(&tn),
        max_abs_diff,
    })
}
