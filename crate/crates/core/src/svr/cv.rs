//! Validation metrics, data splits and cross-validated grid search.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::SvrModel;
use super::smo::{train_with, SvrHyperparams, TrainOptions};
use crate::error::{Error, Result};
use crate::map::EdfDataset;

/// `1 - SS_res / SS_tot`.
pub fn r2_score(truth: &[f64], predicted: &[f64]) -> f64 {
    assert_eq!(truth.len(), predicted.len());
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = truth.iter().zip(predicted).map(|(y, p)| (y - p).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub r2: f64,
    pub max_abs_error: f64,
    pub n_sv: usize,
}

pub fn evaluate(model: &SvrModel, data: &EdfDataset) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let truth: Vec<f64> = data.targets().collect();
    let pred: Vec<f64> = data.points().map(|z| model.predict(z)).collect();
    let max_abs_error = truth
        .iter()
        .zip(&pred)
        .map(|(y, p)| (y - p).abs())
        .fold(0.0, f64::max);
    Ok(Metrics {
        r2: r2_score(&truth, &pred),
        max_abs_error,
        n_sv: model.n_sv(),
    })
}

/// Largest absolute residual over the free-space samples (`d > 0`); the
/// empirical bound on the approximation error that the barrier margin must
/// exceed.
pub fn residual_sigma(model: &SvrModel, data: &EdfDataset) -> Result<f64> {
    let mut seen = false;
    let mut worst: f64 = 0.0;
    for s in data.samples.iter().filter(|s| s.d > 0.0) {
        seen = true;
        worst = worst.max((model.predict(s.z) - s.d).abs());
    }
    if seen {
        Ok(worst)
    } else {
        Err(Error::Empty("free-space sample set"))
    }
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Seeded uniform shuffle, first half for training and the rest for validation.
pub fn split_half(data: &EdfDataset, seed: u64) -> (EdfDataset, EdfDataset) {
    let idx = shuffled(data.len(), seed);
    let (a, b) = idx.split_at(data.len() / 2);
    (data.subset(a), data.subset(b))
}

/// Index sets of `folds` contiguous chunks of a seeded permutation.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let idx = shuffled(n, seed);
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(idx[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Candidate values for each hyperparameter; the grid is their product.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma: Vec<f64>,
    pub length_scale: f64,
}

impl HyperGrid {
    pub fn single(hp: SvrHyperparams) -> Self {
        HyperGrid {
            c: vec![hp.c],
            epsilon: vec![hp.epsilon],
            gamma: vec![hp.gamma],
            length_scale: hp.length_scale,
        }
    }

    /// Points in lexicographic `(c, epsilon, gamma)` order.
    pub fn points(&self) -> Vec<SvrHyperparams> {
        let mut out = Vec::new();
        for &c in &self.c {
            for &epsilon in &self.epsilon {
                for &gamma in &self.gamma {
                    out.push(SvrHyperparams {
                        c,
                        epsilon,
                        gamma,
                        length_scale: self.length_scale,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvPoint {
    pub hyperparams: SvrHyperparams,
    pub mean_r2: f64,
    pub mean_n_sv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best: SvrHyperparams,
    pub score: f64,
    pub table: Vec<CvPoint>,
}

/// K-fold cross-validated grid search maximizing mean validation R².
///
/// Ties go to the point with fewer support vectors on average, then to the
/// earlier point in lexicographic order. Folds are trained in parallel; the
/// result does not depend on scheduling.
pub fn grid_search_cv(
    data: &EdfDataset,
    grid: &HyperGrid,
    folds: usize,
    seed: u64,
    opts: &TrainOptions,
) -> Result<CvResult> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    if data.len() < 2 * folds {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot fill {folds} folds",
            data.len()
        )));
    }
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Empty("hyperparameter grid"));
    }
    for hp in &points {
        hp.validate()?;
    }
    let fold_idx = kfold_indices(data.len(), folds, seed);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..folds).map(move |f| (p, f)))
        .collect();

    let per_job: Vec<(f64, usize)> = jobs
        .par_iter()
        .map(|&(p, f)| {
            let train_idx: Vec<usize> = fold_idx
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            let train = data.subset(&train_idx);
            let valid = data.subset(&fold_idx[f]);
            let trained = train_with(&train, &points[p], opts)?;
            let m = evaluate(&trained.model, &valid)?;
            Ok((m.r2, m.n_sv))
        })
        .collect::<Result<_>>()?;

    let table: Vec<CvPoint> = points
        .iter()
        .enumerate()
        .map(|(p, hp)| {
            let rows = &per_job[p * folds..(p + 1) * folds];
            CvPoint {
                hyperparams: *hp,
                mean_r2: rows.iter().map(|r| r.0).sum::<f64>() / folds as f64,
                mean_n_sv: rows.iter().map(|r| r.1 as f64).sum::<f64>() / folds as f64,
            }
        })
        .collect();

    let mut best = 0;
    for (p, row) in table.iter().enumerate().skip(1) {
        let b = &table[best];
        if row.mean_r2 > b.mean_r2 || (row.mean_r2 == b.mean_r2 && row.mean_n_sv < b.mean_n_sv) {
            best = p;
        }
    }
    Ok(CvResult {
        best: table[best].hyperparams,
        score: table[best].mean_r2,
        table,
    })
}
