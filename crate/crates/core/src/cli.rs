//! Pipeline stages behind the `iccbf` subcommands. Each stage reads its
//! inputs from the run configuration, writes artifacts with fixed names under
//! an output directory and returns a printable summary.

use std::fs;
use std::path::{Path, PathBuf};

use crate::barrier::{BarrierStack, GridRegion};
use crate::bench;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::map::{exact_edf, load_grid, sample_dataset, sample_dataset_near_free, EdfDataset, OccupancyGrid, TrackSpec};
use crate::plot::{overlay_svg, Lattice};
use crate::sim::{rollout, safety_report};
use crate::svr::{evaluate, grid_search_cv, load_model, residual_sigma, save_model, split_half, train_with, SvrModel};

pub const DATASET_FILE: &str = "edf.csv";
pub const MAP_FILE: &str = "map.pgm";
pub const MODEL_FILE: &str = "model.txt";
pub const METRICS_FILE: &str = "metrics.txt";
pub const CV_FILE: &str = "cv.csv";
pub const VALIDITY_FILE: &str = "validity.csv";
pub const VALIDITY_SUMMARY_FILE: &str = "validity.txt";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SAFETY_FILE: &str = "safety.txt";
pub const UNFILTERED_TRAJECTORY_FILE: &str = "trajectory_unfiltered.csv";
pub const UNFILTERED_SAFETY_FILE: &str = "safety_unfiltered.txt";
pub const SVG_FILE: &str = "sim.svg";
pub const BENCH_FILE: &str = "bench.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    /// False when the stage ran but its safety check failed.
    pub success: bool,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome { summary, success: true }
    }
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Configured occupancy map, or the built-in track when none is set.
pub fn load_map(cfg: &RunConfig) -> Result<OccupancyGrid> {
    match &cfg.paths.map {
        Some(p) => load_grid(p, cfg.map.threshold),
        None => TrackSpec::default().grid(),
    }
}

fn dataset_path(cfg: &RunConfig, out: &Path) -> PathBuf {
    cfg.paths.dataset.clone().unwrap_or_else(|| out.join(DATASET_FILE))
}

fn model_path(cfg: &RunConfig, out: &Path) -> PathBuf {
    cfg.paths.model.clone().unwrap_or_else(|| out.join(MODEL_FILE))
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} {} does not exist", path.display())))
    }
}

fn load_stack(cfg: &RunConfig, out: &Path) -> Result<BarrierStack> {
    let path = model_path(cfg, out);
    require(&path, "model file")?;
    let model = load_model(&path)?;
    BarrierStack::new(model, cfg.barrier.beta, cfg.barrier.alphas, cfg.vehicle)
}

/// Map -> exact distance field -> sampled training set.
pub fn cmd_edf(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(out)?;
    let grid = load_map(cfg)?;
    if cfg.paths.map.is_none() {
        grid.save(&out.join(MAP_FILE))?;
    }
    let field = exact_edf(&grid);
    let data = if cfg.map.band < 0.0 {
        sample_dataset(&field, cfg.map.stride)?
    } else {
        sample_dataset_near_free(&grid, &field, cfg.map.stride, cfg.map.band)?
    };
    let path = dataset_path(cfg, out);
    data.save(&path)?;
    let g = grid.geometry();
    Ok(Outcome::ok(format!(
        "map {}x{} cells at {} m, {} occupied; max distance {:.3} m; {} samples -> {}",
        g.width,
        g.height,
        g.resolution,
        grid.occupied_count(),
        field.max_value(),
        data.len(),
        path.display()
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub model: SvrModel,
    pub r2: f64,
    pub max_abs_error: f64,
    pub residual_sigma: f64,
    pub train_samples: usize,
    pub validation_samples: usize,
}

impl TrainSummary {
    pub fn to_text(&self) -> String {
        format!(
            "r2 = {}\nmax_abs_error = {}\nn_sv = {}\nresidual_sigma = {}\nbias = {}\ngamma = {}\ntrain_samples = {}\nvalidation_samples = {}\n",
            self.r2,
            self.max_abs_error,
            self.model.n_sv(),
            self.residual_sigma,
            self.model.bias(),
            self.model.gamma(),
            self.train_samples,
            self.validation_samples
        )
    }
}

/// Seeded 50-50 split, optional cross-validated grid search on the training
/// half, then a final fit scored on the validation half.
pub fn train_pipeline(cfg: &RunConfig, data: &EdfDataset) -> Result<(TrainSummary, Option<String>)> {
    let (train, valid) = split_half(data, cfg.svr.split_seed);
    let (hp, cv_table) = if cfg.svr.uses_grid() {
        let cv = grid_search_cv(&train, &cfg.svr.grid(), cfg.svr.folds, cfg.svr.cv_seed, &cfg.svr.options)?;
        let mut table = String::from("c,epsilon,gamma,mean_r2,mean_n_sv\n");
        for row in &cv.table {
            let h = row.hyperparams;
            table.push_str(&format!("{},{},{},{},{}\n", h.c, h.epsilon, h.gamma, row.mean_r2, row.mean_n_sv));
        }
        (cv.best, Some(table))
    } else {
        (cfg.svr.hyperparams, None)
    };
    let trained = train_with(&train, &hp, &cfg.svr.options)?;
    let metrics = evaluate(&trained.model, &valid)?;
    let sigma = residual_sigma(&trained.model, data)?;
    Ok((
        TrainSummary {
            model: trained.model,
            r2: metrics.r2,
            max_abs_error: metrics.max_abs_error,
            residual_sigma: sigma,
            train_samples: train.len(),
            validation_samples: valid.len(),
        },
        cv_table,
    ))
}

pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(out)?;
    let path = dataset_path(cfg, out);
    require(&path, "dataset")?;
    let data = EdfDataset::load(&path)?;
    let (summary, cv_table) = train_pipeline(cfg, &data)?;
    let model_out = model_path(cfg, out);
    save_model(&summary.model, &model_out)?;
    write(out.join(METRICS_FILE), summary.to_text())?;
    if let Some(t) = cv_table {
        write(out.join(CV_FILE), t)?;
    }
    Ok(Outcome::ok(format!("{}model -> {}", summary.to_text(), model_out.display())))
}

pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(out)?;
    let stack = load_stack(cfg, out)?;
    let grid = load_map(cfg)?;
    let v = &cfg.verify;
    let region = GridRegion::covering(grid.geometry(), v.stride, v.headings, v.steering, cfg.vehicle.delta_max);
    region.check_within(grid.geometry())?;
    let report = if v.free_only {
        stack.verify_on_grid_where(&region, |p| grid.occupied_at(p) == Some(false))?
    } else {
        stack.verify_on_grid(&region)?
    };
    write(out.join(VALIDITY_FILE), report.to_csv())?;
    let summary = report.summary();
    write(out.join(VALIDITY_SUMMARY_FILE), format!("{summary}\n"))?;
    Ok(Outcome::ok(summary))
}

pub fn cmd_sim(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(out)?;
    let stack = load_stack(cfg, out)?;
    let grid = load_map(cfg)?;
    let field = exact_edf(&grid);
    let sim = cfg.sim_config()?;

    let (traj, warning) = rollout(&sim, &stack, Some(grid.geometry()), true)?;
    let report = safety_report(&traj, &field)?;
    write(out.join(TRAJECTORY_FILE), traj.to_csv())?;
    write(out.join(SAFETY_FILE), report.to_text())?;
    let mut summary = String::new();
    if let Some(w) = warning {
        summary.push_str(&format!("warning: {w}\n"));
    }
    summary.push_str("[filtered]\n");
    summary.push_str(&report.to_text());

    let mut unfiltered_path = Vec::new();
    if cfg.sim.counterfactual {
        let (raw, _) = rollout(&sim, &stack, Some(grid.geometry()), false)?;
        let raw_report = safety_report(&raw, &field)?;
        write(out.join(UNFILTERED_TRAJECTORY_FILE), raw.to_csv())?;
        write(out.join(UNFILTERED_SAFETY_FILE), raw_report.to_text())?;
        summary.push_str("[unfiltered]\n");
        summary.push_str(&raw_report.to_text());
        unfiltered_path = raw.positions();
    }
    if cfg.sim.svg {
        let learned = Lattice::learned_distance(stack.model(), &grid, 2);
        let filtered_path = traj.positions();
        let mut paths: Vec<(&[crate::Point], &str)> = vec![(&filtered_path, "#1f78b4")];
        if !unfiltered_path.is_empty() {
            paths.push((&unfiltered_path, "#e7298a"));
        }
        write(out.join(SVG_FILE), overlay_svg(&grid, &learned, stack.beta(), &paths, sim.goal))?;
    }
    Ok(Outcome {
        summary,
        success: report.is_safe(),
    })
}

pub fn cmd_bench(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(out)?;
    let stack = load_stack(cfg, out)?;
    let grid = load_map(cfg)?;
    let cases = bench::sample_cases(&grid, &cfg.vehicle, cfg.bench.states, cfg.bench.seed)?;
    let report = bench::compare(&stack, &cases)?;
    let text = report.to_text();
    write(out.join(BENCH_FILE), &text)?;
    Ok(Outcome::ok(text))
}
