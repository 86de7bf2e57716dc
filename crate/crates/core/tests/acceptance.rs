//! End-to-end acceptance run on the built-in track with `configs/track.ini`.
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::oracles::{
    barrier_infimum, brute_force_edf, derivative_fd, filter_projection, kkt, lie_h2_fd, random_grid, u_grid, Check,
};
use learned_iccbf::barrier::BarrierStack;
use learned_iccbf::bench;
use learned_iccbf::cli;
use learned_iccbf::config::RunConfig;
use learned_iccbf::map::{exact_edf, sample_dataset_near_free, TrackSpec};
use learned_iccbf::sim::{rollout, safety_report};
use learned_iccbf::svr::{evaluate, residual_sigma, split_half, train_with};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const REFERENCE_N_SV: f64 = 1737.0;
const SUITE_BUDGET: Duration = Duration::from_secs(60);

#[derive(Default)]
struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: impl AsRef<str>) {
        println!("{} {name}: {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
        if !pass {
            self.failed.push(name.to_string());
        }
    }
}

fn track_config() -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/track.ini");
    RunConfig::load(&path).expect("configs/track.ini")
}

/// Runs `f` and reports whether it passed within the suite time budget.
fn timed_suite(report: &mut Report, name: &str, f: impl FnOnce() -> Result<String, String>) -> Duration {
    let t0 = Instant::now();
    let result = f();
    let dt = t0.elapsed();
    let within = dt <= SUITE_BUDGET;
    match result {
        Ok(detail) => report.line(name, within, format!("{detail}; {:.2} s (budget 60 s)", dt.as_secs_f64())),
        Err(e) => report.line(name, false, format!("{e}; {:.2} s", dt.as_secs_f64())),
    }
    dt
}

fn all(checks: impl IntoIterator<Item = Check>) -> Result<usize, String> {
    let mut n = 0;
    for c in checks {
        c?;
        n += 1;
    }
    Ok(n)
}

fn digest(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn pipeline_digests(cfg: &RunConfig, out: &Path) -> learned_iccbf::Result<[String; 3]> {
    cli::cmd_edf(cfg, out)?;
    cli::cmd_train(cfg, out)?;
    cli::cmd_sim(cfg, out)?;
    let files: [PathBuf; 3] = [
        out.join(cli::MODEL_FILE),
        out.join(cli::TRAJECTORY_FILE),
        out.join(cli::UNFILTERED_TRAJECTORY_FILE),
    ];
    Ok(files.map(|p| digest(&p)))
}

fn main() {
    let mut report = Report::default();
    let cfg = track_config();
    let track = TrackSpec::default();

    // 1. regression on the track
    let t0 = Instant::now();
    let grid = track.grid().expect("track grid");
    let field = exact_edf(&grid);
    let data = sample_dataset_near_free(&grid, &field, cfg.map.stride, cfg.map.band).expect("samples");
    let (train, valid) = split_half(&data, cfg.svr.split_seed);
    let hp = cfg.svr.hyperparams;
    let trained = train_with(&train, &hp, &cfg.svr.options).expect("training");
    let metrics = evaluate(&trained.model, &valid).expect("validation");
    let train_time = t0.elapsed();
    let model = trained.model.clone();
    let n_sv = model.n_sv();
    report.line(
        "1 regression",
        metrics.r2 >= 0.95 && metrics.max_abs_error <= 2.0 && (500..=4000).contains(&n_sv) && train_time.as_secs() <= 300,
        format!(
            "{} samples, R2 {:.5} (>= 0.95), max error {:.3} m (<= 2), n_sv {n_sv} (500..4000), {:.1} s (<= 300)",
            data.len(),
            metrics.r2,
            metrics.max_abs_error,
            train_time.as_secs_f64()
        ),
    );

    let sigma = residual_sigma(&model, &data).expect("sigma");
    let beta = cfg.barrier.beta;
    let stack = BarrierStack::new(model.clone(), beta, cfg.barrier.alphas, cfg.vehicle).expect("barrier");
    let p = cfg.vehicle;

    // 2. closed loop with the filter, and without it
    let sim = cfg.sim_config().expect("sim config");
    let (traj, warning) = rollout(&sim, &stack, Some(grid.geometry()), true).expect("filtered rollout");
    let safe = safety_report(&traj, &field).expect("report");
    let (raw, _) = rollout(&sim, &stack, Some(grid.geometry()), false).expect("unfiltered rollout");
    let unsafe_report = safety_report(&raw, &field).expect("report");
    let goal_off_road = grid.occupied_at(sim.goal) == Some(true);
    let filtered_ok = warning.is_none()
        && safe.min_h0 >= 0.0
        && safe.min_true_distance > 0.0
        && safe.violation_steps == 0
        && safe.max_abs_delta <= p.delta_max
        && safe.max_abs_u <= p.u_max;
    let counterfactual_ok = unsafe_report.min_true_distance <= 0.0;
    report.line(
        "2 closed-loop safety",
        beta > sigma && goal_off_road && filtered_ok && counterfactual_ok,
        format!(
            "beta {beta} > sigma {sigma:.4}; goal off road {goal_off_road}; filtered: {} steps, min h0 {:.4}, min true EDF {:.3} m, \
             {} violations, {} overrides, max |delta| {:.3}, max |u| {:.3}; unfiltered: min true EDF {:.3} m",
            safe.steps,
            safe.min_h0,
            safe.min_true_distance,
            safe.violation_steps,
            safe.overridden_steps,
            safe.max_abs_delta,
            safe.max_abs_u,
            unsafe_report.min_true_distance
        ),
    );

    // 3. timing
    let cases = bench::sample_cases(&grid, &p, cfg.bench.states.max(1000), cfg.bench.seed).expect("cases");
    let b = bench::compare(&stack, &cases).expect("bench");
    let n_sv_ok = (n_sv as f64 - REFERENCE_N_SV).abs() <= 0.1 * REFERENCE_N_SV;
    report.line(
        "3 speedup",
        n_sv_ok && b.speedup() >= 100.0 && b.vectorized.mean <= 5e-3,
        format!(
            "{} states, n_sv {n_sv} (1737 +/- 10%), vectorized {:.2} us, reference {:.3} ms, speedup {:.0}x (>= 100), max |du| {:e}",
            b.cases,
            b.vectorized.mean * 1e6,
            b.naive.mean * 1e3,
            b.speedup(),
            b.max_abs_diff
        ),
    );

    // 4. oracle suites on the track model
    let before = report.failed.len();
    timed_suite(&mut report, "4a distance transform", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 0..16 {
            let g = random_grid(&mut rng, 20);
            if exact_edf(&g).values() != &brute_force_edf(&g)[..] {
                return Err(format!("grid {k} differs from brute force"));
            }
        }
        Ok("16 random grids equal brute force".into())
    });
    let states: Vec<_> = bench::sample_cases(&grid, &p, 10_000, 1).expect("states");
    let us = u_grid(p.u_max, 10_000);
    timed_suite(&mut report, "4b barrier levels", || {
        let n = all(states.iter().take(1000).map(|(s, _)| barrier_infimum(&stack, s, &us, p.u_max * 1e-4)))?;
        Ok(format!("h1, h2 at {n} states within {:e}", p.u_max * 1e-4))
    });
    timed_suite(&mut report, "4c filter projection", || {
        let a2 = cfg.barrier.alphas[2];
        let n = all(states.iter().map(|(s, u)| filter_projection(&stack.evaluate(s), *u, a2, p.u_max, &us)))?;
        Ok(format!("{n} cases within the input grid step"))
    });
    timed_suite(&mut report, "4d derivatives", || {
        let (lo, hi) = grid.geometry().extent();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points = all((0..200).map(|_| {
            derivative_fd(&model, [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])])
        }))?;
        let lie = all(states.iter().take(300).filter_map(|(s, _)| lie_h2_fd(&stack, s)))?;
        if lie < 100 {
            return Err(format!("only {lie} states away from the kink"));
        }
        Ok(format!("orders 1-3 at {points} points, Lie derivatives of h2 at {lie} states"))
    });
    timed_suite(&mut report, "4e dual feasibility and tube", || {
        kkt(&train, &hp, &trained.model, &trained.coefficients)?;
        Ok(format!("{} coefficients, {} support vectors", trained.coefficients.len(), n_sv))
    });
    report.line("4 oracle suites", report.failed.len() == before, "all suites within budget");

    // 5. margin along the accepted rollout
    let floor = beta - sigma - std::f64::consts::SQRT_2 * grid.geometry().resolution;
    let worst = traj
        .rows
        .iter()
        .map(|r| field.interpolate(r.state.position()))
        .fold(f64::INFINITY, f64::min);
    report.line(
        "5 margin",
        safe.is_safe() && worst >= floor,
        format!("min true EDF {worst:.3} m >= beta - sigma - cell diagonal = {floor:.3} m"),
    );

    // 6. repeated runs
    let deterministic = (|| -> Result<(bool, String), Box<dyn std::error::Error>> {
        let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
        let da = pipeline_digests(&cfg, a.path())?;
        let db = pipeline_digests(&cfg, b.path())?;
        let direct = learned_iccbf::svr::io::to_text(&model);
        let file = std::fs::read_to_string(a.path().join(cli::MODEL_FILE))?;
        Ok((da == db && direct == file, format!("model {}, trajectory {}", &da[0][..16], &da[1][..16])))
    })();
    match deterministic {
        Ok((same, detail)) => report.line("6 determinism", same, format!("two train+sim runs byte-identical: {detail}")),
        Err(e) => report.line("6 determinism", false, e.to_string()),
    }

    if report.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {:?}", report.failed);
        std::process::exit(1);
    }
}
