mod common;

use std::path::Path;
use std::process::Command;

use learned_iccbf::cli::{self, MODEL_FILE, SAFETY_FILE, TRAJECTORY_FILE};
use learned_iccbf::config::RunConfig;
use learned_iccbf::map::{exact_edf, sample_dataset_near_free};
use learned_iccbf::sim::{nominal_controller, rollout, wrap_angle, SimConfig};
use learned_iccbf::svr::io::to_text;
use learned_iccbf::svr::{load_model, train, SvrHyperparams};
use learned_iccbf::barrier::BarrierStack;
use learned_iccbf::vehicle::{VehicleParams, VehicleState};
use learned_iccbf::Error;

/// Small ring written to `dir`, with a short run toward the infield.
fn ring_config(dir: &Path) -> RunConfig {
    let map = dir.join("ring.pgm");
    common::small_ring().save(&map).unwrap();
    let mut cfg = RunConfig::default();
    for kv in [
        format!("paths.map={}", map.display()),
        "vehicle.speed=3".into(),
        "sim.x=16".into(),
        "sim.y=0".into(),
        "sim.duration=3".into(),
        "sim.svg=false".into(),
        "verify.stride=6".into(),
        "verify.headings=4".into(),
        "verify.steering=3".into(),
        "bench.states=20".into(),
    ] {
        cfg.apply_override(&kv).unwrap();
    }
    cfg
}

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iccbf"))
}

#[test]
fn nominal_controller_steers_toward_the_goal() {
    let p = VehicleParams::default();
    // goal straight ahead: no correction
    let s = VehicleState::new(0.0, 0.0, 0.0, 0.0);
    assert_eq!(nominal_controller(&s, [10.0, 0.0], 2.0, &p), 0.0);
    // goal to the left: positive rate, small error is proportional
    let u = nominal_controller(&s, [10.0, 1.0], 2.0, &p);
    assert!((u - 2.0 * (0.1f64).atan()).abs() < 1e-12);
    // large errors saturate at the bound
    assert_eq!(nominal_controller(&s, [-10.0, -1.0], 2.0, &p), -p.u_max);
    assert_eq!(wrap_angle(3.0 * std::f64::consts::PI), std::f64::consts::PI);
    assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
}

#[test]
fn rollout_is_deterministic_and_has_the_expected_length() {
    let model = common::random_model(20, 0.2, 1);
    let p = VehicleParams { speed: 3.0, ..VehicleParams::default() };
    let stack = BarrierStack::new(model, 0.0, [1.0; 3], p).unwrap();
    let cfg = SimConfig {
        dt: 0.02,
        duration: 1.0,
        initial_state: VehicleState::new(1.0, 1.0, 0.3, 0.0),
        goal: [4.0, 4.0],
        disturbance: 0.1,
        seed: 7,
        ..SimConfig::default()
    };
    let (a, _) = rollout(&cfg, &stack, None, true).unwrap();
    let (b, _) = rollout(&cfg, &stack, None, true).unwrap();
    assert_eq!(a.len(), 51);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!((a.rows[50].t - 1.0).abs() < 1e-12);
    let other = SimConfig { seed: 8, ..cfg };
    assert_ne!(rollout(&other, &stack, None, true).unwrap().0.to_csv(), a.to_csv());
}

#[test]
fn rollout_rejects_positions_off_the_map() {
    let grid = common::small_ring();
    let stack = BarrierStack::new(common::random_model(5, 0.2, 1), 0.0, [1.0; 3], VehicleParams::default()).unwrap();
    let cfg = SimConfig {
        initial_state: VehicleState::new(100.0, 0.0, 0.0, 0.0),
        ..SimConfig::default()
    };
    assert!(matches!(rollout(&cfg, &stack, Some(grid.geometry()), true), Err(Error::InvalidArgument(_))));
}

#[test]
fn single_point_grid_search_equals_explicit_training() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ring_config(dir.path());
    let grid = common::small_ring();
    let field = exact_edf(&grid);
    let data = sample_dataset_near_free(&grid, &field, 2, 1.0).unwrap();
    let (explicit, table) = cli::train_pipeline(&cfg, &data).unwrap();
    assert!(table.is_none());
    cfg.apply_override("svr.grid_c=7").unwrap();
    cfg.apply_override("svr.folds=2").unwrap();
    let (searched, table) = cli::train_pipeline(&cfg, &data).unwrap();
    assert_eq!(table.unwrap().lines().count(), 2);
    assert_eq!(to_text(&explicit.model), to_text(&searched.model));
}

#[test]
fn full_pipeline_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = ring_config(dir.path());
    let edf = cli::cmd_edf(&cfg, &out).unwrap();
    assert!(edf.summary.contains("samples"));
    let trained = cli::cmd_train(&cfg, &out).unwrap();
    assert!(trained.summary.contains("r2 = "));
    let model = load_model(&out.join(MODEL_FILE)).unwrap();

    // the file pipeline reproduces a direct fit on the same split
    let grid = common::small_ring();
    let data = sample_dataset_near_free(&grid, &exact_edf(&grid), 1, 1.0).unwrap();
    let (direct, _) = cli::train_pipeline(&cfg, &data).unwrap();
    assert_eq!(to_text(&direct.model), to_text(&model));
    assert_ne!(to_text(&model), to_text(&train(&data, &SvrHyperparams::default()).unwrap()));

    let verify = cli::cmd_verify(&cfg, &out).unwrap();
    assert!(verify.summary.contains("sampled"));
    let sim = cli::cmd_sim(&cfg, &out).unwrap();
    assert!(sim.summary.contains("[filtered]") && sim.summary.contains("[unfiltered]"));
    let traj = std::fs::read_to_string(out.join(TRAJECTORY_FILE)).unwrap();
    assert_eq!(traj.lines().count(), 302);
    assert!(std::fs::read_to_string(out.join(SAFETY_FILE)).unwrap().contains("min_h0 = "));
    let bench = cli::cmd_bench(&cfg, &out).unwrap();
    assert!(bench.summary.contains("speedup"));
}

#[test]
fn missing_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ring_config(dir.path());
    let out = dir.path().join("empty");
    let e = cli::cmd_train(&cfg, &out).unwrap_err();
    assert!(e.to_string().contains("dataset"), "{e}");
    let e = cli::cmd_sim(&cfg, &out).unwrap_err();
    assert!(e.to_string().contains("model file"), "{e}");
}

#[test]
fn unknown_config_keys_are_named() {
    let mut cfg = RunConfig::default();
    let e = cfg.apply_override("sim.speeed=3").unwrap_err();
    assert!(e.to_string().contains("sim.speeed"));
    assert!(RunConfig::from_ini_str("[vehicle]\nwheel_base = 2\n").unwrap_err().to_string().contains("vehicle.wheel_base"));
    assert!(cfg.apply_override("vehicle.speed=fast").is_err());
    assert!(cfg.apply_override("nonsense").is_err());
}

#[test]
fn config_round_trips_through_ini() {
    let mut cfg = RunConfig::default();
    cfg.apply_override("svr.grid_gamma=10,30").unwrap();
    cfg.apply_override("barrier.alpha2=2.5").unwrap();
    let back = RunConfig::from_ini_str(&cfg.to_ini_string()).unwrap();
    assert_eq!(back, cfg);
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/track.ini");
    let track = RunConfig::load(&shipped).unwrap();
    track.validate().unwrap();
    assert_eq!(track.vehicle.speed, 3.0);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let bad = exe().args(["--set", "sim.nope=1", "sim"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("sim.nope"));

    let missing = exe().arg("--out").arg(&out).arg("sim").output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("model file"));

    // a margin the map never reaches: the run completes but is reported unsafe
    let model = dir.path().join("m.txt");
    learned_iccbf::svr::save_model(&common::random_model(5, 0.2, 2), &model).unwrap();
    let unsafe_run = exe()
        .arg("--out")
        .arg(&out)
        .args(["--set", "barrier.beta=1000", "--set", "sim.duration=0.05", "--set", "sim.svg=false"])
        .arg("--set")
        .arg(format!("paths.model={}", model.display()))
        .arg("sim")
        .output()
        .unwrap();
    assert_eq!(unsafe_run.status.code(), Some(2), "{}", String::from_utf8_lossy(&unsafe_run.stderr));
    assert!(String::from_utf8_lossy(&unsafe_run.stdout).contains("warning"));
}
