//! Run configuration: INI file with one section per pipeline stage, plus
//! `section.key=value` overrides from the command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::barrier::Alphas;
use crate::error::{Error, Result};
use crate::sim::SimConfig;
use crate::svr::{HyperGrid, SvrHyperparams, TrainOptions};
use crate::vehicle::{inverse_sigmoid, VehicleParams, VehicleState};

#[derive(Debug, Clone, PartialEq)]
pub struct PathsConfig {
    /// Occupancy image; the built-in track is generated when unset.
    pub map: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    pub stride: usize,
    /// Occupied cells farther than this from free space are not sampled;
    /// negative keeps every cell.
    pub band: f64,
    pub threshold: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrConfig {
    pub hyperparams: SvrHyperparams,
    pub options: TrainOptions,
    pub split_seed: u64,
    /// Non-empty lists switch `train` to cross-validated grid search.
    pub grid_c: Vec<f64>,
    pub grid_epsilon: Vec<f64>,
    pub grid_gamma: Vec<f64>,
    pub folds: usize,
    pub cv_seed: u64,
}

impl SvrConfig {
    pub fn uses_grid(&self) -> bool {
        !(self.grid_c.is_empty() && self.grid_epsilon.is_empty() && self.grid_gamma.is_empty())
    }

    /// Grid with unset axes pinned to the explicit hyperparameters.
    pub fn grid(&self) -> HyperGrid {
        let hp = self.hyperparams;
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        HyperGrid {
            c: or(&self.grid_c, hp.c),
            epsilon: or(&self.grid_epsilon, hp.epsilon),
            gamma: or(&self.grid_gamma, hp.gamma),
            length_scale: hp.length_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierConfig {
    pub beta: f64,
    pub alphas: Alphas,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub dt: f64,
    pub duration: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Initial steering angle (rad).
    pub delta: f64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub gain: f64,
    pub seed: u64,
    pub disturbance: f64,
    /// Also run and report the unfiltered rollout.
    pub counterfactual: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub stride: usize,
    pub headings: usize,
    pub steering: usize,
    /// Only sample positions on free cells of the map.
    pub free_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub states: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub paths: PathsConfig,
    pub map: MapConfig,
    pub svr: SvrConfig,
    pub vehicle: VehicleParams,
    pub barrier: BarrierConfig,
    pub sim: SimSection,
    pub verify: VerifyConfig,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: PathsConfig {
                map: None,
                dataset: None,
                model: None,
            },
            map: MapConfig {
                stride: 1,
                band: 1.0,
                threshold: None,
            },
            svr: SvrConfig {
                hyperparams: SvrHyperparams::default(),
                options: TrainOptions::default(),
                split_seed: 0,
                grid_c: Vec::new(),
                grid_epsilon: Vec::new(),
                grid_gamma: Vec::new(),
                folds: 5,
                cv_seed: 0,
            },
            vehicle: VehicleParams::default(),
            barrier: BarrierConfig {
                beta: 1.0,
                alphas: [1.0; 3],
            },
            sim: SimSection {
                dt: 0.01,
                duration: 60.0,
                x: 80.0,
                y: 0.0,
                theta: std::f64::consts::FRAC_PI_2,
                delta: 0.0,
                goal_x: 0.0,
                goal_y: 0.0,
                gain: 2.0,
                seed: 0,
                disturbance: 0.0,
                counterfactual: true,
                svg: true,
            },
            verify: VerifyConfig {
                stride: 3,
                headings: 16,
                steering: 5,
                free_only: true,
            },
            bench: BenchConfig { states: 1000, seed: 0 },
        }
    }
}

fn parse<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{section}.{key}: cannot parse {value:?}")))
}

fn parse_list(section: &str, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(section, key, s))
        .collect()
}

fn parse_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn path_text(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_ini_str(&text)
    }

    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(Error::Config(format!("{key}: key outside any section")));
                }
                continue;
            };
            for (key, value) in props.iter() {
                cfg.set(section, key, value)?;
            }
        }
        Ok(cfg)
    }

    /// Applies `section.key=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (lhs, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {spec:?} is not section.key=value")))?;
        let (section, key) = lhs
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("override key {:?} is not section.key", lhs.trim())))?;
        self.set(section, key, value)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let s = section;
        match (section, key) {
            ("paths", "map") => self.paths.map = parse_path(value),
            ("paths", "dataset") => self.paths.dataset = parse_path(value),
            ("paths", "model") => self.paths.model = parse_path(value),

            ("map", "stride") => self.map.stride = parse(s, key, value)?,
            ("map", "band") => self.map.band = parse(s, key, value)?,
            ("map", "threshold") => {
                self.map.threshold = if value.trim().is_empty() {
                    None
                } else {
                    Some(parse(s, key, value)?)
                }
            }

            ("svr", "c") => self.svr.hyperparams.c = parse(s, key, value)?,
            ("svr", "epsilon") => self.svr.hyperparams.epsilon = parse(s, key, value)?,
            ("svr", "gamma") => self.svr.hyperparams.gamma = parse(s, key, value)?,
            ("svr", "length_scale") => self.svr.hyperparams.length_scale = parse(s, key, value)?,
            ("svr", "tolerance") => self.svr.options.tolerance = parse(s, key, value)?,
            ("svr", "max_pair_updates") => self.svr.options.max_pair_updates = parse(s, key, value)?,
            ("svr", "split_seed") => self.svr.split_seed = parse(s, key, value)?,
            ("svr", "grid_c") => self.svr.grid_c = parse_list(s, key, value)?,
            ("svr", "grid_epsilon") => self.svr.grid_epsilon = parse_list(s, key, value)?,
            ("svr", "grid_gamma") => self.svr.grid_gamma = parse_list(s, key, value)?,
            ("svr", "folds") => self.svr.folds = parse(s, key, value)?,
            ("svr", "cv_seed") => self.svr.cv_seed = parse(s, key, value)?,

            ("vehicle", "speed") => self.vehicle.speed = parse(s, key, value)?,
            ("vehicle", "wheelbase") => self.vehicle.wheelbase = parse(s, key, value)?,
            ("vehicle", "delta_max") => self.vehicle.delta_max = parse(s, key, value)?,
            ("vehicle", "u_max") => self.vehicle.u_max = parse(s, key, value)?,

            ("barrier", "beta") => self.barrier.beta = parse(s, key, value)?,
            ("barrier", "alpha0") => self.barrier.alphas[0] = parse(s, key, value)?,
            ("barrier", "alpha1") => self.barrier.alphas[1] = parse(s, key, value)?,
            ("barrier", "alpha2") => self.barrier.alphas[2] = parse(s, key, value)?,

            ("sim", "dt") => self.sim.dt = parse(s, key, value)?,
            ("sim", "duration") => self.sim.duration = parse(s, key, value)?,
            ("sim", "x") => self.sim.x = parse(s, key, value)?,
            ("sim", "y") => self.sim.y = parse(s, key, value)?,
            ("sim", "theta") => self.sim.theta = parse(s, key, value)?,
            ("sim", "delta") => self.sim.delta = parse(s, key, value)?,
            ("sim", "goal_x") => self.sim.goal_x = parse(s, key, value)?,
            ("sim", "goal_y") => self.sim.goal_y = parse(s, key, value)?,
            ("sim", "gain") => self.sim.gain = parse(s, key, value)?,
            ("sim", "seed") => self.sim.seed = parse(s, key, value)?,
            ("sim", "disturbance") => self.sim.disturbance = parse(s, key, value)?,
            ("sim", "counterfactual") => self.sim.counterfactual = parse(s, key, value)?,
            ("sim", "svg") => self.sim.svg = parse(s, key, value)?,

            ("verify", "stride") => self.verify.stride = parse(s, key, value)?,
            ("verify", "headings") => self.verify.headings = parse(s, key, value)?,
            ("verify", "steering") => self.verify.steering = parse(s, key, value)?,
            ("verify", "free_only") => self.verify.free_only = parse(s, key, value)?,

            ("bench", "states") => self.bench.states = parse(s, key, value)?,
            ("bench", "seed") => self.bench.seed = parse(s, key, value)?,

            _ => return Err(Error::Config(format!("unknown key {section}.{key}"))),
        }
        Ok(())
    }

    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        let hp = &self.svr.hyperparams;
        ini.with_section(Some("paths"))
            .set("map", path_text(&self.paths.map))
            .set("dataset", path_text(&self.paths.dataset))
            .set("model", path_text(&self.paths.model));
        ini.with_section(Some("map"))
            .set("stride", self.map.stride.to_string())
            .set("band", self.map.band.to_string())
            .set("threshold", self.map.threshold.map(|t| t.to_string()).unwrap_or_default());
        ini.with_section(Some("svr"))
            .set("c", hp.c.to_string())
            .set("epsilon", hp.epsilon.to_string())
            .set("gamma", hp.gamma.to_string())
            .set("length_scale", hp.length_scale.to_string())
            .set("tolerance", self.svr.options.tolerance.to_string())
            .set("max_pair_updates", self.svr.options.max_pair_updates.to_string())
            .set("split_seed", self.svr.split_seed.to_string())
            .set("grid_c", list_text(&self.svr.grid_c))
            .set("grid_epsilon", list_text(&self.svr.grid_epsilon))
            .set("grid_gamma", list_text(&self.svr.grid_gamma))
            .set("folds", self.svr.folds.to_string())
            .set("cv_seed", self.svr.cv_seed.to_string());
        let v = &self.vehicle;
        ini.with_section(Some("vehicle"))
            .set("speed", v.speed.to_string())
            .set("wheelbase", v.wheelbase.to_string())
            .set("delta_max", v.delta_max.to_string())
            .set("u_max", v.u_max.to_string());
        ini.with_section(Some("barrier"))
            .set("beta", self.barrier.beta.to_string())
            .set("alpha0", self.barrier.alphas[0].to_string())
            .set("alpha1", self.barrier.alphas[1].to_string())
            .set("alpha2", self.barrier.alphas[2].to_string());
        let s = &self.sim;
        ini.with_section(Some("sim"))
            .set("dt", s.dt.to_string())
            .set("duration", s.duration.to_string())
            .set("x", s.x.to_string())
            .set("y", s.y.to_string())
            .set("theta", s.theta.to_string())
            .set("delta", s.delta.to_string())
            .set("goal_x", s.goal_x.to_string())
            .set("goal_y", s.goal_y.to_string())
            .set("gain", s.gain.to_string())
            .set("seed", s.seed.to_string())
            .set("disturbance", s.disturbance.to_string())
            .set("counterfactual", s.counterfactual.to_string())
            .set("svg", s.svg.to_string());
        ini.with_section(Some("verify"))
            .set("stride", self.verify.stride.to_string())
            .set("headings", self.verify.headings.to_string())
            .set("steering", self.verify.steering.to_string())
            .set("free_only", self.verify.free_only.to_string());
        ini.with_section(Some("bench"))
            .set("states", self.bench.states.to_string())
            .set("seed", self.bench.seed.to_string());
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is utf-8")
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = &self.sim;
        let initial_state =
            VehicleState::with_steering([s.x, s.y], s.theta, s.delta, &self.vehicle).map_err(|e| {
                Error::Config(format!("sim.delta: {e}"))
            })?;
        let cfg = SimConfig {
            dt: s.dt,
            duration: s.duration,
            initial_state,
            goal: [s.goal_x, s.goal_y],
            nominal_gain: s.gain,
            seed: s.seed,
            disturbance: s.disturbance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the values that do not depend on files.
    pub fn validate(&self) -> Result<()> {
        self.svr.hyperparams.validate()?;
        self.vehicle.validate()?;
        if self.map.stride == 0 {
            return Err(Error::Config("map.stride must be >= 1".into()));
        }
        if self.verify.stride == 0 || self.verify.headings == 0 || self.verify.steering == 0 {
            return Err(Error::Config("verify.stride, verify.headings and verify.steering must be >= 1".into()));
        }
        if self.bench.states == 0 {
            return Err(Error::Config("bench.states must be >= 1".into()));
        }
        inverse_sigmoid(self.sim.delta, self.vehicle.delta_max)
            .map_err(|e| Error::Config(format!("sim.delta: {e}")))?;
        Ok(())
    }
}
