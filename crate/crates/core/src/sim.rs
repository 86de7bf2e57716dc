//! Closed-loop rollout of a goal-seeking nominal controller through the
//! safety filter, with per-step logging and a post-hoc safety report.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barrier::{BarrierStack, FilterDecision, OVERRIDE_TOLERANCE};
use crate::error::{Error, Result};
use crate::map::{DistanceField, GridGeometry};
use crate::vehicle::{step_rk4, VehicleParams, VehicleState};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub initial_state: VehicleState,
    pub goal: Point,
    pub nominal_gain: f64,
    pub seed: u64,
    /// Bound of a uniform additive input disturbance; 0 disables it.
    pub disturbance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            duration: 60.0,
            initial_state: VehicleState::default(),
            goal: [0.0, 0.0],
            nominal_gain: 2.0,
            seed: 0,
            disturbance: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > self.dt && self.duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "duration {} must exceed dt {}",
                self.duration, self.dt
            )));
        }
        if !(self.nominal_gain > 0.0 && self.nominal_gain.is_finite()) {
            return Err(Error::InvalidArgument("nominal gain must be positive".into()));
        }
        if !(self.disturbance >= 0.0 && self.disturbance.is_finite()) {
            return Err(Error::InvalidArgument("disturbance bound must be >= 0".into()));
        }
        if !self.initial_state.is_finite() || !self.goal.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("simulation initial state or goal"));
        }
        Ok(())
    }

    /// `floor(duration / dt)`, robust to representation error in the ratio.
    pub fn steps(&self) -> usize {
        let r = self.duration / self.dt;
        let n = r.round();
        if (r - n).abs() < 1e-9 * n.max(1.0) {
            n as usize
        } else {
            r.floor() as usize
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = a - TAU * (a / TAU).round();
    if w <= -PI {
        w + TAU
    } else if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Proportional steering-rate law toward the goal bearing.
pub fn nominal_controller(s: &VehicleState, goal: Point, gain: f64, params: &VehicleParams) -> f64 {
    let bearing = (goal[1] - s.y).atan2(goal[0] - s.x);
    let err = wrap_angle(bearing - (s.theta + s.steering(params)));
    (gain * err).clamp(-params.u_max, params.u_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub state: VehicleState,
    pub delta: f64,
    pub decision: FilterDecision,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

pub const TRAJECTORY_HEADER: &str =
    "t,x_f,y_f,theta,zeta,delta,u_nom,u_applied,overridden,h0,h1,h2,residual,violation";

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.rows.iter().map(|r| r.state.position()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(160 * (self.rows.len() + 1));
        out.push_str(TRAJECTORY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (s, d) = (&r.state, &r.decision);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                s.x,
                s.y,
                s.theta,
                s.zeta,
                r.delta,
                d.u_nominal,
                d.u_applied,
                u8::from(d.overridden),
                d.h[0],
                d.h[1],
                d.h[2],
                d.constraint_residual,
                d.violation
            );
        }
        out
    }
}

/// Runs the closed loop. With `filter == false` the nominal input is applied
/// unchanged (the barrier terms are still evaluated and logged).
///
/// Returns the trajectory and, if the initial state is outside the safe set,
/// a warning message.
pub fn rollout(
    config: &SimConfig,
    stack: &BarrierStack,
    geometry: Option<&GridGeometry>,
    filter: bool,
) -> Result<(Trajectory, Option<String>)> {
    config.validate()?;
    if let Some(g) = geometry {
        if !g.contains(config.initial_state.position()) {
            return Err(Error::InvalidArgument(format!(
                "initial position {:?} is off the map",
                config.initial_state.position()
            )));
        }
        if !g.contains(config.goal) {
            return Err(Error::InvalidArgument(format!("goal {:?} is off the map", config.goal)));
        }
    }
    let params = *stack.params();
    let steps = config.steps();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = config.initial_state;
    let mut rows = Vec::with_capacity(steps + 1);

    let h_init = stack.evaluate(&state).h;
    let warning = (!h_init.iter().all(|&h| h >= 0.0))
        .then(|| format!("initial state is outside the safe set (h = {h_init:?})"));

    for k in 0..=steps {
        let t = k as f64 * config.dt;
        let u_nom = nominal_controller(&state, config.goal, config.nominal_gain, &params);
        let mut decision = stack.safety_filter(&state, u_nom)?;
        if !filter {
            decision.u_applied = u_nom;
            decision.overridden = false;
            decision.violation = 0.0;
        }
        rows.push(TrajectoryRow {
            t,
            state,
            delta: state.steering(&params),
            decision,
        });
        if k == steps {
            break;
        }
        let mut u = decision.u_applied;
        if config.disturbance > 0.0 {
            u += rng.random_range(-config.disturbance..=config.disturbance);
        }
        state = step_rk4(&state, u, config.dt, &params);
        if !state.is_finite() {
            return Err(Error::NonFinite("simulated state"));
        }
    }
    Ok((Trajectory { rows }, warning))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyReport {
    pub steps: usize,
    pub min_h0: f64,
    pub min_true_distance: f64,
    pub overridden_steps: usize,
    pub violation_steps: usize,
    pub max_violation: f64,
    pub engaged_fraction: f64,
    pub max_abs_delta: f64,
    pub max_abs_u: f64,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.violation_steps == 0 && self.min_h0 >= 0.0 && self.min_true_distance > 0.0
    }

    /// Machine-parseable `key = value` block.
    pub fn to_text(&self) -> String {
        format!(
            "steps = {}\nmin_h0 = {}\nmin_true_distance = {}\noverridden_steps = {}\nviolation_steps = {}\nmax_violation = {}\nengaged_fraction = {}\nmax_abs_delta = {}\nmax_abs_u = {}\n",
            self.steps,
            self.min_h0,
            self.min_true_distance,
            self.overridden_steps,
            self.violation_steps,
            self.max_violation,
            self.engaged_fraction,
            self.max_abs_delta,
            self.max_abs_u
        )
    }
}

pub fn safety_report(traj: &Trajectory, field: &DistanceField) -> Result<SafetyReport> {
    if traj.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let mut r = SafetyReport {
        steps: traj.len(),
        min_h0: f64::INFINITY,
        min_true_distance: f64::INFINITY,
        overridden_steps: 0,
        violation_steps: 0,
        max_violation: 0.0,
        engaged_fraction: 0.0,
        max_abs_delta: 0.0,
        max_abs_u: 0.0,
    };
    for row in &traj.rows {
        let d = &row.decision;
        r.min_h0 = r.min_h0.min(d.h[0]);
        r.min_true_distance = r.min_true_distance.min(field.interpolate(row.state.position()));
        r.overridden_steps += usize::from(d.overridden);
        if d.violation > 0.0 {
            r.violation_steps += 1;
            r.max_violation = r.max_violation.max(d.violation);
        }
        r.max_abs_delta = r.max_abs_delta.max(row.delta.abs());
        r.max_abs_u = r.max_abs_u.max(d.u_applied.abs());
    }
    r.engaged_fraction = r.overridden_steps as f64 / r.steps as f64;
    Ok(r)
}

/// Rows whose override flag disagrees with the constraint residual.
pub fn override_mismatches(traj: &Trajectory) -> usize {
    traj.rows
        .iter()
        .filter(|r| r.decision.overridden != (r.decision.constraint_residual < -OVERRIDE_TOLERANCE))
        .count()
}
