//! Independent reference computations shared by the oracle suites and the
//! acceptance run. Checks return `Err(message)` instead of panicking so a
//! caller can report them.

use learned_iccbf::barrier::{decide, BarrierEval, BarrierStack, OVERRIDE_TOLERANCE};
use learned_iccbf::map::{EdfDataset, GridGeometry, OccupancyGrid};
use learned_iccbf::svr::{SvrHyperparams, SvrModel};
use learned_iccbf::vehicle::{dynamics, VehicleParams, VehicleState};
use rand::Rng;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn brute_force_edf(grid: &OccupancyGrid) -> Vec<f64> {
    let g = *grid.geometry();
    let occupied: Vec<(i64, i64)> = (0..g.height)
        .flat_map(|j| (0..g.width).map(move |i| (i, j)))
        .filter(|&(i, j)| grid.is_occupied(i, j))
        .map(|(i, j)| (i as i64, j as i64))
        .collect();
    let mut out = Vec::with_capacity(g.len());
    for j in 0..g.height as i64 {
        for i in 0..g.width as i64 {
            let best = occupied
                .iter()
                .map(|&(a, b)| (a - i).pow(2) + (b - j).pow(2))
                .min()
                .unwrap();
            out.push((best as f64).sqrt() * g.resolution);
        }
    }
    out
}

/// Random grid up to `max` cells a side with both free and occupied cells.
pub fn random_grid(rng: &mut impl Rng, max: usize) -> OccupancyGrid {
    loop {
        let (w, h) = (rng.random_range(1..=max), rng.random_range(1..=max));
        let res = [1.0, 0.25, 2.5][rng.random_range(0..3)];
        let cells: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.2)).collect();
        let Ok(g) = GridGeometry::new(w, h, res, [0.0, 0.0]) else { continue };
        if let Ok(grid) = OccupancyGrid::new(g, cells) {
            return grid;
        }
    }
}

/// Gradient by central differences (step 1e-5), Hessian and third tensor by
/// nested central differences of values (step 1e-2). The absolute floors sit
/// above the rounding error on flat parts of the field.
pub fn derivative_fd(m: &SvrModel, z: [f64; 2]) -> Check {
    let d = m.derivatives(z);
    let f = |x: f64, y: f64| m.predict([x, y]);

    let h = 1e-5;
    let g = [
        (f(z[0] + h, z[1]) - f(z[0] - h, z[1])) / (2.0 * h),
        (f(z[0], z[1] + h) - f(z[0], z[1] - h)) / (2.0 * h),
    ];
    let gscale = d.gradient[0].abs().max(d.gradient[1].abs());
    for a in 0..2 {
        ensure!(
            (g[a] - d.gradient[a]).abs() <= 1e-5 * d.gradient[a].abs().max(gscale).max(1e-3),
            "gradient {a} at {z:?}: fd {} vs {}",
            g[a],
            d.gradient[a]
        );
    }

    let h = 1e-2;
    let shifted = |s: &[(usize, f64)]| {
        let mut p = z;
        for &(a, k) in s {
            p[a] += k * h;
        }
        f(p[0], p[1])
    };
    let hscale = d.hessian.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for a in 0..2 {
        for b in 0..2 {
            let fd = (shifted(&[(a, 1.0), (b, 1.0)]) - shifted(&[(a, 1.0), (b, -1.0)]) - shifted(&[(a, -1.0), (b, 1.0)])
                + shifted(&[(a, -1.0), (b, -1.0)]))
                / (4.0 * h * h);
            ensure!(
                (fd - d.hessian[a][b]).abs() <= 1e-3 * d.hessian[a][b].abs().max(hscale).max(1e-6),
                "hessian {a}{b} at {z:?}: fd {fd} vs {}",
                d.hessian[a][b]
            );
        }
    }
    let tscale = d.third.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let mut fd = 0.0;
                for (sa, sb, sc) in [(1.0, 1.0, 1.0), (1.0, 1.0, -1.0), (1.0, -1.0, 1.0), (1.0, -1.0, -1.0)] {
                    for sign in [1.0, -1.0] {
                        fd += sign * sa * sb * sc * shifted(&[(a, sign * sa), (b, sign * sb), (c, sign * sc)]);
                    }
                }
                fd /= 8.0 * h * h * h;
                ensure!(
                    (fd - d.third[a][b][c]).abs() <= 1e-3 * d.third[a][b][c].abs().max(tscale).max(1e-4),
                    "third {a}{b}{c} at {z:?}: fd {fd} vs {}",
                    d.third[a][b][c]
                );
            }
        }
    }
    Ok(())
}

/// Dual feasibility and the tube conditions of a fit, given its coefficients
/// on the training samples.
pub fn kkt(data: &EdfDataset, hp: &SvrHyperparams, model: &SvrModel, coefficients: &[f64]) -> Check {
    ensure!(coefficients.len() == data.len(), "one coefficient per sample");
    let worst_box = coefficients.iter().fold(0.0f64, |m, k| m.max(k.abs() - hp.c));
    ensure!(worst_box <= 1e-8, "coefficient exceeds C by {worst_box}");
    let sum: f64 = coefficients.iter().sum();
    ensure!(sum.abs() <= 1e-8 * data.len() as f64, "coefficients sum to {sum}");
    ensure!(model.n_sv() <= data.len(), "more support vectors than samples");
    let tol = 1e-4;
    for (s, &kappa) in data.samples.iter().zip(coefficients) {
        let r = s.d - model.predict(s.z);
        if kappa.abs() < hp.c - 1e-9 {
            // inside or on the tube
            ensure!(r.abs() <= hp.epsilon + tol, "free sample at {:?} has residual {r}", s.z);
        }
        if kappa != 0.0 {
            // on or outside the tube, on the side of the coefficient
            ensure!(kappa.signum() * r >= hp.epsilon - tol, "support vector at {:?} has residual {r}", s.z);
        }
    }
    Ok(())
}

pub fn shift(s: &VehicleState, dir: [f64; 4], eps: f64) -> VehicleState {
    let a = s.to_array();
    VehicleState::from_array(std::array::from_fn(|i| a[i] + eps * dir[i]))
}

/// Central difference of `f` along `dir`.
pub fn directional(f: impl Fn(&VehicleState) -> f64, s: &VehicleState, dir: [f64; 4], eps: f64) -> f64 {
    (f(&shift(s, dir, eps)) - f(&shift(s, dir, -eps))) / (2.0 * eps)
}

/// Drift and input directions, recovered from the dynamics at `u = 0, 1`.
pub fn drift_and_input(s: &VehicleState, p: &VehicleParams) -> ([f64; 4], [f64; 4]) {
    let f = dynamics(s, 0.0, p);
    let f1 = dynamics(s, 1.0, p);
    (f, std::array::from_fn(|i| f1[i] - f[i]))
}

pub fn u_grid(u_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| -u_max + 2.0 * u_max * k as f64 / n as f64).collect()
}

/// `h1` from the rate of `h0` along the drift and `h2` from the infimum of
/// the rate of `h1` over the input grid `us`.
pub fn barrier_infimum(stack: &BarrierStack, s: &VehicleState, us: &[f64], tol: f64) -> Check {
    let p = stack.params();
    let [a0, a1, _] = stack.alphas();
    let (f, g) = drift_and_input(s, p);
    let e = stack.evaluate(s);
    let eps = 1e-5;

    let h1 = directional(|x| stack.h0(x), s, f, eps) + a0 * stack.h0(s);
    ensure!((e.h[1] - h1).abs() <= tol, "h1 at {s:?}: {} vs {h1}", e.h[1]);

    let lf = directional(|x| stack.h1(x), s, f, eps);
    let lg = directional(|x| stack.h1(x), s, g, eps);
    let inf = us.iter().map(|u| lf + lg * u).fold(f64::INFINITY, f64::min);
    let h2 = inf + a1 * h1;
    ensure!((e.h[2] - h2).abs() <= tol, "h2 at {s:?}: {} vs {h2}", e.h[2]);
    ensure!((e.lg_h1 - lg).abs() <= tol, "lg_h1 at {s:?}: {} vs {lg}", e.lg_h1);
    Ok(())
}

/// Finite differences of `h2` along the drift and input fields (step 1e-6).
/// `None` where the stencil touches the kink of `|L_g h1|`.
pub fn lie_h2_fd(stack: &BarrierStack, s: &VehicleState) -> Option<Check> {
    let eps = 1e-6;
    let (f, g) = drift_and_input(s, stack.params());
    let lg_h1 = |x: &VehicleState| stack.evaluate(x).lg_h1;
    let s0 = lg_h1(s);
    let stencil = [shift(s, f, eps), shift(s, f, -eps), shift(s, g, eps), shift(s, g, -eps)];
    if s0.abs() < 1e-6 || stencil.iter().any(|x| lg_h1(x).signum() != s0.signum()) {
        return None;
    }
    let (lf, lg) = stack.lie_h2(s);
    let lf_fd = directional(|x| stack.h2(x), s, f, eps);
    let lg_fd = directional(|x| stack.h2(x), s, g, eps);
    Some((|| {
        ensure!((lf - lf_fd).abs() <= 1e-4 * lf.abs().max(1.0), "L_f h2 at {s:?}: {lf} vs {lf_fd}");
        ensure!((lg - lg_fd).abs() <= 1e-4 * lg.abs().max(1.0), "L_g h2 at {s:?}: {lg} vs {lg_fd}");
        Ok(())
    })())
}

/// Nearest feasible input on the grid `us`, or the least violating one.
pub fn projection(e: &BarrierEval, u_nom: f64, a2: f64, us: &[f64]) -> (f64, bool) {
    let c = |u: f64| e.constraint(u, a2);
    let feasible = us.iter().copied().filter(|&u| c(u) >= 0.0);
    match feasible.min_by(|a, b| (a - u_nom).abs().total_cmp(&(b - u_nom).abs())) {
        Some(u) => (u, true),
        None => (us.iter().copied().max_by(|a, b| c(*a).total_cmp(&c(*b))).unwrap(), false),
    }
}

/// The filter decision against [`projection`] on a uniform grid over
/// `[-u_max, u_max]`.
pub fn filter_projection(e: &BarrierEval, u_nom: f64, a2: f64, u_max: f64, us: &[f64]) -> Check {
    let step = 2.0 * u_max / (us.len() - 1) as f64;
    let d = decide(e, u_nom, a2, u_max);
    let (u_star, feasible) = projection(e, u_nom, a2, us);
    ensure!((d.u_applied - u_star).abs() <= step + 1e-9, "applied {} vs oracle {u_star}", d.u_applied);
    if feasible {
        ensure!(d.violation == 0.0, "feasible case reported violation {}", d.violation);
    } else {
        let least = -e.constraint(u_star, a2);
        ensure!((d.violation - least).abs() <= e.lg_h2.abs() * step + 1e-9, "violation {} vs {least}", d.violation);
    }
    if d.violation == 0.0 {
        ensure!(e.constraint(d.u_applied, a2) >= -1e-9, "applied input violates the constraint");
    }
    ensure!(d.overridden == (e.constraint(u_nom, a2) < -OVERRIDE_TOLERANCE), "override flag");
    ensure!(d.overridden || d.u_applied == u_nom, "nominal input changed without override");
    Ok(())
}
