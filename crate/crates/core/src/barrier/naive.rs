//! Reference evaluation of the barrier stack written directly in the
//! four-dimensional state space.
//!
//! `h0(x) = d(C x) - beta` with `C = [I2 0]`. Every entry of the state-space
//! gradient, Hessian and third-derivative tensor of `h0` is its own scalar
//! loop over the support vectors, and the Lie derivatives are assembled with
//! the generic chain rule from `f`, `J_f`, `d2 f`, `g` and `J_g`. Nothing here
//! uses the planar-velocity shortcuts of [`BarrierStack::evaluate_with`], so
//! the two paths check each other as well as serving as a timing baseline.

use super::{sign0, BarrierEval, BarrierStack};
use crate::svr::kernel::{kernel, kernel_gradient, kernel_hessian, kernel_third};
use crate::svr::SvrModel;
use crate::vehicle::{drift, input_field, sigmoid_slope, VehicleParams, VehicleState};

type V4 = [f64; 4];
type M4 = [[f64; 4]; 4];
type T4 = [[[f64; 4]; 4]; 4];

/// Output map `C = [I2 0]`.
const C: [[f64; 4]; 2] = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];

fn h0_value(m: &SvrModel, z: [f64; 2]) -> f64 {
    let mut acc = m.bias();
    for i in 0..m.n_sv() {
        acc += m.kappas()[i] * kernel(z, m.support_vector(i), m.gamma());
    }
    acc
}

fn h0_gradient(m: &SvrModel, z: [f64; 2]) -> V4 {
    let mut out = [0.0; 4];
    for (a, o) in out.iter_mut().enumerate() {
        for i in 0..m.n_sv() {
            let g = kernel_gradient(z, m.support_vector(i), m.gamma());
            for p in 0..2 {
                *o += m.kappas()[i] * C[p][a] * g[p];
            }
        }
    }
    out
}

fn h0_hessian(m: &SvrModel, z: [f64; 2]) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for i in 0..m.n_sv() {
                let h = kernel_hessian(z, m.support_vector(i), m.gamma());
                for p in 0..2 {
                    for q in 0..2 {
                        out[a][b] += m.kappas()[i] * C[p][a] * C[q][b] * h[p][q];
                    }
                }
            }
        }
    }
    out
}

fn h0_third(m: &SvrModel, z: [f64; 2]) -> T4 {
    let mut out = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for i in 0..m.n_sv() {
                    let t = kernel_third(z, m.support_vector(i), m.gamma());
                    for p in 0..2 {
                        for q in 0..2 {
                            for r in 0..2 {
                                out[a][b][c] += m.kappas()[i] * C[p][a] * C[q][b] * C[r][c] * t[p][q][r];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `J_f[i][j] = d f_i / d x_j`.
fn drift_jacobian(s: &VehicleState, p: &VehicleParams) -> M4 {
    let (delta, dphi) = (s.steering(p), sigmoid_slope(s.zeta, p.delta_max));
    let psi = s.theta + delta;
    let (sp, cp) = psi.sin_cos();
    let v = p.speed;
    let mut j = [[0.0; 4]; 4];
    j[0][2] = -v * sp;
    j[0][3] = -v * sp * dphi;
    j[1][2] = v * cp;
    j[1][3] = v * cp * dphi;
    j[2][3] = v * delta.cos() * dphi / p.wheelbase;
    j
}

/// `d2f[i][j][k] = d2 f_i / dx_j dx_k`.
fn drift_second(s: &VehicleState, p: &VehicleParams) -> T4 {
    let (delta, dphi) = (s.steering(p), sigmoid_slope(s.zeta, p.delta_max));
    // phi'' = -phi' tanh(zeta / 2)
    let ddphi = -dphi * (0.5 * s.zeta).tanh();
    let psi = s.theta + delta;
    let (sp, cp) = psi.sin_cos();
    let v = p.speed;
    let mut t = [[[0.0; 4]; 4]; 4];
    t[0][2][2] = -v * cp;
    t[0][2][3] = -v * cp * dphi;
    t[0][3][2] = t[0][2][3];
    t[0][3][3] = -v * cp * dphi * dphi - v * sp * ddphi;
    t[1][2][2] = -v * sp;
    t[1][2][3] = -v * sp * dphi;
    t[1][3][2] = t[1][2][3];
    t[1][3][3] = -v * sp * dphi * dphi + v * cp * ddphi;
    t[2][3][3] = v * (-delta.sin() * dphi * dphi + delta.cos() * ddphi) / p.wheelbase;
    t
}

/// `J_g[i][j] = d g_i / d x_j`.
fn input_jacobian(s: &VehicleState, p: &VehicleParams) -> M4 {
    let dphi = sigmoid_slope(s.zeta, p.delta_max);
    let ddphi = -dphi * (0.5 * s.zeta).tanh();
    let mut j = [[0.0; 4]; 4];
    j[3][3] = -ddphi / (dphi * dphi);
    j
}

fn dot(a: &V4, b: &V4) -> f64 {
    (0..4).map(|i| a[i] * b[i]).sum()
}

pub(super) fn evaluate(stack: &BarrierStack, s: &VehicleState) -> BarrierEval {
    let m = stack.model();
    let p = stack.params();
    let [a0, a1, _] = stack.alphas();
    let z = [
        C[0].iter().zip(s.to_array()).map(|(c, x)| c * x).sum::<f64>(),
        C[1].iter().zip(s.to_array()).map(|(c, x)| c * x).sum::<f64>(),
    ];

    let h0 = h0_value(m, z) - stack.beta();
    let dh0 = h0_gradient(m, z);
    let ddh0 = h0_hessian(m, z);
    let dddh0 = h0_third(m, z);

    let f = drift(s, p);
    let jf = drift_jacobian(s, p);
    let d2f = drift_second(s, p);
    let g = input_field(s, p);
    let jg = input_jacobian(s, p);

    // h1 = dh0 . f + a0 h0
    let h1 = dot(&dh0, &f) + a0 * h0;
    let mut dh1 = [0.0; 4];
    let mut ddh1 = [[0.0; 4]; 4];
    for j in 0..4 {
        dh1[j] = a0 * dh0[j];
        for i in 0..4 {
            dh1[j] += ddh0[i][j] * f[i] + dh0[i] * jf[i][j];
        }
        for k in 0..4 {
            ddh1[j][k] = a0 * ddh0[j][k];
            for i in 0..4 {
                ddh1[j][k] += dddh0[i][j][k] * f[i]
                    + ddh0[i][j] * jf[i][k]
                    + ddh0[i][k] * jf[i][j]
                    + dh0[i] * d2f[i][j][k];
            }
        }
    }

    let lf_h1 = dot(&dh1, &f);
    let lg_h1 = dot(&dh1, &g);
    let h2 = lf_h1 - p.u_max * lg_h1.abs() + a1 * h1;

    let sg = sign0(lg_h1);
    let mut dh2 = [0.0; 4];
    for k in 0..4 {
        let mut d_lf = 0.0;
        let mut d_lg = 0.0;
        for j in 0..4 {
            d_lf += ddh1[j][k] * f[j] + dh1[j] * jf[j][k];
            d_lg += ddh1[j][k] * g[j] + dh1[j] * jg[j][k];
        }
        dh2[k] = d_lf - p.u_max * sg * d_lg + a1 * dh1[k];
    }

    BarrierEval {
        h: [h0, h1, h2],
        lf_h1,
        lg_h1,
        lf_h2: dot(&dh2, &f),
        lg_h2: dot(&dh2, &g),
    }
}
