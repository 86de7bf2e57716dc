//! Gaussian (RBF) kernel `k(z, z') = exp(-gamma * |z - z'|^2)` and its
//! closed-form partial derivatives with respect to the first argument.

use crate::Point;

#[inline]
pub fn kernel(z: Point, zp: Point, gamma: f64) -> f64 {
    let dx = z[0] - zp[0];
    let dy = z[1] - zp[1];
    (-gamma * (dx * dx + dy * dy)).exp()
}

/// `d k / d z_a = -2 gamma r_a k` with `r = z - z'`.
#[inline]
pub fn kernel_gradient(z: Point, zp: Point, gamma: f64) -> [f64; 2] {
    let k = kernel(z, zp, gamma);
    let r = [z[0] - zp[0], z[1] - zp[1]];
    [-2.0 * gamma * r[0] * k, -2.0 * gamma * r[1] * k]
}

/// `d2 k / dz_a dz_b = (4 gamma^2 r_a r_b - 2 gamma delta_ab) k`.
#[inline]
pub fn kernel_hessian(z: Point, zp: Point, gamma: f64) -> [[f64; 2]; 2] {
    let k = kernel(z, zp, gamma);
    let r = [z[0] - zp[0], z[1] - zp[1]];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let delta = if a == b { 1.0 } else { 0.0 };
            h[a][b] = (4.0 * gamma * gamma * r[a] * r[b] - 2.0 * gamma * delta) * k;
        }
    }
    h
}

/// `d3 k / dz_a dz_b dz_c
///   = (-8 gamma^3 r_a r_b r_c + 4 gamma^2 (delta_ab r_c + delta_ac r_b + delta_bc r_a)) k`.
#[inline]
pub fn kernel_third(z: Point, zp: Point, gamma: f64) -> [[[f64; 2]; 2]; 2] {
    let k = kernel(z, zp, gamma);
    let r = [z[0] - zp[0], z[1] - zp[1]];
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut t = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                t[a][b][c] = (-8.0 * gamma.powi(3) * r[a] * r[b] * r[c]
                    + 4.0 * gamma * gamma * (d(a, b) * r[c] + d(a, c) * r[b] + d(b, c) * r[a]))
                    * k;
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_on_the_diagonal() {
        for z in [[0.0, 0.0], [3.5, -7.25], [1e3, 1e-3]] {
            assert_eq!(kernel(z, z, 30.0), 1.0);
        }
    }

    #[test]
    fn direct_substitution() {
        assert_eq!(kernel([0.0, 0.0], [1.0, 0.0], 30.0), (-30.0f64).exp());
    }

    #[test]
    fn gradient_vanishes_at_center() {
        assert_eq!(kernel_gradient([2.0, 1.0], [2.0, 1.0], 4.0), [0.0, 0.0]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (z, zp, g) = ([0.3, -0.2], [0.1, 0.15], 2.5);
        let h = 1e-5;
        let grad = kernel_gradient(z, zp, g);
        let hess = kernel_hessian(z, zp, g);
        let third = kernel_third(z, zp, g);
        for a in 0..2 {
            let mut zp_a = z;
            let mut zm_a = z;
            zp_a[a] += h;
            zm_a[a] -= h;
            let fd = (kernel(zp_a, zp, g) - kernel(zm_a, zp, g)) / (2.0 * h);
            assert!((fd - grad[a]).abs() < 1e-8);
            let gp = kernel_gradient(zp_a, zp, g);
            let gm = kernel_gradient(zm_a, zp, g);
            let hp = kernel_hessian(zp_a, zp, g);
            let hm = kernel_hessian(zm_a, zp, g);
            for b in 0..2 {
                assert!(((gp[b] - gm[b]) / (2.0 * h) - hess[a][b]).abs() < 1e-7);
                for c in 0..2 {
                    assert!(((hp[b][c] - hm[b][c]) / (2.0 * h) - third[a][b][c]).abs() < 1e-6);
                }
            }
        }
    }
}
