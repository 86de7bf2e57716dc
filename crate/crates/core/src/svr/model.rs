use super::kernel::{kernel, kernel_gradient, kernel_hessian, kernel_third};
use crate::error::{Error, Result};
use crate::Point;

/// Width of the independent accumulators in the batched kernel sum.
const LANES: usize = 4;
/// Support vectors processed per batch.
const BATCH: usize = 64;

/// Kernel expansion `d(z) = sum_i kappa_i k(z_i, z) + bias`.
///
/// Support vectors are stored as separate coordinate arrays so the batched
/// derivative pass streams through contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    xs: Vec<f64>,
    ys: Vec<f64>,
    kappas: Vec<f64>,
    bias: f64,
    /// Kernel width in 1/m^2 (already includes any input scaling).
    gamma: f64,
}

/// Value and spatial derivatives of the regressor through third order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DerivativeBundle {
    pub value: f64,
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    pub third: [[[f64; 2]; 2]; 2],
}

impl DerivativeBundle {
    /// `sum_abc T_abc u_a v_b w_c`
    pub fn third_contract(&self, u: [f64; 2], v: [f64; 2], w: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    s += self.third[a][b][c] * u[a] * v[b] * w[c];
                }
            }
        }
        s
    }

    /// `u^T H v`
    pub fn hessian_form(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let h = &self.hessian;
        u[0] * (h[0][0] * v[0] + h[0][1] * v[1]) + u[1] * (h[1][0] * v[0] + h[1][1] * v[1])
    }

    pub fn gradient_dot(&self, u: [f64; 2]) -> f64 {
        self.gradient[0] * u[0] + self.gradient[1] * u[1]
    }
}

impl SvrModel {
    pub fn new(support_vectors: Vec<Point>, kappas: Vec<f64>, bias: f64, gamma: f64) -> Result<Self> {
        if support_vectors.is_empty() {
            return Err(Error::ModelFormat("model has no support vectors".into()));
        }
        if support_vectors.len() != kappas.len() {
            return Err(Error::ModelFormat(format!(
                "{} support vectors but {} coefficients",
                support_vectors.len(),
                kappas.len()
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::ModelFormat(format!("kernel width must be positive, got {gamma}")));
        }
        let finite = bias.is_finite()
            && kappas.iter().all(|k| k.is_finite())
            && support_vectors.iter().all(|p| p[0].is_finite() && p[1].is_finite());
        if !finite {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(SvrModel {
            xs: support_vectors.iter().map(|p| p[0]).collect(),
            ys: support_vectors.iter().map(|p| p[1]).collect(),
            kappas,
            bias,
            gamma,
        })
    }

    pub fn n_sv(&self) -> usize {
        self.kappas.len()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn support_vector(&self, i: usize) -> Point {
        [self.xs[i], self.ys[i]]
    }

    pub fn support_vectors(&self) -> impl ExactSizeIterator<Item = Point> + '_ {
        self.xs.iter().zip(&self.ys).map(|(&x, &y)| [x, y])
    }

    pub fn predict(&self, z: Point) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n_sv() {
            s += self.kappas[i] * kernel(self.support_vector(i), z, self.gamma);
        }
        s + self.bias
    }

    /// Analytic value, gradient, Hessian and third-derivative tensor at `z`.
    ///
    /// One pass over the support vectors accumulates the ten distinct
    /// kernel moments `sum kappa_i k_i r^m` (`r = z - z_i`, `|m| <= 3`),
    /// from which every derivative entry follows in closed form.
    pub fn derivatives(&self, z: Point) -> DerivativeBundle {
        let m = self.moments(z);
        let g = self.gamma;
        let g2 = g * g;
        let g3 = g2 * g;

        let s0 = m[0];
        let s1 = [m[1], m[2]];
        let s2 = [[m[3], m[4]], [m[4], m[5]]];
        // s3[a][b][c] over the four distinct monomials xxx, xxy, xyy, yyy
        let cubic = [m[6], m[7], m[8], m[9]];
        let s3 = |a: usize, b: usize, c: usize| cubic[a + b + c];

        let mut out = DerivativeBundle {
            value: s0 + self.bias,
            gradient: [-2.0 * g * s1[0], -2.0 * g * s1[1]],
            ..Default::default()
        };
        for a in 0..2 {
            for b in 0..2 {
                let delta_ab = if a == b { s0 } else { 0.0 };
                out.hessian[a][b] = 4.0 * g2 * s2[a][b] - 2.0 * g * delta_ab;
                for c in 0..2 {
                    let mut trace = 0.0;
                    if a == b {
                        trace += s1[c];
                    }
                    if a == c {
                        trace += s1[b];
                    }
                    if b == c {
                        trace += s1[a];
                    }
                    out.third[a][b][c] = -8.0 * g3 * s3(a, b, c) + 4.0 * g2 * trace;
                }
            }
        }
        out
    }

    /// Moments `[1, x, y, xx, xy, yy, xxx, xxy, xyy, yyy]` of `kappa_i k_i` in `r = z - z_i`.
    fn moments(&self, z: Point) -> [f64; 10] {
        let n = self.n_sv();
        let mut acc = [[0.0f64; LANES]; 10];
        let mut rx = [0.0f64; BATCH];
        let mut ry = [0.0f64; BATCH];
        let mut w = [0.0f64; BATCH];

        let mut start = 0;
        while start < n {
            let len = BATCH.min(n - start);
            let xs = &self.xs[start..start + len];
            let ys = &self.ys[start..start + len];
            let ks = &self.kappas[start..start + len];
            for t in 0..len {
                rx[t] = z[0] - xs[t];
                ry[t] = z[1] - ys[t];
                w[t] = -self.gamma * (rx[t] * rx[t] + ry[t] * ry[t]);
            }
            for t in 0..len {
                w[t] = exp_nonpositive(w[t]) * ks[t];
            }
            // padding lanes contribute zero weight
            for t in len..len.next_multiple_of(LANES) {
                w[t] = 0.0;
                rx[t] = 0.0;
                ry[t] = 0.0;
            }
            for t in (0..len.next_multiple_of(LANES)).step_by(LANES) {
                for l in 0..LANES {
                    let (x, y, wt) = (rx[t + l], ry[t + l], w[t + l]);
                    let wx = wt * x;
                    let wy = wt * y;
                    let wxx = wx * x;
                    let wxy = wx * y;
                    let wyy = wy * y;
                    acc[0][l] += wt;
                    acc[1][l] += wx;
                    acc[2][l] += wy;
                    acc[3][l] += wxx;
                    acc[4][l] += wxy;
                    acc[5][l] += wyy;
                    acc[6][l] += wxx * x;
                    acc[7][l] += wxx * y;
                    acc[8][l] += wxy * y;
                    acc[9][l] += wyy * y;
                }
            }
            start += len;
        }
        let mut out = [0.0; 10];
        for (o, lanes) in out.iter_mut().zip(&acc) {
            *o = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
        }
        out
    }

    /// Reference evaluation: one scalar loop per derivative order, each
    /// support vector handled through the closed-form kernel derivatives.
    pub fn derivatives_naive(&self, z: Point) -> DerivativeBundle {
        let mut out = DerivativeBundle {
            value: self.predict(z),
            ..Default::default()
        };
        for i in 0..self.n_sv() {
            let g = kernel_gradient(z, self.support_vector(i), self.gamma);
            for a in 0..2 {
                out.gradient[a] += self.kappas[i] * g[a];
            }
        }
        for i in 0..self.n_sv() {
            let h = kernel_hessian(z, self.support_vector(i), self.gamma);
            for a in 0..2 {
                for b in 0..2 {
                    out.hessian[a][b] += self.kappas[i] * h[a][b];
                }
            }
        }
        for i in 0..self.n_sv() {
            let t = kernel_third(z, self.support_vector(i), self.gamma);
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        out.third[a][b][c] += self.kappas[i] * t[a][b][c];
                    }
                }
            }
        }
        out
    }
}

/// `exp(x)` for `x <= 0`, written without branches or libm calls so the
/// batch loop vectorizes. Relative error is within a few ulp of `f64::exp`;
/// arguments below -700 flush to zero.
#[inline(always)]
pub(crate) fn exp_nonpositive(x: f64) -> f64 {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238_2e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // 1.5 * 2^52: adding it rounds to an integer held in the low mantissa bits
    const SHIFTER: f64 = 6_755_399_441_055_744.0;

    let keep = if x < -700.0 { 0.0 } else { 1.0 };
    let x = x.max(-700.0);
    let t = x * LOG2E + SHIFTER;
    let n = t - SHIFTER;
    let r = (x - n * LN2_HI) - n * LN2_LO;

    // Taylor polynomial through r^13 on |r| <= ln2 / 2
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;

    let k = (t.to_bits() as i64).wrapping_sub(SHIFTER.to_bits() as i64);
    let scale = f64::from_bits(((k + 1023) << 52) as u64);
    p * scale * keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> SvrModel {
        SvrModel::new(vec![[0.0, 0.0]], vec![1.0], 0.0, 30.0).unwrap()
    }

    #[test]
    fn single_support_vector_values() {
        let m = single();
        assert_eq!(m.predict([0.0, 0.0]), 1.0);
        assert_eq!(m.predict([1.0, 0.0]), (-30.0f64).exp());
        assert_eq!(m.derivatives([0.0, 0.0]).gradient, [0.0, 0.0]);
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(SvrModel::new(vec![], vec![], 0.0, 1.0).is_err());
        assert!(SvrModel::new(vec![[0.0, 0.0]], vec![1.0, 2.0], 0.0, 1.0).is_err());
        assert!(SvrModel::new(vec![[0.0, 0.0]], vec![1.0], 0.0, 0.0).is_err());
        assert!(SvrModel::new(vec![[0.0, 0.0]], vec![f64::NAN], 0.0, 1.0).is_err());
    }

    #[test]
    fn exp_matches_libm() {
        let mut worst: f64 = 0.0;
        let mut x: f64 = -700.0;
        while x <= 0.0 {
            let exact = x.exp();
            let rel = (exp_nonpositive(x) - exact).abs() / exact;
            worst = worst.max(rel);
            x += 0.0137;
        }
        assert!(worst < 4.0 * f64::EPSILON, "worst relative error {worst:e}");
        assert_eq!(exp_nonpositive(0.0), 1.0);
        assert_eq!(exp_nonpositive(-1e4), 0.0);
        assert_eq!(exp_nonpositive(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn batched_pass_matches_scalar_loops() {
        let svs: Vec<Point> = (0..203)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.cos() * 10.0 + 0.1 * t, t.sin() * 7.0]
            })
            .collect();
        let kappas: Vec<f64> = (0..203).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let m = SvrModel::new(svs, kappas, 1.25, 0.075).unwrap();
        for z in [[0.0, 0.0], [3.0, -2.0], [9.5, 1.0], [-40.0, 30.0]] {
            let a = m.derivatives(z);
            let b = m.derivatives_naive(z);
            assert!((a.value - b.value).abs() < 1e-10);
            for i in 0..2 {
                assert!((a.gradient[i] - b.gradient[i]).abs() < 1e-10);
                for j in 0..2 {
                    assert!((a.hessian[i][j] - b.hessian[i][j]).abs() < 1e-10);
                    for k in 0..2 {
                        assert!((a.third[i][j][k] - b.third[i][j][k]).abs() < 1e-10);
                    }
                }
            }
        }
    }
}
