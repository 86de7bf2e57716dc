use super::BarrierEval;

/// Constraint values at or above `-OVERRIDE_TOLERANCE` count as satisfied.
pub const OVERRIDE_TOLERANCE: f64 = 1e-9;
/// `|L_g h2|` at or below this is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDecision {
    pub u_nominal: f64,
    pub u_applied: f64,
    /// The nominal input violated the constraint and the filter took over.
    pub overridden: bool,
    pub h: [f64; 3],
    /// `(L_f h2, L_g h2)`
    pub lie: (f64, f64),
    /// Constraint value at the nominal input.
    pub constraint_residual: f64,
    /// Remaining constraint violation at the applied input (0 when feasible).
    pub violation: f64,
}

/// Closed-form solution of `min |u - u_nom|^2` s.t. the scalar affine
/// constraint and `|u| <= u_max`.
///
/// When the unconstrained override leaves the box, clamping it is the
/// feasible input of least violation. When `L_g h2` vanishes no input can
/// change the constraint and the nominal input is kept.
pub fn decide(e: &BarrierEval, u_nom: f64, alpha2: f64, u_max: f64) -> FilterDecision {
    let (lf, lg) = (e.lf_h2, e.lg_h2);
    let drift_term = lf + alpha2 * e.h[2];
    let residual = drift_term + lg * u_nom;

    let mut out = FilterDecision {
        u_nominal: u_nom,
        u_applied: u_nom,
        overridden: false,
        h: e.h,
        lie: (lf, lg),
        constraint_residual: residual,
        violation: 0.0,
    };
    if residual >= -OVERRIDE_TOLERANCE {
        return out;
    }
    out.overridden = true;
    if lg.abs() > RANK_TOLERANCE {
        let u_safe = -drift_term / lg;
        out.u_applied = u_safe.clamp(-u_max, u_max);
        out.violation = (-(drift_term + lg * out.u_applied)).max(0.0);
        if out.violation <= OVERRIDE_TOLERANCE {
            out.violation = 0.0;
        }
    } else {
        out.violation = (-drift_term).max(0.0);
    }
    out
}
