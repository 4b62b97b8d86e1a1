//! Choquet integration of payoff laws against distorted tail probabilities.
//!
//! Discrete laws are integrated exactly by the telescoping sum over sorted
//! atoms. Quantile grids are integrated by adaptive quadrature over the
//! piecewise-linear body plus an analytic treatment of the fitted power tail;
//! a tail whose integrand decays no faster than 1/y certifies a genuinely
//! infinite integral and is reported as such, never as a large number.

use thiserror::Error;

use crate::law::{Law, LawError, Measure, QuantileLaw};
use crate::math::adaptive_simpson;
use crate::prefs::{CptSpec, DistortionForm, PrefsError, SidePrefs};
use crate::value::ExtendedValue;

/// Numerical knobs of the engine. The defaults are the contract; overrides
/// exist for experimentation, not calibration.
#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    /// Absolute quadrature target for the body of a quantile grid.
    pub body_abs_tol: f64,
    /// Relative tolerance for the fitted tail against the grid at the junction.
    pub tail_consistency_tol: f64,
    /// Computed totals above this report DivergenceSuspected when the tail
    /// fit says the integral converges.
    pub divergence_cutoff: f64,
    /// Absolute tolerance on E[X ∧ a] = b for the truncation root.
    pub root_abs_tol: f64,
    /// Iteration cap for bracketing and bisection.
    pub max_root_iters: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            body_abs_tol: 1e-9,
            tail_consistency_tol: 0.05,
            divergence_cutoff: 1e12,
            root_abs_tol: 1e-10,
            max_root_iters: 200,
        }
    }
}

#[derive(Debug, Error)]
pub enum ChoquetError {
    #[error("law must be nonnegative for this operation")]
    NegativeSupport,
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Prefs(#[from] PrefsError),
    #[error("tail fit claims survival {fitted} at the grid junction but the grid leaves {remaining}")]
    InconsistentTail { fitted: f64, remaining: f64 },
    #[error("CPT value undefined: loss-side Choquet integral is not finite ({loss_side})")]
    UndefinedFunctional { loss_side: ExtendedValue },
    #[error("E[X ∧ a] can reach at most {mean}, below the target {target}")]
    InfeasibleTruncation { mean: f64, target: f64 },
    #[error("truncation root did not converge; the law's tail and body may be inconsistent")]
    RootNotConverged,
    #[error("target level must be nonnegative, got {0}")]
    NegativeTarget(f64),
}

/// Gains-side Choquet integral of a nonnegative law under the physical measure.
pub fn choquet_plus(law: &Law, spec: &CptSpec) -> Result<ExtendedValue, ChoquetError> {
    choquet_plus_with(law, spec, &EngineConfig::default())
}

pub fn choquet_plus_with(
    law: &Law,
    spec: &CptSpec,
    cfg: &EngineConfig,
) -> Result<ExtendedValue, ChoquetError> {
    choquet_integral(law, &spec.gain_side(), cfg)
}

/// Loss-side Choquet integral of a nonnegative law (of the loss magnitude).
pub fn choquet_minus(law: &Law, spec: &CptSpec) -> Result<ExtendedValue, ChoquetError> {
    choquet_minus_with(law, spec, &EngineConfig::default())
}

pub fn choquet_minus_with(
    law: &Law,
    spec: &CptSpec,
    cfg: &EngineConfig,
) -> Result<ExtendedValue, ChoquetError> {
    choquet_integral(law, &spec.loss_side(), cfg)
}

/// CPT value of a signed law: V+(X+) - V-(X-), defined only when the loss
/// side is finite.
pub fn cpt_value(law: &Law, spec: &CptSpec) -> Result<ExtendedValue, ChoquetError> {
    cpt_value_with(law, spec, &EngineConfig::default())
}

pub fn cpt_value_with(
    law: &Law,
    spec: &CptSpec,
    cfg: &EngineConfig,
) -> Result<ExtendedValue, ChoquetError> {
    let (pos, neg) = law.split_parts()?;
    let v_minus = choquet_integral(&neg, &spec.loss_side(), cfg)?;
    let vm = match v_minus {
        ExtendedValue::Finite { value } => value,
        other => return Err(ChoquetError::UndefinedFunctional { loss_side: other }),
    };
    Ok(match choquet_integral(&pos, &spec.gain_side(), cfg)? {
        ExtendedValue::Finite { value } => ExtendedValue::finite(value - vm),
        inf @ ExtendedValue::PosInfinite { .. } => inf,
        ExtendedValue::DivergenceSuspected { lower_bound, tail_exponent } => {
            ExtendedValue::DivergenceSuspected { lower_bound: lower_bound - vm, tail_exponent }
        }
    })
}

/// Generic survival-power integral `∫ w(P{u(X) > y}) dy` for one preference
/// side; exponents are not restricted to (0, 1], which the inequality audits
/// rely on.
pub fn choquet_integral(
    law: &Law,
    side: &SidePrefs,
    cfg: &EngineConfig,
) -> Result<ExtendedValue, ChoquetError> {
    if !law.is_nonnegative() {
        return Err(ChoquetError::NegativeSupport);
    }
    match law {
        Law::DiscreteAtoms(atoms) => {
            // telescoping sum over sorted atoms
            let n = atoms.atoms().len();
            let mut survival = vec![0.0f64; n + 1];
            for i in (0..n).rev() {
                survival[i] = survival[i + 1] + atoms.atoms()[i].prob_p;
            }
            let mut total = 0.0;
            let mut prev_u = 0.0;
            for (i, a) in atoms.atoms().iter().enumerate() {
                let u = side.utility(a.value)?;
                total += (u - prev_u) * side.distortion_unchecked(survival[i].min(1.0));
                prev_u = u;
            }
            Ok(ExtendedValue::finite(total))
        }
        Law::QuantileGrid(q) => {
            if q.measure() != Measure::P {
                return Err(LawError::MeasureMismatch {
                    law: q.measure(),
                    requested: Measure::P,
                }
                .into());
            }
            quantile_choquet(q, side, cfg)
        }
    }
}

fn quantile_choquet(
    q: &QuantileLaw,
    side: &SidePrefs,
    cfg: &EngineConfig,
) -> Result<ExtendedValue, ChoquetError> {
    let (s_last, x_last) = q.last();
    let remaining = 1.0 - s_last;

    // certified divergence comes before any numerics
    let mut tail_exponent_y = None;
    if let Some(t) = q.right_tail() {
        let e = t.exponent * side.distortion_exponent / side.utility_exponent;
        tail_exponent_y = Some(e);
        if e <= 1.0 {
            return Ok(ExtendedValue::PosInfinite { tail_exponent: e });
        }
        // junction check: the fit may exceed the remaining mass (clamped),
        // but must not undershoot it
        if x_last > 0.0 && remaining > 0.0 {
            let fitted = t.survival(x_last);
            if fitted < remaining * (1.0 - cfg.tail_consistency_tol) {
                return Err(ChoquetError::InconsistentTail { fitted, remaining });
            }
        }
    }

    let segments: Vec<(f64, f64, f64, f64)> = q.body_segments().collect();
    let pieces = segments.len() + 2;
    let seg_tol = cfg.body_abs_tol / pieces as f64;

    let (_, x_first) = q.first();
    let mut total = side.utility(x_first)?; // survival is 1 below the first value

    for &(z0, z1, s0, s1) in &segments {
        total += body_segment_integral(side, z0, z1, s0, s1, seg_tol)?;
    }

    if let Some(t) = q.right_tail() {
        let z_star = q.right_tail_start().expect("tail present");
        if z_star > x_last {
            // clamp region: constant survival up to the crossover
            let w = side.distortion_unchecked(remaining.min(1.0));
            total += w * (side.utility(z_star)? - side.utility(x_last)?);
        }
        total += power_tail_choquet(side, t.coef, t.exponent, z_star, seg_tol);
    }

    // a bounded law can be huge but not divergent; suspicion needs a tail
    if let Some(e) = tail_exponent_y {
        if total > cfg.divergence_cutoff {
            return Ok(ExtendedValue::DivergenceSuspected { lower_bound: total, tail_exponent: e });
        }
    }
    Ok(ExtendedValue::finite(total))
}

/// Integral of w(S(z)) u'(z) over a body segment with S linear from s0 to s1.
fn body_segment_integral(
    side: &SidePrefs,
    z0: f64,
    z1: f64,
    s0: f64,
    s1: f64,
    tol: f64,
) -> Result<f64, ChoquetError> {
    if z1 <= z0 {
        return Ok(0.0);
    }
    if s0 == s1 {
        // constant survival across a support gap
        let w = side.distortion_unchecked(s0.clamp(0.0, 1.0));
        return Ok(w * (side.utility(z1)? - side.utility(z0)?));
    }
    let surv = |z: f64| s0 + (s1 - s0) * (z - z0) / (z1 - z0);
    let c = side.utility_scale;
    let e = side.utility_exponent;
    if z0 == 0.0 && e < 1.0 {
        // u'(z) is singular at zero; integrate in y = u(z) instead
        let y1 = side.utility(z1)?;
        let f = |y: f64| {
            let z = (y / c).powf(1.0 / e);
            side.distortion_unchecked(surv(z).clamp(0.0, 1.0))
        };
        Ok(adaptive_simpson(f, 0.0, y1, tol))
    } else {
        let f = |z: f64| {
            side.distortion_unchecked(surv(z).clamp(0.0, 1.0)) * c * e * z.powf(e - 1.0)
        };
        Ok(adaptive_simpson(f, z0, z1, tol))
    }
}

/// Integral of w(coef z^-k) u'(z) from z_star to infinity, assuming the
/// convergence condition k * e_w > e_u holds. Exact for the pure power form;
/// for the ratio form the substitution m = z^-(k e_w - e_u) turns the
/// integrand into a bounded one on (0, z_star^-(k e_w - e_u)].
fn power_tail_choquet(side: &SidePrefs, coef: f64, k: f64, z_star: f64, tol: f64) -> f64 {
    let e_u = side.utility_exponent;
    let e_w = side.distortion_exponent;
    let c_u = side.utility_scale;
    let eh = k * e_w - e_u;
    debug_assert!(eh > 0.0);
    match side.form {
        DistortionForm::PurePower => {
            c_u * e_u * coef.powf(e_w) * z_star.powf(-eh) / eh
        }
        DistortionForm::TverskyKahneman => {
            // w_tk(p) = p^e_w * h(p) with h(p) = (p^e_w + (1-p)^e_w)^(-1/e_w)
            let h = |p: f64| {
                let lp = e_w * p.ln();
                let lq = e_w * (-p).ln_1p();
                (-crate::math::log_sum_exp(lp, lq) / e_w).exp()
            };
            let m_hi = z_star.powf(-eh);
            let scale = c_u * e_u / eh * coef.powf(e_w);
            let f = |m: f64| {
                if m <= 0.0 {
                    return 1.0;
                }
                let p = (coef * m.powf(k / eh)).min(1.0);
                if p >= 1.0 {
                    // deep clamp; survival cannot exceed 1
                    h(1.0 - f64::EPSILON)
                } else {
                    h(p)
                }
            };
            scale * adaptive_simpson(f, 0.0, m_hi, tol / scale.max(1.0)) // normalized tolerance
        }
    }
}

/// Smallest a with E[X ∧ a] = b under `measure`, by bracketing bisection on
/// the continuous non-decreasing map a ↦ E[X ∧ a].
pub fn truncation_level(law: &Law, measure: Measure, b: f64) -> Result<f64, ChoquetError> {
    truncation_level_with(law, measure, b, &EngineConfig::default())
}

pub fn truncation_level_with(
    law: &Law,
    measure: Measure,
    b: f64,
    cfg: &EngineConfig,
) -> Result<f64, ChoquetError> {
    if !law.is_nonnegative() {
        return Err(ChoquetError::NegativeSupport);
    }
    if b < 0.0 {
        return Err(ChoquetError::NegativeTarget(b));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let mean = law.mean_nonnegative(measure)?;
    if mean < b {
        return Err(ChoquetError::InfeasibleTruncation { mean, target: b });
    }
    let f = |a: f64| law.truncated_mean(measure, a);

    // bracket: f(b) <= b always, so [0, hi] with f(hi) >= b
    let mut hi = b;
    let mut iters = 0;
    while f(hi)? < b {
        hi *= 2.0;
        iters += 1;
        if iters > cfg.max_root_iters {
            return Err(ChoquetError::RootNotConverged);
        }
    }
    let mut lo = 0.0f64;
    // f is 1-Lipschitz, so a bracket of width root_abs_tol certifies the
    // residual; converging to the lower edge picks the smallest root
    for _ in 0..cfg.max_root_iters {
        if hi - lo <= cfg.root_abs_tol * 0.5 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= b {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (f(hi)? - b).abs() > cfg.root_abs_tol {
        return Err(ChoquetError::RootNotConverged);
    }
    Ok(hi)
}
