//! Well-posedness classification of the preference parameters.
//!
//! The decision tree follows the necessary and sufficient conditions for the
//! piecewise-power objective: any of `alpha >= beta`, `beta < delta`,
//! `alpha > gamma` certifies an unbounded supremum with an explicit witness
//! construction; `alpha < beta` with `alpha < gamma` and `beta > delta` is
//! well-posed; the equality cases `alpha = gamma` and `beta = delta` (with
//! `alpha < beta`) are genuinely open and reported as a distinct Boundary
//! verdict, never folded into either side.
//!
//! All comparisons are direct IEEE comparisons of the raw parameters, never
//! of formed ratios: `alpha / gamma > 1` is decided as `alpha > gamma`, so
//! no division rounding can blur a boundary.

use serde::{Deserialize, Serialize};

use crate::prefs::{CptSpec, DistortionForm};

/// Overall verdict on problem well-posedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    WellPosed,
    IllPosed,
    Boundary,
}

/// The condition that produced the verdict. Ill-posed causes name the
/// witness construction that certifies them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cause {
    /// alpha >= beta: two-indicator sequence with linearly growing stakes.
    AlphaGeBeta,
    /// beta/delta < 1: truncated heavy-tailed gain against an infinite-mean loss.
    BetaDeltaBelowOne,
    /// alpha/gamma > 1: truncated heavy-tailed gain against a flat loss.
    AlphaGammaAboveOne,
    /// alpha < beta and alpha/gamma < 1 < beta/delta.
    SufficientHolds,
    /// alpha = gamma with alpha < beta: open case.
    AlphaEqGamma,
    /// beta = delta with alpha < beta: open case.
    BetaEqDelta,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::WellPosed => "WellPosed",
            Verdict::IllPosed => "IllPosed",
            Verdict::Boundary => "Boundary",
        };
        f.write_str(s)
    }
}

impl std::fmt::Display for Cause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Cause::AlphaGeBeta => "AlphaGeBeta",
            Cause::BetaDeltaBelowOne => "BetaDeltaBelowOne",
            Cause::AlphaGammaAboveOne => "AlphaGammaAboveOne",
            Cause::SufficientHolds => "SufficientHolds",
            Cause::AlphaEqGamma => "AlphaEqGamma",
            Cause::BetaEqDelta => "BetaEqDelta",
        };
        f.write_str(s)
    }
}

/// Classification result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub verdict: Verdict,
    pub cause: Cause,
    /// Set for Tversky-Kahneman-form parameters: the classification applies
    /// the same exponent inequalities, which are proved for pure powers.
    pub tk_caveat: bool,
}

/// Classifies the optimization problem from the preference quadruple.
pub fn classify(spec: &CptSpec) -> RegimeVerdict {
    let (a, b, g, d) = (spec.alpha(), spec.beta(), spec.gamma(), spec.delta());
    let tk_caveat = spec.form() == DistortionForm::TverskyKahneman;
    let mk = |verdict, cause| RegimeVerdict { verdict, cause, tk_caveat };

    if a >= b {
        return mk(Verdict::IllPosed, Cause::AlphaGeBeta);
    }
    if b < d {
        return mk(Verdict::IllPosed, Cause::BetaDeltaBelowOne);
    }
    if a > g {
        return mk(Verdict::IllPosed, Cause::AlphaGammaAboveOne);
    }
    // here a < b, b >= d, a <= g
    if a < g && b > d {
        return mk(Verdict::WellPosed, Cause::SufficientHolds);
    }
    if a == g {
        mk(Verdict::Boundary, Cause::AlphaEqGamma)
    } else {
        mk(Verdict::Boundary, Cause::BetaEqDelta)
    }
}

/// One row of a classifier grid sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub verdict: Verdict,
    pub cause: Cause,
}

/// Exhaustive sweep of (alpha, beta, gamma, delta) over multiples of `step`
/// in (0, 1]. The step must divide 1 into at most 64 levels.
pub fn classify_grid(step: f64) -> Result<Vec<GridPoint>, String> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(format!("step must lie in (0, 1], got {step}"));
    }
    let levels = (1.0 / step).round() as usize;
    if levels == 0 || levels > 64 || (levels as f64 * step - 1.0).abs() > 1e-9 {
        return Err(format!("step {step} does not evenly divide 1 into <= 64 levels"));
    }
    let vals: Vec<f64> = (1..=levels).map(|i| i as f64 / levels as f64).collect();
    let mut out = Vec::with_capacity(levels.pow(4));
    for &alpha in &vals {
        for &beta in &vals {
            for &gamma in &vals {
                for &delta in &vals {
                    let spec = CptSpec::power(alpha, beta, gamma, delta)
                        .expect("grid values are valid exponents");
                    let v = classify(&spec);
                    out.push(GridPoint {
                        alpha,
                        beta,
                        gamma,
                        delta,
                        verdict: v.verdict,
                        cause: v.cause,
                    });
                }
            }
        }
    }
    Ok(out)
}
