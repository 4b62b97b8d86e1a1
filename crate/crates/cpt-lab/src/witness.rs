//! Explicit feasible payoff sequences whose CPT value diverges, one per
//! ill-posed regime.
//!
//! All three constructions are payoffs of the martingale-uniform coordinate
//! U, so physical weights of U-cells come from the kernel's closed-form
//! change of measure. Budgets are enforced analytically; the engine sees a
//! conditional-mean discretization on a geometric U-grid refined towards the
//! singular endpoints, where the divergence lives.
//!
//! Free constants of the constructions are fixed at the midpoints of their
//! admissible open intervals, which keeps every run deterministic and stays
//! clear of the endpoint degeneracies.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::choquet::{cpt_value_with, truncation_level_with, ChoquetError, EngineConfig};
use crate::law::{Law, LawError, Measure, PowerTail, QuantileLaw};
use crate::market::{KernelModel, MarketError};
use crate::math::ls_slope;
use crate::prefs::{CptSpec, DistortionForm, PrefsError};
use crate::regime::Cause;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("parameters are not in the {expected} regime: alpha={alpha}, beta={beta}, gamma={gamma}, delta={delta}")]
    RegimeMismatch { expected: Cause, alpha: f64, beta: f64, gamma: f64, delta: f64 },
    #[error("this construction requires initial capital zero, got x0 = {0}")]
    NonzeroBudget(f64),
    #[error("no indicator pair with positive asymptotic margin exists for alpha = beta here: {0}")]
    RebalanceInfeasible(String),
    #[error("cause {0} names no witness construction")]
    NotIllPosedCause(Cause),
    #[error(transparent)]
    Engine(#[from] ChoquetError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Prefs(#[from] PrefsError),
}

/// Per-index record of a witness sequence.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessPoint {
    pub index: u64,
    /// Value from the construction's closed form, where one exists.
    pub closed_form: Option<f64>,
    /// Engine value of the discretized law.
    pub numeric: f64,
    /// |E_Q[X_n] - x0| from the analytic budget expressions.
    pub budget_residual: f64,
    /// Loss truncation level a_n (second construction only).
    pub truncation_level: Option<f64>,
}

/// A diverging feasible sequence with its evidence.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub cause: Cause,
    pub x0: f64,
    pub kernel_variance: f64,
    pub points: Vec<WitnessPoint>,
}

impl WitnessReport {
    pub fn indices(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.index).collect()
    }

    pub fn numeric_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.numeric).collect()
    }

    pub fn max_budget_residual(&self) -> f64 {
        self.points.iter().map(|p| p.budget_residual).fold(0.0, f64::max)
    }

    /// Least-squares slope of ln V(X_n) against ln n over the top quarter of
    /// the index ladder (positive values only), where the loss-side term of
    /// the constructions has decayed and the power asymptote dominates.
    pub fn loglog_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.numeric > 0.0 && p.index > 0)
            .map(|p| ((p.index as f64).ln(), p.numeric.ln()))
            .collect();
        if pts.len() < 4 {
            return None;
        }
        let upper = &pts[pts.len() - (pts.len() / 4).max(4)..];
        let xs: Vec<f64> = upper.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = upper.iter().map(|p| p.1).collect();
        Some(ls_slope(&xs, &ys))
    }
}

/// Index list for witness sweeps: dense start, then geometric up to n_max.
pub fn default_indices(n_max: u64) -> Vec<u64> {
    let n_max = n_max.max(1);
    if n_max <= 128 {
        return (1..=n_max).collect();
    }
    let mut out: Vec<u64> = (1..=16).collect();
    let steps = 24;
    for i in 0..=steps {
        let x = (n_max as f64).powf(i as f64 / steps as f64).round() as u64;
        out.push(x.clamp(1, n_max));
    }
    out.push(n_max);
    out.sort_unstable();
    out.dedup();
    out
}

/// Dispatches an ill-posed cause to its construction.
pub fn witness(
    cause: Cause,
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
    n_list: &[u64],
) -> Result<WitnessReport, WitnessError> {
    match cause {
        Cause::AlphaGeBeta => witness_alpha_ge_beta(spec, model, x0, n_list),
        Cause::BetaDeltaBelowOne => {
            if x0 != 0.0 {
                return Err(WitnessError::NonzeroBudget(x0));
            }
            witness_beta_delta(spec, model, n_list)
        }
        Cause::AlphaGammaAboveOne => {
            if x0 != 0.0 {
                return Err(WitnessError::NonzeroBudget(x0));
            }
            witness_alpha_gamma(spec, model, n_list)
        }
        other => Err(WitnessError::NotIllPosedCause(other)),
    }
}

fn regime_mismatch(expected: Cause, spec: &CptSpec) -> WitnessError {
    WitnessError::RegimeMismatch {
        expected,
        alpha: spec.alpha(),
        beta: spec.beta(),
        gamma: spec.gamma(),
        delta: spec.delta(),
    }
}

// ---------------------------------------------------------------------------
// construction 1: alpha >= beta
// ---------------------------------------------------------------------------

/// The indicator set A on the U-axis: an upper or lower interval.
#[derive(Debug, Clone, Copy)]
struct IndicatorSet {
    /// Gains sit on {U >= cut} when true, on {U < cut} when false.
    upper: bool,
    cut: f64,
}

impl IndicatorSet {
    fn q_mass(&self) -> f64 {
        if self.upper {
            1.0 - self.cut
        } else {
            self.cut
        }
    }

    fn p_mass(&self, model: &KernelModel) -> f64 {
        if self.upper {
            1.0 - model.p_cdf_of_u(self.cut)
        } else {
            model.p_cdf_of_u(self.cut)
        }
    }
}

/// Asymptotic margin of the two-indicator sequence on the set A: positive
/// means the gain term outgrows the budget-matched loss term.
fn indicator_margin(spec: &CptSpec, model: &KernelModel, set: IndicatorSet) -> f64 {
    let qa = set.q_mass();
    let qc = 1.0 - qa;
    let pa = set.p_mass(model);
    let pc = 1.0 - pa;
    let gain = spec.c_plus() * spec.gain_side().distortion_unchecked(pa);
    let loss =
        spec.c_minus() * (qa / qc).powf(spec.beta()) * spec.loss_side().distortion_unchecked(pc);
    gain - loss
}

fn choose_indicator_set(
    spec: &CptSpec,
    model: &KernelModel,
) -> Result<IndicatorSet, WitnessError> {
    if spec.alpha() > spec.beta() {
        // strict case: the canonical upper half suffices, the gain exponent wins
        return Ok(IndicatorSet { upper: true, cut: 0.5 });
    }
    // alpha = beta: scan upper and lower intervals for a positive margin
    let mut cuts = vec![0.5];
    for j in 1..64 {
        cuts.push(j as f64 / 64.0);
    }
    for j in 2..30 {
        let e = 2f64.powi(-j);
        cuts.push(e);
        cuts.push(1.0 - e);
    }
    let mut best: Option<(f64, IndicatorSet)> = None;
    for upper in [true, false] {
        for &cut in &cuts {
            let set = IndicatorSet { upper, cut };
            let m = indicator_margin(spec, model, set);
            if best.is_none_or(|(bm, _)| m > bm) {
                best = Some((m, set));
            }
        }
    }
    let (margin, set) = best.expect("cut grid is nonempty");
    if margin <= 1e-12 {
        return Err(WitnessError::RebalanceInfeasible(format!(
            "best margin {margin:.3e} (upper={}, cut={}) with kernel variance {}",
            set.upper,
            set.cut,
            model.total_variance()
        )));
    }
    Ok(set)
}

/// Two-indicator sequence X_n = m 1_A - z_m 1_{A^c} with m = n0 + n and the
/// loss coefficient matched to the budget. The value has the exact closed
/// form u+(m) w+(P(A)) - u-(z_m) w-(P(A^c)) for both preference forms.
pub fn witness_alpha_ge_beta(
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
    n_list: &[u64],
) -> Result<WitnessReport, WitnessError> {
    if spec.alpha() < spec.beta() {
        return Err(regime_mismatch(Cause::AlphaGeBeta, spec));
    }
    let set = choose_indicator_set(spec, model)?;
    let qa = set.q_mass();
    let qc = 1.0 - qa;
    let pa = set.p_mass(model);
    let pc = 1.0 - pa;
    // least integer m with m q(A) >= x0, so the loss coefficient stays >= 0;
    // for q(A) = 1/2 this is the least integer above 2 x0
    let n0 = (x0 / qa).ceil().max(0.0) as u64;

    let cfg = EngineConfig::default();
    let points: Result<Vec<WitnessPoint>, WitnessError> = n_list
        .par_iter()
        .map(|&n| {
            let m = (n0 + n) as f64;
            let z = (m * qa - x0) / qc;
            let closed = spec.c_plus() * m.powf(spec.alpha())
                * spec.gain_side().distortion_unchecked(pa)
                - spec.c_minus() * z.powf(spec.beta())
                    * spec.loss_side().distortion_unchecked(pc);
            let cells = if set.upper {
                [(0.0, set.cut, -z), (set.cut, 1.0, m)]
            } else {
                [(0.0, set.cut, m), (set.cut, 1.0, -z)]
            };
            let law = model.atoms_from_u_cells(&cells)?;
            let numeric = cpt_value_with(&law, spec, &cfg)?.value_or_bound();
            let budget_residual = (m * qa - z * qc - x0).abs();
            Ok(WitnessPoint {
                index: n,
                closed_form: Some(closed),
                numeric,
                budget_residual,
                truncation_level: None,
            })
        })
        .collect();
    Ok(WitnessReport {
        cause: Cause::AlphaGeBeta,
        x0,
        kernel_variance: model.total_variance(),
        points: points?,
    })
}

// ---------------------------------------------------------------------------
// shared analytic pieces for the heavy-tailed constructions
// ---------------------------------------------------------------------------

/// Integral of u^(-1/xi) over [lo, hi].
fn int_inv_power(xi: f64, lo: f64, hi: f64) -> f64 {
    let e = 1.0 - 1.0 / xi;
    if e.abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(e) - lo.powf(e)) / e
    }
}

/// E_Q[min(U^(-1/xi), n) 1{U < 1/2}] by piecewise integration.
fn gain_truncated_mean(xi: f64, n: f64) -> f64 {
    let u_flat = n.powf(-xi).min(0.5);
    let mut b = n * u_flat;
    if u_flat < 0.5 {
        b += int_inv_power(xi, u_flat, 0.5);
    }
    b
}

fn geometric_grid(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo);
    let mut g = Vec::with_capacity(cells + 1);
    g.push(lo);
    let log_ratio = (hi / lo).ln();
    for i in 1..cells {
        g.push(lo * (log_ratio * i as f64 / cells as f64).exp());
    }
    g.push(hi);
    g.dedup();
    g
}

/// Cells per geometric side of a discretized construction.
const SIDE_CELLS: usize = 4000;

/// U-cells of the truncated gain min(U^(-1/xi), n) on (0, 1/2), carrying the
/// conditional Q-mean of each cell so the discrete budget is exact.
fn gain_cells(xi: f64, n: f64) -> Vec<(f64, f64, f64)> {
    let u_flat = n.powf(-xi).min(0.5);
    let mut cells = Vec::new();
    if u_flat > 0.0 {
        cells.push((0.0, u_flat, n));
    }
    if u_flat < 0.5 {
        let grid = geometric_grid(u_flat, 0.5, SIDE_CELLS);
        for w in grid.windows(2) {
            let mean = int_inv_power(xi, w[0], w[1]) / (w[1] - w[0]);
            cells.push((w[0], w[1], mean.min(n)));
        }
    }
    cells
}

/// U-cells of the truncated loss -min((1-U)^(-1/chi), a) on [1/2, 1).
fn loss_cells_truncated(chi: f64, a: f64) -> Vec<(f64, f64, f64)> {
    // in w = 1 - u the loss magnitude is w^(-1/chi), capped at a for w <= w_flat
    let w_flat = a.powf(-chi).min(0.5);
    let mut cells = Vec::new();
    if w_flat < 0.5 {
        let grid = geometric_grid(w_flat, 0.5, SIDE_CELLS);
        // traverse from w = 1/2 down so u runs upward
        for w in grid.windows(2).rev() {
            let mean = int_inv_power(chi, w[0], w[1]) / (w[1] - w[0]);
            cells.push((1.0 - w[1], 1.0 - w[0], -mean.min(a)));
        }
    }
    cells.push((1.0 - w_flat, 1.0, -a));
    cells
}

/// The exact Q-law of the untruncated loss (1-U)^(-1/chi) 1{U >= 1/2}: an
/// atom of mass 1/2 at zero and survival z^(-chi) beyond 2^(1/chi).
fn loss_q_law(chi: f64) -> Result<Law, LawError> {
    Ok(Law::QuantileGrid(QuantileLaw::new(
        Measure::Q,
        vec![(0.0, 0.0), (0.5, 0.0)],
        None,
        Some(PowerTail { coef: 1.0, exponent: chi }),
    )?))
}

/// Closed-form gains-side value of the truncated payoff under the physical
/// measure when it coincides with Q (degenerate kernel) and the preferences
/// are pure powers: alpha * int min(t^-xi, 1/2)^gamma t^(alpha-1) dt on [0, n].
fn closed_gain_value_degenerate(alpha: f64, gamma: f64, xi: f64, n: f64) -> f64 {
    let t1 = 2f64.powf(1.0 / xi).min(n);
    let mut v = 0.5f64.powf(gamma) * t1.powf(alpha);
    if n > t1 {
        let e = alpha - xi * gamma;
        v += if e.abs() < 1e-12 {
            alpha * (n / t1).ln()
        } else {
            alpha * (n.powf(e) - t1.powf(e)) / e
        };
    }
    v
}

/// Same for the truncated loss side: beta * int min(t^-chi, 1/2)^delta
/// t^(beta-1) dt on [0, a].
fn closed_loss_value_degenerate(beta: f64, delta: f64, chi: f64, a: f64) -> f64 {
    let t2 = 2f64.powf(1.0 / chi).min(a);
    let mut v = 0.5f64.powf(delta) * t2.powf(beta);
    if a > t2 {
        let e = beta - chi * delta;
        v += if e.abs() < 1e-12 {
            beta * (a / t2).ln()
        } else {
            beta * (a.powf(e) - t2.powf(e)) / e
        };
    }
    v
}

fn degenerate_power_closed_forms(spec: &CptSpec, model: &KernelModel) -> bool {
    model.is_degenerate() && spec.form() == DistortionForm::PurePower
}

// ---------------------------------------------------------------------------
// construction 2: beta/delta < 1
// ---------------------------------------------------------------------------

/// One payoff cell on the U-axis: (u_lo, u_hi, value).
pub type UCell = (f64, f64, f64);

/// The discretized second-construction payoff at one index: its U-cells and
/// the truncation level a_n. The cells are kernel-independent (weights are
/// attached later through the kernel's change of measure); the payoff can be
/// re-audited or embedded on an optimizer grid.
pub fn beta_delta_payoff_cells(
    spec: &CptSpec,
    n: u64,
) -> Result<(Vec<UCell>, f64), WitnessError> {
    let (alpha, beta, gamma, delta) =
        (spec.alpha(), spec.beta(), spec.gamma(), spec.delta());
    if beta >= delta {
        return Err(regime_mismatch(Cause::BetaDeltaBelowOne, spec));
    }
    let chi = 0.5 * (beta / delta + 1.0);
    let xi = 0.5 * alpha / gamma;
    // certificates of the construction, all by choice of the midpoints:
    // E_Q[Z] = +inf, loss side finite, untruncated gain side infinite
    assert!(chi < 1.0 && chi * delta > beta && xi * gamma < alpha);
    let z_law = loss_q_law(chi)?;
    let b_n = gain_truncated_mean(xi, n as f64);
    let a_n = truncation_level_with(&z_law, Measure::Q, b_n, &EngineConfig::default())?;
    let mut cells = gain_cells(xi, n as f64);
    cells.extend(loss_cells_truncated(chi, a_n));
    Ok((cells, a_n))
}

/// Truncated heavy gain against a truncated infinite-mean loss, budget zero.
///
/// chi sits at the midpoint of (beta/delta, 1), xi at the midpoint of
/// (0, alpha/gamma). The untruncated loss has E_Q = +inf (tail exponent
/// chi < 1) yet finite loss-side value (chi delta > beta), so the truncation
/// level a_n solving E_Q[Z ∧ a_n] = E_Q[Y_n] exists for every n.
pub fn witness_beta_delta(
    spec: &CptSpec,
    model: &KernelModel,
    n_list: &[u64],
) -> Result<WitnessReport, WitnessError> {
    let (alpha, beta, gamma, delta) =
        (spec.alpha(), spec.beta(), spec.gamma(), spec.delta());
    if beta >= delta {
        return Err(regime_mismatch(Cause::BetaDeltaBelowOne, spec));
    }
    let chi = 0.5 * (beta / delta + 1.0);
    let xi = 0.5 * alpha / gamma;
    let z_law = loss_q_law(chi)?;
    let cfg = EngineConfig::default();
    let closed_ok = degenerate_power_closed_forms(spec, model);

    let points: Result<Vec<WitnessPoint>, WitnessError> = n_list
        .par_iter()
        .map(|&n| {
            let (cells, a_n) = beta_delta_payoff_cells(spec, n)?;
            let b_n = gain_truncated_mean(xi, n as f64);
            let law = model.atoms_from_u_cells(&cells)?;
            let numeric = cpt_value_with(&law, spec, &cfg)?.value_or_bound();
            let budget_residual =
                (b_n - z_law.truncated_mean(Measure::Q, a_n)?).abs();
            let closed = closed_ok.then(|| {
                closed_gain_value_degenerate(alpha, gamma, xi, n as f64)
                    - closed_loss_value_degenerate(beta, delta, chi, a_n)
            });
            Ok(WitnessPoint {
                index: n,
                closed_form: closed,
                numeric,
                budget_residual,
                truncation_level: Some(a_n),
            })
        })
        .collect();
    Ok(WitnessReport {
        cause: Cause::BetaDeltaBelowOne,
        x0: 0.0,
        kernel_variance: model.total_variance(),
        points: points?,
    })
}

// ---------------------------------------------------------------------------
// construction 3: alpha/gamma > 1
// ---------------------------------------------------------------------------

/// Truncated heavy gain against a flat loss of twice the gain's Q-mean,
/// budget zero. xi sits at the midpoint of (1, alpha/gamma), so the
/// untruncated gain has finite Q-mean but infinite gains-side value.
pub fn witness_alpha_gamma(
    spec: &CptSpec,
    model: &KernelModel,
    n_list: &[u64],
) -> Result<WitnessReport, WitnessError> {
    let (alpha, beta, gamma) = (spec.alpha(), spec.beta(), spec.gamma());
    if alpha <= gamma {
        return Err(regime_mismatch(Cause::AlphaGammaAboveOne, spec));
    }
    let xi = 0.5 * (1.0 + alpha / gamma);
    assert!(xi > 1.0 && xi * gamma < alpha);

    let p_loss = 1.0 - model.p_cdf_of_u(0.5);
    let cfg = EngineConfig::default();
    let closed_ok = degenerate_power_closed_forms(spec, model);

    let points: Result<Vec<WitnessPoint>, WitnessError> = n_list
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let c_n = gain_truncated_mean(xi, nf);
            let mut cells = gain_cells(xi, nf);
            cells.push((0.5, 1.0, -2.0 * c_n));
            let law = model.atoms_from_u_cells(&cells)?;
            let numeric = cpt_value_with(&law, spec, &cfg)?.value_or_bound();
            // E_Q[X_n] = c_n - 2 c_n * Q{U >= 1/2} = 0 identically
            let budget_residual = (c_n - 2.0 * c_n * 0.5).abs();
            let closed = closed_ok.then(|| {
                closed_gain_value_degenerate(alpha, gamma, xi, nf)
                    - spec.c_minus()
                        * (2.0 * c_n).powf(beta)
                        * spec.loss_side().distortion_unchecked(p_loss)
            });
            Ok(WitnessPoint {
                index: n,
                closed_form: closed,
                numeric,
                budget_residual,
                truncation_level: None,
            })
        })
        .collect();
    Ok(WitnessReport {
        cause: Cause::AlphaGammaAboveOne,
        x0: 0.0,
        kernel_variance: model.total_variance(),
        points: points?,
    })
}

/// Loss-side closed form of the third construction, exact for any kernel:
/// u-(2 C_n) w-(P{U >= 1/2}).
pub fn flat_loss_closed_form(spec: &CptSpec, model: &KernelModel, n: u64) -> f64 {
    let xi = 0.5 * (1.0 + spec.alpha() / spec.gamma());
    let c_n = gain_truncated_mean(xi, n as f64);
    let p_loss = 1.0 - model.p_cdf_of_u(0.5);
    spec.c_minus()
        * (2.0 * c_n).powf(spec.beta())
        * spec.loss_side().distortion_unchecked(p_loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choquet::choquet_minus;

    fn power(a: f64, b: f64, g: f64, d: f64) -> CptSpec {
        CptSpec::power(a, b, g, d).unwrap()
    }

    #[test]
    fn construction1_degenerate_closed_form() {
        // x0 = 0, rho = 1, alpha=0.9, beta=0.5, gamma=delta=1, n=100
        let spec = power(0.9, 0.5, 1.0, 1.0);
        let model = KernelModel::from_variance(0.0).unwrap();
        let rep = witness_alpha_ge_beta(&spec, &model, 0.0, &[100]).unwrap();
        let p = &rep.points[0];
        assert!((p.closed_form.unwrap() - 26.54786722400966).abs() < 1e-10);
        assert!((p.numeric - p.closed_form.unwrap()).abs() < 1e-10);
        assert!(p.budget_residual < 1e-12);
    }

    #[test]
    fn construction1_budget_holds_for_nonzero_x0_and_variance() {
        let spec = power(0.9, 0.5, 0.8, 0.9);
        let model = KernelModel::from_variance(0.16).unwrap();
        let rep = witness_alpha_ge_beta(&spec, &model, 0.7, &[1, 2, 5, 10, 100]).unwrap();
        assert!(rep.max_budget_residual() < 1e-10, "{}", rep.max_budget_residual());
        for p in &rep.points {
            let c = p.closed_form.unwrap();
            assert!((p.numeric - c).abs() <= 1e-6 * c.abs().max(1.0), "n={}", p.index);
        }
    }

    #[test]
    fn construction1_tk_form_closed_form_matches() {
        // the two-point closed form holds for the ratio distortions and
        // scaled utilities as well
        let spec = CptSpec::tversky_kahneman(0.88, 0.5, 0.61, 0.69, 1.0, 2.25).unwrap();
        let model = KernelModel::from_variance(0.04).unwrap();
        let rep = witness_alpha_ge_beta(&spec, &model, 0.3, &[1, 10, 250]).unwrap();
        for p in &rep.points {
            let c = p.closed_form.unwrap();
            assert!((p.numeric - c).abs() <= 1e-10 * c.abs().max(1.0), "n={}", p.index);
            assert!(p.budget_residual < 1e-10);
        }
        let vals = rep.numeric_values();
        assert!(vals.last().unwrap() > &vals[0]);
    }

    #[test]
    fn construction1_index_zero_with_zero_budget_is_zero_payoff() {
        let spec = power(0.9, 0.5, 1.0, 1.0);
        let model = KernelModel::from_variance(0.0).unwrap();
        let rep = witness_alpha_ge_beta(&spec, &model, 0.0, &[0]).unwrap();
        assert_eq!(rep.points[0].numeric, 0.0);
        assert_eq!(rep.points[0].closed_form, Some(0.0));
    }

    #[test]
    fn construction1_equal_exponents_rebalances() {
        // alpha = beta with gamma < delta: the lower interval at cut 1/2
        // already has a positive margin even for v = 0
        let spec = power(0.6, 0.6, 0.5, 0.9);
        let model = KernelModel::from_variance(0.04).unwrap();
        let rep = witness_alpha_ge_beta(&spec, &model, 0.0, &default_indices(2000)).unwrap();
        let vals = rep.numeric_values();
        assert!(vals.last().unwrap() > &(10.0 * vals[0].abs() + 10.0), "{vals:?}");
    }

    #[test]
    fn construction1_infeasible_corner_is_reported() {
        // alpha = beta, gamma > beta > delta, tiny variance: no indicator
        // pair works (the margin analysis caps P(A) at Phi(sqrt v))
        let spec = power(0.5, 0.5, 0.9, 0.3);
        let model = KernelModel::from_variance(0.01).unwrap();
        match witness_alpha_ge_beta(&spec, &model, 0.0, &[1, 2]) {
            Err(WitnessError::RebalanceInfeasible(_)) => {}
            other => panic!("expected RebalanceInfeasible, got {other:?}"),
        }
    }

    #[test]
    fn construction2_budget_and_divergence() {
        let spec = power(0.6, 0.7, 0.15, 0.9);
        for v in [0.0, 0.16] {
            let model = KernelModel::from_variance(v).unwrap();
            let rep = witness_beta_delta(&spec, &model, &default_indices(10_000)).unwrap();
            assert!(rep.max_budget_residual() < 1e-10, "v={v}");
            let vals = rep.numeric_values();
            let first = vals[0].abs();
            assert!(
                vals.iter().any(|&x| x > 10.0 * first + 10.0),
                "v={v}: no divergence in {vals:?}"
            );
            // monotone after the onset: the last few indices increase
            let tail: Vec<f64> = vals[vals.len() - 4..].to_vec();
            assert!(tail.windows(2).all(|w| w[1] > w[0]), "tail not monotone: {tail:?}");
            // truncation levels are recorded
            assert!(rep.points.iter().all(|p| p.truncation_level.is_some()));
        }
    }

    #[test]
    fn construction2_closed_form_matches_numeric_when_degenerate() {
        let spec = power(0.6, 0.7, 0.15, 0.9);
        let model = KernelModel::from_variance(0.0).unwrap();
        let rep = witness_beta_delta(&spec, &model, &[1, 10, 100, 1000]).unwrap();
        for p in &rep.points {
            let c = p.closed_form.expect("degenerate pure power has closed forms");
            let rel = (p.numeric - c).abs() / c.abs().max(1e-12);
            assert!(rel < 1e-6, "n={}: numeric={} closed={} rel={rel}", p.index, p.numeric, c);
        }
    }

    #[test]
    fn construction2_loss_q_expectation_is_infinite() {
        let spec = power(0.6, 0.7, 0.15, 0.9);
        let chi = 0.5 * (spec.beta() / spec.delta() + 1.0);
        let law = loss_q_law(chi).unwrap();
        assert_eq!(law.mean_nonnegative(Measure::Q).unwrap(), f64::INFINITY);
    }

    #[test]
    fn construction3_budget_divergence_and_loss_closed_form() {
        let spec = power(0.9, 0.95, 0.3, 0.9);
        for v in [0.0, 0.04] {
            let model = KernelModel::from_variance(v).unwrap();
            let rep = witness_alpha_gamma(&spec, &model, &default_indices(10_000)).unwrap();
            assert!(rep.max_budget_residual() < 1e-12);
            let vals = rep.numeric_values();
            assert!(vals.last().unwrap() > &(10.0 * vals[0].abs() + 10.0), "v={v}");

            // V-(Z_n) closed form against the engine's telescoping sum
            let n = 50u64;
            let xi = 0.5 * (1.0 + spec.alpha() / spec.gamma());
            let c_n = gain_truncated_mean(xi, n as f64);
            let loss_law = model
                .atoms_from_u_cells(&[(0.0, 0.5, 0.0), (0.5, 1.0, 2.0 * c_n)])
                .unwrap();
            let v_minus = choquet_minus(&loss_law, &spec).unwrap().as_finite().unwrap();
            let closed = flat_loss_closed_form(&spec, &model, n);
            assert!((v_minus - closed).abs() < 1e-10, "v={v}: {v_minus} vs {closed}");
        }
    }

    #[test]
    fn construction3_first_index_bounded_below() {
        let spec = power(0.9, 0.95, 0.3, 0.9);
        let model = KernelModel::from_variance(0.04).unwrap();
        let xi = 0.5 * (1.0 + spec.alpha() / spec.gamma());
        let c1 = gain_truncated_mean(xi, 1.0);
        // X_1 >= -2 C_1 by construction
        let cells = {
            let mut c = gain_cells(xi, 1.0);
            c.push((0.5, 1.0, -2.0 * c1));
            c
        };
        let law = model.atoms_from_u_cells(&cells).unwrap();
        assert!(law.min_body_value() >= -2.0 * c1 - 1e-15);
    }

    #[test]
    fn gain_mean_closed_form() {
        // xi = 2: E_Q[Y] = (1/2)^(1/2) / (1/2) = sqrt 2, approached as n grows
        let e = gain_truncated_mean(2.0, 1e12);
        assert!((e - std::f64::consts::SQRT_2).abs() < 1e-5, "{e}");
        // small n: the cap binds everywhere on the half line
        assert!((gain_truncated_mean(2.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regime_preconditions_are_enforced() {
        let model = KernelModel::from_variance(0.04).unwrap();
        assert!(matches!(
            witness_alpha_ge_beta(&power(0.4, 0.6, 0.5, 0.5), &model, 0.0, &[1]),
            Err(WitnessError::RegimeMismatch { .. })
        ));
        assert!(matches!(
            witness_beta_delta(&power(0.4, 0.9, 0.5, 0.8), &model, &[1]),
            Err(WitnessError::RegimeMismatch { .. })
        ));
        assert!(matches!(
            witness_alpha_gamma(&power(0.4, 0.9, 0.5, 0.3), &model, &[1]),
            Err(WitnessError::RegimeMismatch { .. })
        ));
        assert!(matches!(
            witness(Cause::BetaDeltaBelowOne, &power(0.4, 0.6, 0.9, 0.7), &model, 1.0, &[1]),
            Err(WitnessError::NonzeroBudget(_))
        ));
        assert!(matches!(
            witness(Cause::SufficientHolds, &power(0.4, 0.9, 0.5, 0.8), &model, 0.0, &[1]),
            Err(WitnessError::NotIllPosedCause(_))
        ));
    }

    #[test]
    fn loglog_slope_of_construction1_approaches_alpha() {
        let spec = power(0.9, 0.5, 1.0, 1.0);
        let model = KernelModel::from_variance(0.0).unwrap();
        let rep =
            witness_alpha_ge_beta(&spec, &model, 0.0, &default_indices(10_000)).unwrap();
        let slope = rep.loglog_slope().unwrap();
        assert!((slope - 0.9).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn default_indices_shape() {
        assert_eq!(default_indices(5), vec![1, 2, 3, 4, 5]);
        let big = default_indices(10_000);
        assert!(big.contains(&1) && big.contains(&10_000));
        assert!(big.len() < 50);
        assert!(big.windows(2).all(|w| w[0] < w[1]));
    }
}
