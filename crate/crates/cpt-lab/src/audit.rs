//! Numerical audits of the inequality estimates behind the well-posedness
//! theorem, with every constant assembled from its explicit derivation
//! (Chebyshev, Hoelder and Jensen steps with midpoint exponents).
//!
//! Three families:
//!   * EleqL: a moment of X is controlled by the survival-power integral of
//!     a higher power, `E[X^s] <= 1 + D (int P{X^b > y}^a dy)^(1/a)` with
//!     `D = 1/(b/(sa) - 1)`.
//!   * Lemeta: for budget-constrained signed payoffs, the gains-side
//!     integral is controlled affinely by a loss-side integral at an
//!     intermediate exponent eta.
//!   * L1L2: a sublinear transfer between survival-power integrals at two
//!     utility exponents, with exponent zeta in (0, 1).
//!
//! Free constants sit at the midpoints of their admissible intervals, and
//! kernel moments are the closed-form log-normal expressions, never sampled.
//! A case whose right-hand side is not certified finite is a vacuous pass,
//! reported distinctly and never counted as evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::choquet::{choquet_integral, ChoquetError, EngineConfig};
use crate::law::{Atom, AtomLaw, Law, LawError, Measure, PowerTail, QuantileLaw};
use crate::market::{KernelModel, MarketError};
use crate::prefs::{CptSpec, DistortionForm, SidePrefs};
use crate::value::ExtendedValue;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("audit precondition violated: {0}")]
    Precondition(String),
    #[error("this audit needs a dual-measure atom law")]
    NeedsDualMeasureLaw,
    #[error("law budget is {got}, expected {expected} within 1e-8")]
    BudgetMismatch { expected: f64, got: f64 },
    #[error(transparent)]
    Engine(#[from] ChoquetError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Which inequality a case audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lemma {
    EleqL,
    Lemeta,
    L1L2,
}

impl std::fmt::Display for Lemma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Lemma::EleqL => "eleql",
            Lemma::Lemeta => "lemeta",
            Lemma::L1L2 => "l1l2",
        };
        f.write_str(s)
    }
}

/// One audited instance: the law, both sides, and the constants used.
#[derive(Debug, Clone, Serialize)]
pub struct AuditCase {
    pub lemma: Lemma,
    pub exponents: Vec<(String, f64)>,
    pub law: Law,
    pub lhs: f64,
    pub rhs: f64,
    pub constants: Vec<(String, f64)>,
    /// Right-hand side not certified finite: holds trivially, not evidence.
    pub vacuous: bool,
    pub pass: bool,
}

impl AuditCase {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.0 == name).map(|c| c.1)
    }
}

/// Absolute-plus-relative cushion for comparing two quadrature results.
fn leq_with_noise(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-9 + 1e-12 * rhs.abs()
}

fn finite_or_vacuous(v: ExtendedValue) -> (f64, bool) {
    match v {
        ExtendedValue::Finite { value } => (value, false),
        // not certified finite: the bound holds trivially
        _ => (f64::INFINITY, true),
    }
}

// ---------------------------------------------------------------------------
// EleqL
// ---------------------------------------------------------------------------

/// Audits `E[X^s] <= 1 + D (int P{X^b > y}^a dy)^(1/a)` for a nonnegative law.
pub fn audit_eleql(a: f64, b: f64, s: f64, law: &Law) -> Result<AuditCase, AuditError> {
    if !(a > 0.0 && b > 0.0 && s > 0.0 && b / (s * a) > 1.0) {
        return Err(AuditError::Precondition(format!(
            "need a, b, s > 0 with b/(s a) > 1, got a={a}, b={b}, s={s}"
        )));
    }
    let cfg = EngineConfig::default();
    let d = 1.0 / (b / (s * a) - 1.0);
    // E[X^s] as the undistorted survival integral of X^s
    let (lhs, lhs_vac) =
        finite_or_vacuous(choquet_integral(law, &SidePrefs::raw_power(s, 1.0), &cfg)?);
    let (t, rhs_vac) =
        finite_or_vacuous(choquet_integral(law, &SidePrefs::raw_power(b, a), &cfg)?);
    let rhs = if rhs_vac { f64::INFINITY } else { 1.0 + d * t.powf(1.0 / a) };
    let pass = rhs_vac || (!lhs_vac && leq_with_noise(lhs, rhs));
    Ok(AuditCase {
        lemma: Lemma::EleqL,
        exponents: vec![("a".into(), a), ("b".into(), b), ("s".into(), s)],
        law: law.clone(),
        lhs,
        rhs,
        constants: vec![("D".into(), d)],
        vacuous: rhs_vac,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Lemeta
// ---------------------------------------------------------------------------

/// The constant chain of the budget-constrained gains/loss estimate.
#[derive(Debug, Clone, Serialize)]
pub struct LemetaConstants {
    pub eta: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Assembles eta, lambda, p, q at the midpoints of their admissible
/// intervals and the constants C1..C7, M1, M2, L1, L2 exactly as in the
/// derivation chain, with the kernel moments in closed form.
pub fn lemeta_constants(
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
) -> Result<LemetaConstants, AuditError> {
    let (al, be, ga, de) = (spec.alpha(), spec.beta(), spec.gamma(), spec.delta());
    if !(al < be && al < ga && be > de) {
        return Err(AuditError::Precondition(format!(
            "need alpha < beta, alpha/gamma < 1 < beta/delta, got ({al}, {be}, {ga}, {de})"
        )));
    }
    let eta = 0.5 * (al.max(de) + be);
    let lambda = 0.5 * (1.0 / ga + (1.0 / al).min(eta / (al * ga)));
    let p = 0.5 * (1.0 + 1.0 / (lambda * al));
    let q = 0.5 * (1f64.max(al * lambda * ga / de) + eta / de);
    // chain prerequisites, all guaranteed by the midpoint choices
    assert!(lambda * ga > 1.0, "lambda gamma = {}", lambda * ga);
    assert!(al * lambda * p < 1.0);
    assert!(al * lambda * ga < 1.0);
    assert!(al * lambda * ga / q < de);
    assert!(eta / (de * q) > 1.0);

    let c1 = 1.0 / (lambda * ga - 1.0);
    let c2 = model.moment_p(-1.0 / (p - 1.0)).powf((p - 1.0) / p);
    let c3 = c2.powf(ga);
    let c4 = c3 * x0.abs().powf(al * lambda * ga);
    let c5 = model.moment_p(q / (q - 1.0)).powf(al * lambda * ga * (q - 1.0) / q);
    let d1 = 1.0 / (eta / (de * q) - 1.0);
    let c6 = c4 + 2.0 * c3 * c5;
    let c7 = c3 * c5;
    let m1 = c6 + c7;
    let m2 = c7 * d1.powf(de);
    let l1 = 1.0 + c1 * m1;
    let l2 = c1 * m2;
    Ok(LemetaConstants { eta, lambda, p, q, l1, l2 })
}

/// Audits the gains-side bound
/// `int P{(X+)^alpha > y}^gamma dy <= L1 + L2 int P{(X-)^eta > y}^delta dy`
/// for a dual-measure atom law with E_Q[X] = x0.
pub fn audit_lemeta(
    spec: &CptSpec,
    x0: f64,
    law: &Law,
    model: &KernelModel,
) -> Result<AuditCase, AuditError> {
    let atoms = match law {
        Law::DiscreteAtoms(a) => a,
        Law::QuantileGrid(_) => return Err(AuditError::NeedsDualMeasureLaw),
    };
    let budget = atoms.mean(Measure::Q);
    if (budget - x0).abs() > 1e-8 {
        return Err(AuditError::BudgetMismatch { expected: x0, got: budget });
    }
    let k = lemeta_constants(spec, model, x0)?;
    let cfg = EngineConfig::default();
    let (pos, neg) = law.split_parts()?;
    let (lhs, _) = finite_or_vacuous(choquet_integral(
        &pos,
        &SidePrefs::raw_power(spec.alpha(), spec.gamma()),
        &cfg,
    )?);
    let (t_eta, rhs_vac) = finite_or_vacuous(choquet_integral(
        &neg,
        &SidePrefs::raw_power(k.eta, spec.delta()),
        &cfg,
    )?);
    let rhs = if rhs_vac { f64::INFINITY } else { k.l1 + k.l2 * t_eta };
    let pass = rhs_vac || leq_with_noise(lhs, rhs);
    Ok(AuditCase {
        lemma: Lemma::Lemeta,
        exponents: vec![
            ("alpha".into(), spec.alpha()),
            ("beta".into(), spec.beta()),
            ("gamma".into(), spec.gamma()),
            ("delta".into(), spec.delta()),
            ("eta".into(), k.eta),
        ],
        law: law.clone(),
        lhs,
        rhs,
        constants: vec![
            ("lambda".into(), k.lambda),
            ("p".into(), k.p),
            ("q".into(), k.q),
            ("L1".into(), k.l1),
            ("L2".into(), k.l2),
        ],
        vacuous: rhs_vac,
        pass,
    })
}

// ---------------------------------------------------------------------------
// L1L2
// ---------------------------------------------------------------------------

/// The transfer constants of the two-exponent estimate.
#[derive(Debug, Clone, Serialize)]
pub struct L1L2Constants {
    pub chi: f64,
    pub xi: f64,
    pub zeta: f64,
    pub r1: f64,
    pub r2: f64,
}

pub fn l1l2_constants(a: f64, b: f64, s: f64) -> Result<L1L2Constants, AuditError> {
    if !(0.0 < s && s < a && a < b && s <= 1.0) {
        return Err(AuditError::Precondition(format!(
            "need 0 < s < a < b with s <= 1, got a={a}, b={b}, s={s}"
        )));
    }
    let chi = 0.5 * (1.0 / s + b / (s * a));
    let xi = 0.5 * (chi * a + b / s);
    let zeta = a * chi / xi;
    assert!(zeta > 0.0 && zeta < 1.0, "zeta = {zeta}");
    assert!(b / (s * xi) > 1.0 && s * chi > 1.0);

    let d = 1.0 / (b / (s * xi) - 1.0);
    let c1 = d.powf(s);
    let c2 = 1.0 / (s * chi - 1.0);
    let r1 = 1.0 + c2;
    let r2 = c2 * c1.powf(zeta);
    Ok(L1L2Constants { chi, xi, zeta, r1, r2 })
}

/// Audits `int P{X^a > y}^s dy <= R1 + R2 (int P{X^b > y}^s dy)^zeta` for a
/// nonnegative law.
pub fn audit_l1l2(a: f64, b: f64, s: f64, law: &Law) -> Result<AuditCase, AuditError> {
    let k = l1l2_constants(a, b, s)?;
    let cfg = EngineConfig::default();
    let (lhs, lhs_vac) =
        finite_or_vacuous(choquet_integral(law, &SidePrefs::raw_power(a, s), &cfg)?);
    let (t_b, rhs_vac) =
        finite_or_vacuous(choquet_integral(law, &SidePrefs::raw_power(b, s), &cfg)?);
    let rhs = if rhs_vac { f64::INFINITY } else { k.r1 + k.r2 * t_b.powf(k.zeta) };
    let pass = rhs_vac || (!lhs_vac && leq_with_noise(lhs, rhs));
    Ok(AuditCase {
        lemma: Lemma::L1L2,
        exponents: vec![("a".into(), a), ("b".into(), b), ("s".into(), s)],
        law: law.clone(),
        lhs,
        rhs,
        constants: vec![
            ("chi".into(), k.chi),
            ("xi".into(), k.xi),
            ("zeta".into(), k.zeta),
            ("R1".into(), k.r1),
            ("R2".into(), k.r2),
        ],
        vacuous: rhs_vac,
        pass,
    })
}

// ---------------------------------------------------------------------------
// analytic value ceiling for the well-posed regime
// ---------------------------------------------------------------------------

/// Analytic upper bound on the CPT value of any budget-x0 payoff in the
/// well-posed regime, assembled from the Lemeta and L1L2 estimates:
///
///   V(X) <= g (L1 + L2 R1) + max_t ( K t^zeta - t ),
///   max_t ( K t^zeta - t ) = (1-zeta)/zeta * (K zeta)^(1/(1-zeta)),
///
/// where g and the factor inside K absorb the utility scales and, for the
/// ratio form, the distortion envelope w(p) >= 2^(-1/delta) p^delta.
///
/// Every admissible choice of the free constants yields a valid ceiling, so
/// this searches a small interior grid of (eta, lambda, p, q, chi, xi) and
/// keeps the smallest; the peak term is evaluated in log space because the
/// exponent 1/(1-zeta) explodes when beta - delta is narrow. The audits keep
/// the midpoint constants; only the reported ceiling is tuned.
pub fn well_posed_value_bound(
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
) -> Result<f64, AuditError> {
    let (al, be, ga, de) = (spec.alpha(), spec.beta(), spec.gamma(), spec.delta());
    if !(al < be && al < ga && be > de) {
        return Err(AuditError::Precondition(format!(
            "need alpha < beta, alpha/gamma < 1 < beta/delta, got ({al}, {be}, {ga}, {de})"
        )));
    }
    let gain_scale = spec.c_plus();
    let loss_factor = match spec.form() {
        DistortionForm::PurePower => 1.0 / spec.c_minus(),
        DistortionForm::TverskyKahneman => 2f64.powf(1.0 / spec.delta()) / spec.c_minus(),
    };
    let lerp = |lo: f64, hi: f64, f: f64| lo + (hi - lo) * f;
    let fracs = [0.12, 0.3, 0.5, 0.7, 0.88];

    let mut best = f64::INFINITY;
    for &fe in &fracs {
        let eta = lerp(al.max(de), be, fe);
        for &fl in &fracs {
            let lambda = lerp(1.0 / ga, (1.0 / al).min(eta / (al * ga)), fl);
            if lambda * ga <= 1.0 || al * lambda * ga >= 1.0 {
                continue;
            }
            let c1 = 1.0 / (lambda * ga - 1.0);
            for &fp in &fracs {
                let p = lerp(1.0, 1.0 / (lambda * al), fp);
                if p <= 1.0 || al * lambda * p >= 1.0 {
                    continue;
                }
                let c3 = model.moment_p(-1.0 / (p - 1.0)).powf(ga * (p - 1.0) / p);
                for &fq in &fracs {
                    let q = lerp(1f64.max(al * lambda * ga / de), eta / de, fq);
                    if q <= 1.0 || al * lambda * ga / q >= de || eta / (de * q) <= 1.0 {
                        continue;
                    }
                    let c4 = c3 * x0.abs().powf(al * lambda * ga);
                    let c5 =
                        model.moment_p(q / (q - 1.0)).powf(al * lambda * ga * (q - 1.0) / q);
                    let d1 = 1.0 / (eta / (de * q) - 1.0);
                    let c7 = c3 * c5;
                    let m1 = c4 + 2.0 * c7 + c7;
                    let m2 = c7 * d1.powf(de);
                    let l1 = 1.0 + c1 * m1;
                    let l2 = c1 * m2;
                    if !(l1.is_finite() && l2.is_finite()) {
                        continue;
                    }
                    // transfer the eta-integral to the loss-side value:
                    // L1L2 with s = delta, a = eta, b = beta
                    for &fc in &fracs {
                        let chi = lerp(1.0 / de, be / (de * eta), fc);
                        if de * chi <= 1.0 {
                            continue;
                        }
                        for &fx in &fracs {
                            let xi = lerp(chi * eta, be / de, fx);
                            let zeta = eta * chi / xi;
                            if !(zeta > 0.0 && zeta < 1.0) || be / (de * xi) <= 1.0 {
                                continue;
                            }
                            let d = 1.0 / (be / (de * xi) - 1.0);
                            let c2t = 1.0 / (de * chi - 1.0);
                            let r1 = 1.0 + c2t;
                            let r2 = c2t * d.powf(de).powf(zeta);
                            let ln_k = (gain_scale * l2 * r2).ln()
                                + zeta * loss_factor.ln();
                            let ln_peak = ((1.0 - zeta) / zeta).ln()
                                + (ln_k + zeta.ln()) / (1.0 - zeta);
                            let peak = ln_peak.exp();
                            let bound = gain_scale * (l1 + l2 * r1) + peak;
                            if bound.is_finite() && bound < best {
                                best = bound;
                            }
                        }
                    }
                }
            }
        }
    }
    if !best.is_finite() {
        return Err(AuditError::Precondition(
            "no admissible constant choice gave a representable ceiling".into(),
        ));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// corpus generation and the audit driver
// ---------------------------------------------------------------------------

/// Outcome of a corpus run.
#[derive(Debug, Serialize)]
pub struct AuditRun {
    pub lemma: Lemma,
    pub cases: Vec<AuditCase>,
    pub violations: usize,
    pub vacuous: usize,
}

impl AuditRun {
    fn from_cases(lemma: Lemma, cases: Vec<AuditCase>) -> Self {
        let violations = cases.iter().filter(|c| !c.pass).count();
        let vacuous = cases.iter().filter(|c| c.vacuous).count();
        AuditRun { lemma, cases, violations, vacuous }
    }
}

/// Random nonnegative law: atoms, a truncated-Pareto grid with a consistent
/// power tail, or a log-normal-transform grid.
fn random_nonneg_law(rng: &mut ChaCha8Rng) -> Law {
    match rng.random_range(0..3u8) {
        0 => {
            let n = rng.random_range(1..=20usize);
            let mut atoms = Vec::with_capacity(n);
            let mut left = 1.0f64;
            for i in 0..n {
                let p = if i + 1 == n { left } else { left * rng.random_range(0.05..0.6) };
                if i + 1 != n {
                    left -= p;
                }
                let z: f64 = StandardNormal.sample(rng);
                atoms.push(Atom { value: z.abs() * 2.0, prob_p: p, prob_q: p });
            }
            Law::DiscreteAtoms(AtomLaw::from_unsorted(atoms).expect("valid atoms"))
        }
        1 => {
            // survival (x/x_min)^-kappa beyond x_min
            let kappa = rng.random_range(0.4..6.0f64);
            let x_min = rng.random_range(0.5..2.0f64);
            let coef = x_min.powf(kappa);
            Law::QuantileGrid(
                QuantileLaw::new(
                    Measure::P,
                    vec![(0.0, x_min)],
                    None,
                    Some(PowerTail { coef, exponent: kappa }),
                )
                .expect("valid pareto"),
            )
        }
        _ => {
            let mu = rng.random_range(-0.5..0.5f64);
            let sd = rng.random_range(0.2..1.0f64);
            let g = 65;
            let mut grid = Vec::with_capacity(g);
            for i in 0..g {
                let z = -5.0 + 10.0 * i as f64 / (g - 1) as f64;
                let s = crate::math::norm_cdf(z);
                if grid.last().is_none_or(|&(prev, _): &(f64, f64)| s > prev) {
                    grid.push((s, (mu + sd * z).exp()));
                }
            }
            Law::QuantileGrid(QuantileLaw::new(Measure::P, grid, None, None).expect("valid grid"))
        }
    }
}

/// Random signed dual-measure law on U-cells, shifted to the exact budget.
fn random_budget_law(rng: &mut ChaCha8Rng, model: &KernelModel, x0: f64) -> Law {
    let n = rng.random_range(3..=24usize);
    let mut edges: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.02..0.98)).collect();
    edges.push(0.0);
    edges.push(1.0);
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup();
    let loss_free = rng.random_bool(0.15);
    let mut cells: Vec<(f64, f64, f64)> = edges
        .windows(2)
        .map(|w| {
            let z: f64 = StandardNormal.sample(rng);
            let v = if loss_free { z.abs() } else { 3.0 * z };
            (w[0], w[1], v)
        })
        .collect();
    let budget: f64 = cells.iter().map(|&(lo, hi, v)| (hi - lo) * v).sum();
    let shift = x0 - budget;
    for c in &mut cells {
        c.2 += shift;
    }
    model.atoms_from_u_cells(&cells).expect("cells partition (0,1)")
}

/// Runs a randomized corpus for one lemma. Exponents are drawn per case
/// from the admissible region; lemeta cases draw laws with the exact budget.
/// Deterministic for a fixed seed: case i uses RNG stream i.
pub fn run_audit(
    lemma: Lemma,
    corpus_size: usize,
    seed: u64,
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
) -> Result<AuditRun, AuditError> {
    let cases: Result<Vec<AuditCase>, AuditError> = (0..corpus_size)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            match lemma {
                Lemma::EleqL => {
                    let s = rng.random_range(0.15..1.0f64);
                    let a = rng.random_range(0.15..1.0f64);
                    let b = s * a * rng.random_range(1.3..6.0f64);
                    let law = random_nonneg_law(&mut rng);
                    audit_eleql(a, b, s, &law)
                }
                Lemma::L1L2 => {
                    let s = rng.random_range(0.15..0.95f64);
                    let a = s + rng.random_range(0.05..1.0f64);
                    let b = a + rng.random_range(0.05..1.5f64);
                    let law = random_nonneg_law(&mut rng);
                    audit_l1l2(a, b, s, &law)
                }
                Lemma::Lemeta => {
                    let law = random_budget_law(&mut rng, model, x0);
                    audit_lemeta(spec, x0, &law, model)
                }
            }
        })
        .collect();
    Ok(AuditRun::from_cases(lemma, cases?))
}
