//! Scalar payoff laws: sorted discrete atoms carrying weights under both the
//! physical and the martingale measure, or tabulated quantile grids with
//! fitted power tails.
//!
//! Quantile grids follow two completion conventions that make simple laws
//! exact rather than approximate:
//!   * below the first grid point the quantile is extended flat, i.e. the
//!     bottom mass sits as an atom at the first tabulated value;
//!   * beyond the last grid point the fitted tail governs, with the survival
//!     clamped at the remaining mass `1 - s_last` (so a tail fit that starts
//!     above the junction never claims more mass than is available).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which probability measure a weight or grid refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    P,
    Q,
}

#[derive(Debug, Error, PartialEq)]
pub enum LawError {
    #[error("atom values must be strictly increasing and finite (index {0})")]
    AtomOrder(usize),
    #[error("atom probabilities must lie in [0,1] (index {0})")]
    AtomProbRange(usize),
    #[error("{measure:?}-probabilities sum to {sum}, expected 1 within 1e-12")]
    AtomProbSum { measure: Measure, sum: f64 },
    #[error("empty law")]
    Empty,
    #[error("quantile grid levels must be strictly increasing within [0,1) (index {0})")]
    GridLevelOrder(usize),
    #[error("quantile grid values must be non-decreasing and finite (index {0})")]
    GridValueOrder(usize),
    #[error("tail fit requires coef > 0 and exponent > 0, got coef={coef}, exponent={exponent}")]
    BadTail { coef: f64, exponent: f64 },
    #[error("left tail requires the first grid value to be negative")]
    LeftTailOnNonnegative,
    #[error("right tail requires the last grid value to be positive")]
    RightTailOnNonpositive,
    #[error("law is tabulated under {law:?} but the operation needs {requested:?}")]
    MeasureMismatch { law: Measure, requested: Measure },
    #[error("operation requires a nonnegative law")]
    NegativeSupport,
    #[error("shifting a power-tailed quantile grid is not supported; supply the law net of the reference point")]
    ShiftTailedGrid,
    #[error("scale factor must be finite and > 0, got {0}")]
    BadScale(f64),
}

/// One atom of a discrete law with weights under both measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob_p: f64,
    pub prob_q: f64,
}

/// Power tail fit: survival probability of the magnitude is `coef * y^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub coef: f64,
    #[serde(rename = "exp")]
    pub exponent: f64,
}

impl PowerTail {
    fn validate(&self) -> Result<(), LawError> {
        if !(self.coef > 0.0 && self.coef.is_finite())
            || !(self.exponent > 0.0 && self.exponent.is_finite())
        {
            return Err(LawError::BadTail { coef: self.coef, exponent: self.exponent });
        }
        Ok(())
    }

    /// Survival at magnitude `y`.
    pub fn survival(&self, y: f64) -> f64 {
        self.coef * y.powf(-self.exponent)
    }
}

/// Sorted discrete law.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomLaw {
    atoms: Vec<Atom>,
}

const PROB_SUM_TOL: f64 = 1e-12;

impl AtomLaw {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self, LawError> {
        if atoms.is_empty() {
            return Err(LawError::Empty);
        }
        for (i, a) in atoms.iter_mut().enumerate() {
            if !a.value.is_finite() {
                return Err(LawError::AtomOrder(i));
            }
            for p in [&mut a.prob_p, &mut a.prob_q] {
                // merging cells accumulates rounding; repair pure float
                // overshoot at the boundary, reject anything real
                if !(0.0..=1.0 + PROB_SUM_TOL).contains(p) {
                    return Err(LawError::AtomProbRange(i));
                }
                *p = p.min(1.0);
            }
        }
        for i in 1..atoms.len() {
            if atoms[i - 1].value >= atoms[i].value {
                return Err(LawError::AtomOrder(i));
            }
        }
        for (measure, sum) in [
            (Measure::P, atoms.iter().map(|a| a.prob_p).sum::<f64>()),
            (Measure::Q, atoms.iter().map(|a| a.prob_q).sum::<f64>()),
        ] {
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(LawError::AtomProbSum { measure, sum });
            }
        }
        Ok(AtomLaw { atoms })
    }

    /// Builds from unordered atoms, merging exact duplicates and dropping
    /// zero-mass entries (unless everything is massless).
    pub fn from_unsorted(mut atoms: Vec<Atom>) -> Result<Self, LawError> {
        atoms.retain(|a| a.prob_p > 0.0 || a.prob_q > 0.0);
        if atoms.is_empty() {
            return Err(LawError::Empty);
        }
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.value == a.value => {
                    last.prob_p += a.prob_p;
                    last.prob_q += a.prob_q;
                }
                _ => merged.push(a),
            }
        }
        AtomLaw::new(merged)
    }

    /// Single atom at `value` with probability one under both measures.
    pub fn constant(value: f64) -> Self {
        AtomLaw::new(vec![Atom { value, prob_p: 1.0, prob_q: 1.0 }]).expect("constant law")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn prob(&self, i: usize, measure: Measure) -> f64 {
        match measure {
            Measure::P => self.atoms[i].prob_p,
            Measure::Q => self.atoms[i].prob_q,
        }
    }

    pub fn mean(&self, measure: Measure) -> f64 {
        self.atoms.iter().map(|a| a.value * self.prob_of(a, measure)).sum()
    }

    fn prob_of(&self, a: &Atom, measure: Measure) -> f64 {
        match measure {
            Measure::P => a.prob_p,
            Measure::Q => a.prob_q,
        }
    }

    pub fn survival(&self, measure: Measure, z: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value > z)
            .map(|a| self.prob_of(a, measure))
            .sum()
    }

    pub fn truncated_mean(&self, measure: Measure, cap: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.value.min(cap) * self.prob_of(a, measure))
            .sum()
    }
}

/// Tabulated quantile grid with optional power tails, tied to one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileLaw {
    measure: Measure,
    /// (level, value) pairs; levels strictly increasing in [0, 1).
    grid: Vec<(f64, f64)>,
    left_tail: Option<PowerTail>,
    right_tail: Option<PowerTail>,
}

impl QuantileLaw {
    pub fn new(
        measure: Measure,
        grid: Vec<(f64, f64)>,
        left_tail: Option<PowerTail>,
        right_tail: Option<PowerTail>,
    ) -> Result<Self, LawError> {
        if grid.is_empty() {
            return Err(LawError::Empty);
        }
        for (i, &(s, v)) in grid.iter().enumerate() {
            if !(0.0..1.0).contains(&s) || (i > 0 && grid[i - 1].0 >= s) {
                return Err(LawError::GridLevelOrder(i));
            }
            if !v.is_finite() || (i > 0 && grid[i - 1].1 > v) {
                return Err(LawError::GridValueOrder(i));
            }
        }
        if let Some(t) = &left_tail {
            t.validate()?;
            if grid[0].1 >= 0.0 {
                return Err(LawError::LeftTailOnNonnegative);
            }
        }
        if let Some(t) = &right_tail {
            t.validate()?;
            if grid[grid.len() - 1].1 < 0.0 {
                return Err(LawError::RightTailOnNonpositive);
            }
        }
        Ok(QuantileLaw { measure, grid, left_tail, right_tail })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }
    pub fn grid(&self) -> &[(f64, f64)] {
        &self.grid
    }
    pub fn left_tail(&self) -> Option<&PowerTail> {
        self.left_tail.as_ref()
    }
    pub fn right_tail(&self) -> Option<&PowerTail> {
        self.right_tail.as_ref()
    }

    pub fn first(&self) -> (f64, f64) {
        self.grid[0]
    }
    pub fn last(&self) -> (f64, f64) {
        self.grid[self.grid.len() - 1]
    }

    /// Magnitude above which the right tail fit governs: the clamp crossover
    /// `(coef / (1 - s_last))^(1/exponent)`, never below the last grid value.
    pub fn right_tail_start(&self) -> Option<f64> {
        let t = self.right_tail.as_ref()?;
        let rem = 1.0 - self.last().0;
        Some((t.coef / rem).powf(1.0 / t.exponent).max(self.last().1))
    }

    /// Survival function under the law's own measure.
    pub fn survival(&self, z: f64) -> f64 {
        let (s_last, x_last) = self.last();
        if z >= x_last {
            return match &self.right_tail {
                Some(t) => t.survival(z).min(1.0 - s_last).min(1.0),
                None => 0.0,
            };
        }
        let (s_first, x_first) = self.first();
        if z < x_first {
            // mass below the first grid value lives in the left tail if any
            return match &self.left_tail {
                Some(t) if z < 0.0 => 1.0 - (t.survival(-z).min(s_first)),
                _ => 1.0,
            };
        }
        // body: locate the segment containing z and interpolate the CDF
        let idx = self.grid.partition_point(|&(_, v)| v <= z);
        // grid[idx-1].value <= z < grid[idx].value
        let (s0, x0) = self.grid[idx - 1];
        let (s1, x1) = self.grid[idx];
        let f = s0 + (s1 - s0) * (z - x0) / (x1 - x0);
        1.0 - f
    }

    /// Piecewise-linear survival segments of the body, zero-extent pieces
    /// (atoms) skipped. Each item is (z_lo, z_hi, s_lo, s_hi) with the
    /// survival linear from s_lo at z_lo to s_hi at z_hi.
    pub(crate) fn body_segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.grid.windows(2).filter_map(|w| {
            let (s0, x0) = w[0];
            let (s1, x1) = w[1];
            if x1 > x0 {
                Some((x0, x1, 1.0 - s0, 1.0 - s1))
            } else {
                None
            }
        })
    }

    /// E[X ∧ cap] under the law's own measure; requires a nonnegative law.
    /// Exact on the piecewise-linear body and analytic on the tail.
    pub fn truncated_mean(&self, cap: f64) -> Result<f64, LawError> {
        if self.grid[0].1 < 0.0 || self.left_tail.is_some() {
            return Err(LawError::NegativeSupport);
        }
        if cap <= 0.0 {
            return Ok(0.0);
        }
        let (_, x_first) = self.first();
        let mut total = cap.min(x_first); // S = 1 below the first value
        for (z0, z1, s0, s1) in self.body_segments() {
            if cap <= z0 {
                break;
            }
            let hi = cap.min(z1);
            // S linear on [z0, z1]; integrate the clipped piece exactly
            let s_at_hi = s0 + (s1 - s0) * (hi - z0) / (z1 - z0);
            total += (hi - z0) * 0.5 * (s0 + s_at_hi);
        }
        let (s_last, x_last) = self.last();
        if cap > x_last {
            if let Some(t) = &self.right_tail {
                let rem = 1.0 - s_last;
                let z_star = self.right_tail_start().expect("tail present");
                // constant clamp piece, then the power piece
                total += rem * ((cap.min(z_star)) - x_last).max(0.0);
                if cap > z_star {
                    total += power_tail_integral(t, z_star, cap);
                }
            }
        }
        Ok(total)
    }

    /// Mean of a nonnegative law under its own measure; +inf when the tail
    /// exponent is <= 1.
    pub fn mean_nonnegative(&self) -> Result<f64, LawError> {
        if self.grid[0].1 < 0.0 || self.left_tail.is_some() {
            return Err(LawError::NegativeSupport);
        }
        match &self.right_tail {
            Some(t) if t.exponent <= 1.0 => Ok(f64::INFINITY),
            Some(t) => {
                let z_star = self.right_tail_start().expect("tail present");
                let body = self.truncated_mean(z_star.max(self.last().1))?;
                // beyond z_star: integral of coef z^-k, k > 1
                let tail = t.coef * z_star.powf(1.0 - t.exponent) / (t.exponent - 1.0);
                Ok(body + tail)
            }
            None => self.truncated_mean(self.last().1),
        }
    }
}

/// Integral of the power survival `coef z^-exponent` over [a, b].
fn power_tail_integral(t: &PowerTail, a: f64, b: f64) -> f64 {
    if (t.exponent - 1.0).abs() < 1e-12 {
        t.coef * (b / a).ln()
    } else {
        t.coef * (b.powf(1.0 - t.exponent) - a.powf(1.0 - t.exponent)) / (1.0 - t.exponent)
    }
}

/// A scalar probability law.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    DiscreteAtoms(AtomLaw),
    QuantileGrid(QuantileLaw),
}

impl Law {
    pub fn constant(value: f64) -> Self {
        Law::DiscreteAtoms(AtomLaw::constant(value))
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Law::DiscreteAtoms(a) => a.atoms()[0].value >= 0.0,
            Law::QuantileGrid(q) => q.grid()[0].1 >= 0.0 && q.left_tail().is_none(),
        }
    }

    /// Largest body value (tails extend beyond).
    pub fn max_body_value(&self) -> f64 {
        match self {
            Law::DiscreteAtoms(a) => a.atoms().last().unwrap().value,
            Law::QuantileGrid(q) => q.last().1,
        }
    }

    pub fn min_body_value(&self) -> f64 {
        match self {
            Law::DiscreteAtoms(a) => a.atoms()[0].value,
            Law::QuantileGrid(q) => q.first().1,
        }
    }

    /// Survival probability under `measure`; errors when a quantile grid is
    /// tabulated under the other measure.
    pub fn survival(&self, measure: Measure, z: f64) -> Result<f64, LawError> {
        match self {
            Law::DiscreteAtoms(a) => Ok(a.survival(measure, z)),
            Law::QuantileGrid(q) => {
                if q.measure() != measure {
                    return Err(LawError::MeasureMismatch {
                        law: q.measure(),
                        requested: measure,
                    });
                }
                Ok(q.survival(z))
            }
        }
    }

    /// E[X ∧ cap] of a nonnegative law under `measure`.
    pub fn truncated_mean(&self, measure: Measure, cap: f64) -> Result<f64, LawError> {
        if !self.is_nonnegative() {
            return Err(LawError::NegativeSupport);
        }
        match self {
            Law::DiscreteAtoms(a) => Ok(a.truncated_mean(measure, cap)),
            Law::QuantileGrid(q) => {
                if q.measure() != measure {
                    return Err(LawError::MeasureMismatch {
                        law: q.measure(),
                        requested: measure,
                    });
                }
                q.truncated_mean(cap)
            }
        }
    }

    /// Mean of a nonnegative law under `measure`; may be +inf.
    pub fn mean_nonnegative(&self, measure: Measure) -> Result<f64, LawError> {
        if !self.is_nonnegative() {
            return Err(LawError::NegativeSupport);
        }
        match self {
            Law::DiscreteAtoms(a) => Ok(a.mean(measure)),
            Law::QuantileGrid(q) => {
                if q.measure() != measure {
                    return Err(LawError::MeasureMismatch {
                        law: q.measure(),
                        requested: measure,
                    });
                }
                q.mean_nonnegative()
            }
        }
    }

    /// Splits a signed law into the laws of the positive part X+ and of the
    /// loss magnitude X-. Both parts are full probability laws (mass that
    /// lands on the other side collapses into an atom at zero).
    pub fn split_parts(&self) -> Result<(Law, Law), LawError> {
        match self {
            Law::DiscreteAtoms(a) => {
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                let (mut zp_p, mut zp_q) = (0.0f64, 0.0f64);
                let (mut zn_p, mut zn_q) = (0.0f64, 0.0f64);
                for at in a.atoms() {
                    if at.value > 0.0 {
                        pos.push(*at);
                        zn_p += at.prob_p;
                        zn_q += at.prob_q;
                    } else if at.value < 0.0 {
                        neg.push(Atom { value: -at.value, ..*at });
                        zp_p += at.prob_p;
                        zp_q += at.prob_q;
                    } else {
                        zp_p += at.prob_p;
                        zp_q += at.prob_q;
                        zn_p += at.prob_p;
                        zn_q += at.prob_q;
                    }
                }
                pos.push(Atom { value: 0.0, prob_p: zp_p, prob_q: zp_q });
                neg.push(Atom { value: 0.0, prob_p: zn_p, prob_q: zn_q });
                Ok((
                    Law::DiscreteAtoms(AtomLaw::from_unsorted(pos)?),
                    Law::DiscreteAtoms(AtomLaw::from_unsorted(neg)?),
                ))
            }
            Law::QuantileGrid(q) => {
                let measure = q.measure();

                // cdf level carrying all mass at or below zero, and the level
                // strictly below zero; they differ when zero is an atom
                let s_at_or_below = level_at_or_below_zero(q);
                let s_below = level_below_zero(q);

                let pos_law = if q.grid()[0].1 >= 0.0 && q.left_tail().is_none() {
                    q.clone()
                } else {
                    let mut pos = vec![(s_at_or_below.clamp(0.0, 1.0 - f64::EPSILON), 0.0)];
                    for &(s, v) in q.grid() {
                        if v > 0.0 && s > pos.last().unwrap().0 {
                            pos.push((s, v));
                        }
                    }
                    QuantileLaw::new(measure, pos, None, q.right_tail().copied())?
                };

                // loss magnitude: negate and reverse the sub-zero part
                let mut neg_grid =
                    vec![((1.0 - s_below).clamp(0.0, 1.0 - f64::EPSILON), 0.0)];
                let mut below: Vec<(f64, f64)> = q
                    .grid()
                    .iter()
                    .filter(|&&(_, v)| v < 0.0)
                    .map(|&(s, v)| (1.0 - s, -v))
                    .collect();
                below.sort_by(|a, b| a.0.total_cmp(&b.0));
                for (l, v) in below {
                    if l > neg_grid.last().unwrap().0 && l < 1.0 {
                        neg_grid.push((l, v));
                    }
                }
                let neg_law =
                    QuantileLaw::new(measure, neg_grid, None, q.left_tail().copied())?;
                Ok((Law::QuantileGrid(pos_law), Law::QuantileGrid(neg_law)))
            }
        }
    }

    /// Shifts the payoff by `dx` (used to move the reference point to zero).
    pub fn shift(&self, dx: f64) -> Result<Law, LawError> {
        match self {
            Law::DiscreteAtoms(a) => {
                let atoms =
                    a.atoms().iter().map(|at| Atom { value: at.value + dx, ..*at }).collect();
                Ok(Law::DiscreteAtoms(AtomLaw::new(atoms)?))
            }
            Law::QuantileGrid(q) => {
                if dx == 0.0 {
                    return Ok(self.clone());
                }
                if q.left_tail().is_some() || q.right_tail().is_some() {
                    return Err(LawError::ShiftTailedGrid);
                }
                let grid = q.grid().iter().map(|&(s, v)| (s, v + dx)).collect();
                Ok(Law::QuantileGrid(QuantileLaw::new(q.measure(), grid, None, None)?))
            }
        }
    }

    /// Scales the payoff by `lambda > 0`. Power tails transform exactly.
    pub fn scale(&self, lambda: f64) -> Result<Law, LawError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LawError::BadScale(lambda));
        }
        match self {
            Law::DiscreteAtoms(a) => {
                let atoms = a
                    .atoms()
                    .iter()
                    .map(|at| Atom { value: at.value * lambda, ..*at })
                    .collect();
                Ok(Law::DiscreteAtoms(AtomLaw::new(atoms)?))
            }
            Law::QuantileGrid(q) => {
                let grid = q.grid().iter().map(|&(s, v)| (s, v * lambda)).collect();
                let scale_tail = |t: &PowerTail| PowerTail {
                    coef: t.coef * lambda.powf(t.exponent),
                    exponent: t.exponent,
                };
                Ok(Law::QuantileGrid(QuantileLaw::new(
                    q.measure(),
                    grid,
                    q.left_tail().map(scale_tail),
                    q.right_tail().map(scale_tail),
                )?))
            }
        }
    }
}

/// CDF level F(0) = sup { s : q(s) <= 0 } of a quantile grid
/// (0 when the whole grid is strictly positive).
fn level_at_or_below_zero(q: &QuantileLaw) -> f64 {
    let grid = q.grid();
    let idx = grid.partition_point(|&(_, v)| v <= 0.0);
    if idx == 0 {
        return 0.0;
    }
    if idx == grid.len() {
        // no positive values: the remaining top mass is also at <= 0 only
        // when there is no right tail
        return if q.right_tail().is_none() { 1.0 } else { grid[idx - 1].0 };
    }
    let (s0, x0) = grid[idx - 1];
    let (s1, x1) = grid[idx];
    if x0 == 0.0 {
        s0
    } else {
        // x0 < 0 < x1: linear crossing
        s0 + (s1 - s0) * (0.0 - x0) / (x1 - x0)
    }
}

/// CDF level F(0-) = sup { s : q(s) < 0 } of a quantile grid.
fn level_below_zero(q: &QuantileLaw) -> f64 {
    let grid = q.grid();
    let idx = grid.partition_point(|&(_, v)| v < 0.0);
    if idx == 0 {
        return 0.0;
    }
    if idx == grid.len() {
        return 1.0;
    }
    let (s0, x0) = grid[idx - 1];
    let (s1, x1) = grid[idx];
    if x1 == 0.0 {
        // the linear run-up from x0 < 0 reaches zero exactly at s1
        s1
    } else {
        s0 + (s1 - s0) * (0.0 - x0) / (x1 - x0)
    }
}

// ---------------------------------------------------------------------------
// serialization: {"kind":"atoms","atoms":[[value,pP,pQ],...]} or
// {"kind":"quantile","grid":[[s,value],...],"tail":{...},"left_tail":{...},"measure":"P"}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawLaw {
    Atoms {
        atoms: Vec<(f64, f64, f64)>,
    },
    Quantile {
        grid: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<PowerTail>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        left_tail: Option<PowerTail>,
        #[serde(default = "default_measure")]
        measure: Measure,
    },
}

fn default_measure() -> Measure {
    Measure::P
}

impl TryFrom<RawLaw> for Law {
    type Error = LawError;
    fn try_from(raw: RawLaw) -> Result<Self, LawError> {
        match raw {
            RawLaw::Atoms { atoms } => {
                let atoms = atoms
                    .into_iter()
                    .map(|(value, prob_p, prob_q)| Atom { value, prob_p, prob_q })
                    .collect();
                Ok(Law::DiscreteAtoms(AtomLaw::new(atoms)?))
            }
            RawLaw::Quantile { grid, tail, left_tail, measure } => Ok(Law::QuantileGrid(
                QuantileLaw::new(measure, grid, left_tail, tail)?,
            )),
        }
    }
}

impl From<&Law> for RawLaw {
    fn from(law: &Law) -> Self {
        match law {
            Law::DiscreteAtoms(a) => RawLaw::Atoms {
                atoms: a.atoms().iter().map(|at| (at.value, at.prob_p, at.prob_q)).collect(),
            },
            Law::QuantileGrid(q) => RawLaw::Quantile {
                grid: q.grid().to_vec(),
                tail: q.right_tail().copied(),
                left_tail: q.left_tail().copied(),
                measure: q.measure(),
            },
        }
    }
}

impl Serialize for Law {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawLaw::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Law {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawLaw::deserialize(deserializer)?;
        Law::try_from(raw).map_err(serde::de::Error::custom)
    }
}
