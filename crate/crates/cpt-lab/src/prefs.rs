//! Preference parameters of the behavioural investor: piecewise-power
//! utilities on gains and losses and probability distortions, in the plain
//! power form or the Tversky-Kahneman ratio form.
//!
//! All four exponents live in (0, 1]. Validation is strict at construction
//! and nothing is clamped: the well-posedness classifier depends on exact
//! inequalities between these parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::log_sum_exp;

/// Functional form of the utility/distortion family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistortionForm {
    /// u(x) = x^e, w(p) = p^e.
    #[serde(rename = "power")]
    PurePower,
    /// u(x) = c x^e, w(p) = p^e / (p^e + (1-p)^e)^(1/e).
    #[serde(rename = "tk")]
    TverskyKahneman,
}

#[derive(Debug, Error, PartialEq)]
pub enum PrefsError {
    #[error("exponent {name} must lie in (0, 1], got {value}")]
    ExponentOutOfRange { name: &'static str, value: f64 },
    #[error("scale {name} must be finite and > 0, got {value}")]
    ScaleOutOfRange { name: &'static str, value: f64 },
    #[error("pure-power form fixes both scales to 1, got c_plus={c_plus}, c_minus={c_minus}")]
    PowerFormScaled { c_plus: f64, c_minus: f64 },
    #[error("reference point must be finite, got {0}")]
    BadReferencePoint(f64),
    #[error("{name} must be nonnegative, got {value}")]
    NegativeArgument { name: &'static str, value: f64 },
    #[error("probability must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
}

/// The preference quadruple (alpha, beta, gamma, delta) plus form, scales
/// and reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCptSpec", into = "RawCptSpec")]
pub struct CptSpec {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    form: DistortionForm,
    c_plus: f64,
    c_minus: f64,
    reference_point: f64,
}

/// Wire format: field names are part of the CLI contract.
#[derive(Serialize, Deserialize)]
struct RawCptSpec {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    form: DistortionForm,
    c_plus: f64,
    c_minus: f64,
    reference_point: f64,
}

impl TryFrom<RawCptSpec> for CptSpec {
    type Error = PrefsError;
    fn try_from(r: RawCptSpec) -> Result<Self, Self::Error> {
        CptSpec::new(
            r.alpha,
            r.beta,
            r.gamma,
            r.delta,
            r.form,
            r.c_plus,
            r.c_minus,
            r.reference_point,
        )
    }
}

impl From<CptSpec> for RawCptSpec {
    fn from(s: CptSpec) -> Self {
        RawCptSpec {
            alpha: s.alpha,
            beta: s.beta,
            gamma: s.gamma,
            delta: s.delta,
            form: s.form,
            c_plus: s.c_plus,
            c_minus: s.c_minus,
            reference_point: s.reference_point,
        }
    }
}

fn check_exponent(name: &'static str, value: f64) -> Result<(), PrefsError> {
    if !(value > 0.0 && value <= 1.0) {
        return Err(PrefsError::ExponentOutOfRange { name, value });
    }
    Ok(())
}

impl CptSpec {
    /// Fully general constructor with strict validation.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        form: DistortionForm,
        c_plus: f64,
        c_minus: f64,
        reference_point: f64,
    ) -> Result<Self, PrefsError> {
        check_exponent("alpha", alpha)?;
        check_exponent("beta", beta)?;
        check_exponent("gamma", gamma)?;
        check_exponent("delta", delta)?;
        for (name, value) in [("c_plus", c_plus), ("c_minus", c_minus)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(PrefsError::ScaleOutOfRange { name, value });
            }
        }
        if form == DistortionForm::PurePower && (c_plus != 1.0 || c_minus != 1.0) {
            return Err(PrefsError::PowerFormScaled { c_plus, c_minus });
        }
        if !reference_point.is_finite() {
            return Err(PrefsError::BadReferencePoint(reference_point));
        }
        Ok(CptSpec {
            alpha,
            beta,
            gamma,
            delta,
            form,
            c_plus,
            c_minus,
            reference_point,
        })
    }

    /// Pure-power preferences with unit scales and zero reference point.
    pub fn power(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, PrefsError> {
        Self::new(alpha, beta, gamma, delta, DistortionForm::PurePower, 1.0, 1.0, 0.0)
    }

    /// Tversky-Kahneman preferences with zero reference point.
    pub fn tversky_kahneman(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        c_plus: f64,
        c_minus: f64,
    ) -> Result<Self, PrefsError> {
        Self::new(alpha, beta, gamma, delta, DistortionForm::TverskyKahneman, c_plus, c_minus, 0.0)
    }

    pub fn with_reference_point(mut self, reference_point: f64) -> Result<Self, PrefsError> {
        if !reference_point.is_finite() {
            return Err(PrefsError::BadReferencePoint(reference_point));
        }
        self.reference_point = reference_point;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn form(&self) -> DistortionForm {
        self.form
    }
    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }
    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }
    pub fn reference_point(&self) -> f64 {
        self.reference_point
    }

    /// Utility on gains: c_plus * x^alpha.
    pub fn utility_plus(&self, x: f64) -> Result<f64, PrefsError> {
        self.gain_side().utility(x)
    }

    /// Utility on losses: c_minus * x^beta, applied to the loss magnitude.
    pub fn utility_minus(&self, x: f64) -> Result<f64, PrefsError> {
        self.loss_side().utility(x)
    }

    /// Probability distortion on gains.
    pub fn distortion_plus(&self, p: f64) -> Result<f64, PrefsError> {
        self.gain_side().distortion(p)
    }

    /// Probability distortion on losses.
    pub fn distortion_minus(&self, p: f64) -> Result<f64, PrefsError> {
        self.loss_side().distortion(p)
    }

    /// The (utility, distortion) pair acting on the gains side.
    pub fn gain_side(&self) -> SidePrefs {
        SidePrefs {
            utility_scale: self.c_plus,
            utility_exponent: self.alpha,
            distortion_exponent: self.gamma,
            form: self.form,
        }
    }

    /// The (utility, distortion) pair acting on the losses side.
    pub fn loss_side(&self) -> SidePrefs {
        SidePrefs {
            utility_scale: self.c_minus,
            utility_exponent: self.beta,
            distortion_exponent: self.delta,
            form: self.form,
        }
    }
}

/// One side (gains or losses) of the preference pair. Also used standalone by
/// the inequality audits, where the exponents are not restricted to (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidePrefs {
    pub utility_scale: f64,
    pub utility_exponent: f64,
    pub distortion_exponent: f64,
    pub form: DistortionForm,
}

impl SidePrefs {
    /// Raw survival-power kit for audits: u(x) = x^b, w(p) = p^a.
    pub fn raw_power(utility_exponent: f64, distortion_exponent: f64) -> Self {
        SidePrefs {
            utility_scale: 1.0,
            utility_exponent,
            distortion_exponent,
            form: DistortionForm::PurePower,
        }
    }

    pub fn utility(&self, x: f64) -> Result<f64, PrefsError> {
        if x.is_nan() || x < 0.0 {
            return Err(PrefsError::NegativeArgument { name: "x", value: x });
        }
        Ok(self.utility_scale * x.powf(self.utility_exponent))
    }

    /// Inverse of the utility on [0, inf).
    pub fn utility_inverse(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        (y / self.utility_scale).powf(1.0 / self.utility_exponent)
    }

    pub fn distortion(&self, p: f64) -> Result<f64, PrefsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PrefsError::ProbabilityOutOfRange(p));
        }
        Ok(self.distortion_unchecked(p))
    }

    /// Distortion without the domain check; `p` must be in [0, 1].
    pub fn distortion_unchecked(&self, p: f64) -> f64 {
        let e = self.distortion_exponent;
        match self.form {
            DistortionForm::PurePower => p.powf(e),
            DistortionForm::TverskyKahneman => {
                if p == 0.0 {
                    return 0.0;
                }
                if p == 1.0 {
                    return 1.0;
                }
                // log-space: the denominator (p^e + (1-p)^e)^(1/e) overflows
                // for small e even though p^e itself cannot underflow.
                let lp = e * p.ln();
                let lq = e * (-p).ln_1p();
                let lw = lp - log_sum_exp(lp, lq) / e;
                lw.exp().clamp(0.0, 1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_spec(a: f64, b: f64, g: f64, d: f64) -> CptSpec {
        CptSpec::power(a, b, g, d).unwrap()
    }

    #[test]
    fn validation_is_strict() {
        assert!(CptSpec::power(0.0, 0.5, 0.5, 0.5).is_err());
        assert!(CptSpec::power(0.5, 1.2, 0.5, 0.5).is_err());
        assert!(CptSpec::power(0.5, 0.5, -0.1, 0.5).is_err());
        assert!(CptSpec::tversky_kahneman(0.88, 0.88, 0.61, 0.69, 0.0, 2.25).is_err());
        assert!(CptSpec::new(
            0.5,
            0.6,
            0.7,
            0.8,
            DistortionForm::PurePower,
            2.0,
            1.0,
            0.0
        )
        .is_err());
        assert!(CptSpec::power(1.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn utility_examples() {
        let s = power_spec(0.5, 0.5, 0.5, 0.5);
        assert_eq!(s.utility_plus(4.0).unwrap(), 2.0);

        let s = power_spec(1.0, 1.0, 1.0, 1.0);
        assert_eq!(s.utility_plus(7.3).unwrap(), 7.3);

        // independent high-precision exponentiation oracle
        let s = power_spec(0.88, 0.88, 0.61, 0.69);
        assert!((s.utility_plus(10.0).unwrap() - 7.585775750291838).abs() < 1e-13);

        assert!(s.utility_plus(-1.0).is_err());
        assert_eq!(s.utility_plus(0.0).unwrap(), 0.0);
        assert_eq!(s.utility_minus(0.0).unwrap(), 0.0);
    }

    #[test]
    fn distortion_examples() {
        let s = power_spec(0.5, 0.5, 0.5, 0.5);
        assert_eq!(s.distortion_plus(0.25).unwrap(), 0.5);

        let s = power_spec(1.0, 1.0, 1.0, 1.0);
        assert_eq!(s.distortion_plus(0.37).unwrap(), 0.37);

        // independent high-precision evaluation of the ratio formula
        let s = CptSpec::tversky_kahneman(0.88, 0.88, 0.61, 0.69, 1.0, 2.25).unwrap();
        assert!((s.distortion_plus(0.1).unwrap() - 0.18630256637717415).abs() < 1e-14);

        assert!(s.distortion_plus(1.5).is_err());
        assert!(s.distortion_plus(-0.1).is_err());
    }

    #[test]
    fn distortion_endpoints_exact_both_forms() {
        for form in [DistortionForm::PurePower, DistortionForm::TverskyKahneman] {
            for e in [0.05, 0.3, 0.61, 1.0] {
                let side = SidePrefs {
                    utility_scale: 1.0,
                    utility_exponent: 0.5,
                    distortion_exponent: e,
                    form,
                };
                assert_eq!(side.distortion(0.0).unwrap(), 0.0);
                assert_eq!(side.distortion(1.0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn tk_log_space_is_stable_for_tiny_exponent_and_probability() {
        let side = SidePrefs {
            utility_scale: 1.0,
            utility_exponent: 0.5,
            distortion_exponent: 0.003,
            form: DistortionForm::TverskyKahneman,
        };
        // naive evaluation overflows the denominator here
        let w = side.distortion(1e-12).unwrap();
        assert!(w.is_finite() && (0.0..=1.0).contains(&w), "w = {w}");
        let w = side.distortion(0.5).unwrap();
        assert!(w.is_finite() && (0.0..=1.0).contains(&w), "w = {w}");
    }

    #[test]
    fn monotonicity_on_grid() {
        let s = power_spec(0.7, 0.4, 0.6, 0.8);
        let mut prev_p = -1.0;
        let mut prev_m = -1.0;
        for i in 0..200 {
            let x = i as f64 * 0.11;
            let up = s.utility_plus(x).unwrap();
            let um = s.utility_minus(x).unwrap();
            assert!(up > prev_p);
            assert!(um > prev_m);
            prev_p = up;
            prev_m = um;
        }
    }

    #[test]
    fn concavity_on_grid() {
        let s = power_spec(0.7, 0.4, 0.6, 0.8);
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        for &x in &grid {
            for &y in &grid {
                if x >= y {
                    continue;
                }
                for &t in &[0.1, 0.25, 0.5, 0.75, 0.9] {
                    let mid = t * x + (1.0 - t) * y;
                    let lhs = s.utility_plus(mid).unwrap();
                    let rhs =
                        t * s.utility_plus(x).unwrap() + (1.0 - t) * s.utility_plus(y).unwrap();
                    assert!(lhs >= rhs - 1e-12, "x={x} y={y} t={t}");
                }
            }
        }
    }

    #[test]
    fn pure_power_overweights_small_probabilities() {
        for e in [0.2, 0.5, 0.8, 1.0] {
            let side = SidePrefs::raw_power(0.5, e);
            for i in 0..=100 {
                let p = i as f64 / 100.0;
                assert!(side.distortion(p).unwrap() >= p);
            }
        }
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let s = CptSpec::tversky_kahneman(0.88, 0.7, 0.61, 0.69, 1.5, 2.25)
            .unwrap()
            .with_reference_point(3.0)
            .unwrap();
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["form"], "tk");
        assert_eq!(j["alpha"], 0.88);
        assert_eq!(j["c_minus"], 2.25);
        assert_eq!(j["reference_point"], 3.0);
        let back: CptSpec = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);

        // invalid parameters are rejected at deserialization
        let bad = r#"{"alpha":1.5,"beta":0.5,"gamma":0.5,"delta":0.5,"form":"power","c_plus":1.0,"c_minus":1.0,"reference_point":0.0}"#;
        assert!(serde_json::from_str::<CptSpec>(bad).is_err());
    }
}
