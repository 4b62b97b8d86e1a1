//! Extended-valued results of Choquet integration.
//!
//! A gains-side Choquet integral can be genuinely infinite (heavy tail against
//! a mild distortion), numerically enormous without an analytic certificate,
//! or plain finite. The three cases are kept distinct: infinity is only ever
//! reported when the analytic tail condition certifies it.

use serde::{Deserialize, Serialize};

/// Result of a Choquet integral or of the composite CPT value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtendedValue {
    /// A finite value.
    Finite { value: f64 },
    /// Certified infinite: the integrand decays like `y^(-e)` with `e <= 1`.
    /// `tail_exponent` is that integrand exponent.
    PosInfinite { tail_exponent: f64 },
    /// The computed estimate exceeded the divergence cutoff but the fitted
    /// tail exponent says the integral converges. The estimate is a lower
    /// bound; the exponent is attached as evidence.
    DivergenceSuspected { lower_bound: f64, tail_exponent: f64 },
}

impl ExtendedValue {
    pub fn finite(value: f64) -> Self {
        ExtendedValue::Finite { value }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite { .. })
    }

    pub fn is_pos_infinite(&self) -> bool {
        matches!(self, ExtendedValue::PosInfinite { .. })
    }

    /// The finite value, if this is the finite case.
    pub fn as_finite(&self) -> Option<f64> {
        match self {
            ExtendedValue::Finite { value } => Some(*value),
            _ => None,
        }
    }

    /// Finite value or the carried lower bound; +inf for the certified case.
    pub fn value_or_bound(&self) -> f64 {
        match self {
            ExtendedValue::Finite { value } => *value,
            ExtendedValue::PosInfinite { .. } => f64::INFINITY,
            ExtendedValue::DivergenceSuspected { lower_bound, .. } => *lower_bound,
        }
    }
}

impl std::fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedValue::Finite { value } => write!(f, "{value}"),
            ExtendedValue::PosInfinite { tail_exponent } => {
                write!(f, "+inf (tail exponent {tail_exponent})")
            }
            ExtendedValue::DivergenceSuspected { lower_bound, tail_exponent } => {
                write!(f, ">= {lower_bound} (suspected divergent, tail exponent {tail_exponent})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let v = ExtendedValue::finite(2.5);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"kind":"finite","value":2.5}"#);
        assert_eq!(serde_json::from_str::<ExtendedValue>(&s).unwrap(), v);

        let v = ExtendedValue::PosInfinite { tail_exponent: 0.8 };
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<ExtendedValue>(&s).unwrap(), v);
    }
}
