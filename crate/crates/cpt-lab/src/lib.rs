//! Numerical laboratory for behavioural portfolio choice under cumulative
//! prospect theory: Choquet evaluation of distorted payoff functionals,
//! well-posedness classification of the piecewise-power preference
//! parameters, explicit diverging witness sequences for the ill-posed
//! regimes, numerical audits of the supporting inequality estimates, and a
//! derivative-free search for high-value budget-feasible payoffs in a
//! log-normal pricing-kernel market.

pub mod audit;
pub mod choquet;
pub mod law;
pub mod market;
pub mod math;
pub mod optimizer;
pub mod prefs;
pub mod regime;
pub mod value;
pub mod witness;

pub use choquet::{
    choquet_minus, choquet_plus, cpt_value, truncation_level, ChoquetError, EngineConfig,
};
pub use law::{Atom, AtomLaw, Law, LawError, Measure, PowerTail, QuantileLaw};
pub use market::{
    kernel_law, sample_joint, solve_market_price_of_risk, verify_assumptions, KernelModel,
    MarketError, MarketSpec,
};
pub use prefs::{CptSpec, DistortionForm, PrefsError, SidePrefs};
pub use regime::{classify, Cause, RegimeVerdict, Verdict};
pub use value::ExtendedValue;
