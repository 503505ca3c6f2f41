//! Monte Carlo estimators and exhaustive enumeration oracles.

mod range;
mod traps;

pub use range::{counterexample_ratio, enumerate_range, mc_range, CounterexampleReport, RangeEstimate, ENUMERATION_BUDGET};
pub use traps::{
    default_window, named_particle, simulate_trap_field, survival_via_identity, CurvePoint, HoldingLaw, IdentityReport,
    ParticlePath, SurvivalEstimate, TrapReport, TrapSimConfig,
};
