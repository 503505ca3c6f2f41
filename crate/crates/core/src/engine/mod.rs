//! Exact dynamic programming for survival fields and the checks built on it.

mod decomposition;
mod domination;
mod pascal;
mod survival;

pub use decomposition::{
    verify_decomposition, verify_w_recursion, DecompositionReport, DecompositionRow, WRecursionReport, WRecursionRow,
};
pub use domination::{check_sym_domination, domination_chain, DominationReport, DominationVerdict};
pub use pascal::{range_via_hits, verify_pascal, PascalReport, PascalRow};
pub use survival::{
    covering_trajectory, evolve_survival, evolve_with, hit_mass, hit_series, moreau_engine, resolve_precision,
    window_radius, EngineOptions, HitSeries, KilledMass, SurvivalField, SurvivalRun, TrapModel,
};
