//! Exact and statistical verification of range monotonicity for random walks
//! with inserted deterministic jumps, and of the Pascal principle for a
//! particle among mobile traps.
//!
//! The crate is organized by concern:
//!
//! * [`kernels`]: increment laws, exact `n`-step kernels, kernel conditions;
//! * [`perturb`]: insertion paths, trap trajectories and two-trap fields;
//! * [`engine`]: exact survival-field dynamic programming and its checks;
//! * [`coupling`]: the coordinate coupling of two simple random walks;
//! * [`montecarlo`]: range estimators and the continuous-time trap field;
//! * [`cli`]: the command-line front end behind the `walkrange` binary.

pub mod cli;
pub mod coupling;
pub mod engine;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod montecarlo;
pub mod numeric;
pub mod perturb;
pub mod seeding;

pub use error::{Error, Result};
pub use lattice::Site;
pub use numeric::{Precision, Value};
