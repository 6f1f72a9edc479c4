//! Random phylogenetic tree shapes under the Ford alpha-model, the coupled
//! six-colour urn process, exact joint distributions of cherry and pitchfork
//! counts, and their limit laws.
//!
//! Four independent computational routes for the same pair of statistics
//! cross-check each other:
//!
//! * [`tree`] — explicit simulation of growing tree shapes,
//! * [`urn`] — the equivalent urn process plus limiting vectors and
//!   covariance matrices,
//! * [`exact`] — exact joint pmf by dynamic programming, moment recursions
//!   and closed forms,
//! * [`montecarlo`] — reproducible campaigns and statistical agreement tests
//!   among all of the above.
//!
//! [`numerics`] holds shared utilities: gamma-ratio products, bisection,
//! incomplete-gamma tails, and compensated arithmetic.

// Fixed-size matrix and vector code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod alpha;
mod error;
pub mod exact;
pub mod montecarlo;
pub mod numerics;
pub mod tree;
pub mod urn;

pub use alpha::Alpha;
pub use error::Error;
pub use exact::{JointPmf, MeanClosedForm, MomentTrace};
pub use montecarlo::{EmpiricalSummary, Engine, TrialConfig};
pub use tree::{EdgeColor, PairCounts, TreeShape};
pub use urn::{EigenSystem, LimitSummary, UrnState};
