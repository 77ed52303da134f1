//! Quantum discord of bipartite states.
//!
//! The crate computes the one-way discord `D(A|B)` of a state `ρ^AB` with
//! respect to measurements on `B` through four routes that coincide on
//! rank-1 projective measurements:
//!
//! * the conditional-entropy gap `S(A|B_C) − S(A|B)`,
//! * the gap between the measurement disturbance on `ρ^B` and on `ρ^AB`,
//! * the gap between the information gains on `ρ^B` and on `ρ^AB`,
//! * the gap between relative entropies of `ρ^AB` and `ρ^B` to their
//!   dephased versions.
//!
//! Every quantity that has two derivations is computed both ways, and
//! disagreement beyond [`IDENTITY_TOL`] is reported as an error.
//!
//! All entropies are in bits.

pub mod correlation;
pub mod error;
pub mod infotheory;
pub mod measurement;
pub mod optimizer;
pub mod qstate;

pub use correlation::{BalanceReport, Scope};
pub use error::{Error, Result};
pub use measurement::{ConditionedEnsemble, InstrumentClass, KrausInstrument};
pub use optimizer::{DiscordResult, Expression, MeasurementFamily, OptimizerConfig};
pub use qstate::{CMatrix, CVector, DensityOperator, PureStateVector, SubsystemLayout};

/// Tolerance for the information-theoretic identities.
pub const IDENTITY_TOL: f64 = 1e-9;
