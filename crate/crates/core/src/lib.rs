//! Dynamics of the pendulum with periodically varying length.
//!
//! * [`model`]: equations of motion, excitation, coordinate changes.
//! * [`integrate`]: adaptive Dormand–Prince integration with dense output.
//! * [`floquet`]: monodromy stability of the lower equilibrium and the
//!   closed-form half-cone instability tongues.
//! * [`averaging`]: slow-flow system, frequency response of the limit
//!   cycle, and steady rotation predictors.
//! * [`diagnostics`]: rotation numbers, Lyapunov exponents, attractor
//!   classification, and parameter/basin scans.

pub mod averaging;
pub mod diagnostics;
pub mod error;
pub mod floquet;
pub mod grid;
pub mod integrate;
pub mod model;

pub use error::{Error, Result};
pub use integrate::IntegratorConfig;
pub use model::{DimensionlessParams, Excitation, Pendulum, PhysicalParams, QState, State};

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
