//! Contour dynamics for surface quasi-geostrophic sharp fronts.
//!
//! The boundary of a patch is carried as a closed curve sampled on a uniform
//! periodic grid. It moves with the nontangential boundary-integral velocity
//! plus a tangential correction `lambda * dx/dgamma` that keeps the
//! parametrization at constant speed. Alongside the stepper the crate computes
//! the quantities that govern well-posedness of the problem: the arc-chord
//! functional, the speed defect, fractional Sobolev and Hölder norms and the
//! tangential speed itself.

pub mod config;
pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod lambda;
pub mod reparam;
pub mod scenario;
pub mod spectral;
pub mod sum;

pub use config::SimConfig;
pub use curve::{ClosedCurve, Grid, PeriodicField, ScalarField, Vec2};
pub use diagnostics::DiagnosticsRecord;
pub use error::{Error, Result};
pub use evolve::{RunOutput, Termination};
pub use scenario::Scenario;
pub use spectral::SpectralCoeffs;
