//! Dynamics of a particle in a smoothed attractive power-law central field
//! `V(r) = -1/(r^2+eps^2)^{alpha/2}`.
//!
//! The crate covers the potential model and its energy and angular momentum
//! curves, coordinate changes into regularized collision coordinates, the
//! regularized flow with event detection, and the qualitative analysis built
//! on top of it: fixed points, orbit classes and flavor equivalence.

pub mod analysis;
pub mod coords;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod roots;

pub use error::{Error, Result};
pub use model::{AngularMomentum, EnergyLevel, Flavor, PotentialSpec};
