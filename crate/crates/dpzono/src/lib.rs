//! Differentially private set-based state estimation with zonotopes.
//!
//! The library has four layers:
//!
//! - [`zonotope`]: exact zonotope algebra (linear maps, Minkowski sums,
//!   Cartesian products, Girard order reduction, planar membership).
//! - [`noise`]: truncated noise distributions for the additive privacy
//!   mechanism — grid construction, the tight privacy slack `delta`,
//!   utility loss, gradient-descent training of the stacked-sigmoid
//!   noise model, and the truncated-Laplace baseline.
//! - [`estimator`]: set-membership prediction and measurement
//!   correction with Frobenius-optimal fusion weights, plus the
//!   privacy-aware correction that widens each sensor's noise set by
//!   the noise range.
//! - [`sim`]: the circular-motion tracking experiment — plant
//!   simulation, measurement privatization, Monte-Carlo estimation
//!   runs, and `(epsilon, d)` sweeps with a truncated-Laplace
//!   comparison column.
//!
//! The `dpzono` binary exposes all of it on the command line.

pub mod error;
pub mod estimator;
pub mod noise;
pub mod sigfig;
pub mod sim;
pub mod zonotope;

pub use error::{Error, Result};
pub use zonotope::{IntervalBox, Zonotope};
