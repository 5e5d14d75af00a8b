//! Radial numerics for the three-dimensional inhomogeneous nonlinear
//! Schrödinger equation with a potential,
//!
//! ```text
//! i u_t + Delta u - V u = kappa |x|^{-b} |u|^alpha u,   kappa = +1 / -1,
//! ```
//!
//! covering ground states and their sharp constants, split-step evolution,
//! the virial/Morawetz functionals, and threshold classification.
//!
//! All numerical types are generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod classifier;
pub mod error;
pub mod evolution;
pub mod exponents;
pub mod functionals;
pub mod ground_state;
mod ode;
pub mod params;
pub mod potentials;
pub mod radial;
pub mod scalar;
mod special;

pub use error::{Error, Result};
pub use ground_state::{solve_ground_state, GroundState, ShootingOptions};
pub use params::{ModelParams, Nonlinearity};
pub use potentials::{builtin, Potential};
pub use radial::{build_grid, RadialField, RadialGrid, SineWorkspace};
pub use scalar::Real;

pub type Grid = RadialGrid<f64>;
pub type Field = RadialField<f64>;
pub type Params = ModelParams<f64>;
