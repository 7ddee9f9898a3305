//! Viscous shock layers for scalar conservation laws.
//!
//! The crate simulates u_t + A(u)_x = eps u_xx with strictly convex flux A
//! around an entropy-admissible shock (c_left > c_right), tracks the
//! entropy-dictated shift X(t), and measures how the squared L2 distance to
//! the shifted shock scales as eps -> 0. Modules:
//!
//! - [`model`]: convex flux/entropy models and the certified box constant
//! - [`profile`]: the steady viscous layer profile and layer initial data
//! - [`solver`]: Godunov + centered diffusion finite-volume stepper
//! - [`shift`]: the shift ODE integrated alongside the PDE
//! - [`diagnostics`]: weighted relative-entropy functionals and monitors
//! - [`experiments`]: case configs, rate sweeps, and report output

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod profile;
pub mod shift;
pub mod solver;

pub use error::{Error, Result};
pub use model::{EntropyModel, FluxModel, LambdaBox, ShockPair};
