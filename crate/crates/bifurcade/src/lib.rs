//! Dynamic bifurcation analysis for evolution equations in spectral
//! Galerkin form.
//!
//! The toolkit covers the pipeline from a finite mode system
//! `u_t + L_lambda u = g_lambda(u)` to its global bifurcation picture:
//!
//! - [`model`]: spectral Galerkin models (the built-in 1D Cahn-Hilliard
//!   family and custom diagonal models), vector fields, Jacobians, the
//!   Lyapunov functional and a reference time integrator;
//! - [`spectrum`]: eigenvalue crossings of the lambda-parametrized linear
//!   part, crossing numbers, unstable dimensions, spectral gaps;
//! - [`center_manifold`]: polynomial slave graphs and reduced equations at
//!   a crossing;
//! - [`conley`]: isolating blocks, relative cubical homology, and the
//!   wedge/suspension algebra of homology Conley indices;
//! - [`bifurcation`]: attractor/repeller classification on the center
//!   manifold, bifurcating invariant sets (equilibria and invariant
//!   spheres), and index nontriviality;
//! - [`continuation`]: pseudo-arclength branch tracing with the global
//!   termination alternatives, plus heteroclinic probes ordered by the
//!   Lyapunov functional;
//! - [`cli`]: the pipeline front end used by the `bifurcade` binary.
//!
//! Start with the `examples/` directory: each example exercises one major
//! capability end to end.

pub mod bifurcation;
pub mod center_manifold;
pub mod cli;
pub mod conley;
pub mod continuation;
pub mod error;
pub mod model;
pub mod poly;
pub mod spectrum;

pub use error::{Error, Result};
