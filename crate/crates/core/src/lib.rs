//! Stretched Brownian chains and their stochastic heat equation limit.
//!
//! A chain of `d + 1` particles with nearest-neighbour linear attraction,
//! left end pinned at `0`, right end pulled at speed `eps`, interior sites
//! driven by Brownian noise. After diffusive rescaling the chain
//! `Xi_d = Delta_d + Sigma_d` converges, on a common probability space, to
//! `X = D + S`, the solution of the stochastic heat equation with boundary
//! data `(0, 1 + eps t)` and initial profile `v`.
//!
//! Modules, bottom-up:
//!
//! - [`spectral`]: closed-form eigensystem of the discrete Laplacian.
//! - [`deterministic`]: the mean fields `Delta_d` and `D`.
//! - [`noise`] and [`stochastic`]: the shared Brownian family, OU coordinates,
//!   and the coupled fields `Sigma_d` and `S`.
//! - [`oracle`]: Euler-Maruyama integration of the raw chain.
//! - [`lab`]: sup-norm distances, variance bounds, tail checks and the
//!   convergence report.
//! - [`config`] and [`experiment`]: configuration files and the experiment
//!   runner behind the `chainlab` binary.

pub mod config;
pub mod deterministic;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod lab;
pub mod noise;
pub mod oracle;
pub mod spectral;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
pub use grid::{Field, FieldGrid, FieldKind};
pub use noise::BrownianDriver;
pub use spectral::SpectralBasis;
