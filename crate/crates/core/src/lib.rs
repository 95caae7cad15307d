//! Finite element / L1 solver for a time-fractional diffusion problem with a
//! local Laplacian and an integral fractional Laplacian on an interval.
//!
//! ```text
//! ∂_t^α (u − u₀) − u'' + (−Δ)^s u = f   on (a, b) × (0, T]
//! u = 0 outside (a, b)
//! ```

pub mod assembly;
pub mod cli;
pub mod config;
pub mod error;
pub mod fractional;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod mittag_leffler;
pub mod norms;
pub mod problem;
pub mod quadrature;
pub mod selftest;
pub mod study;
pub mod time_l1;

pub use assembly::AssembledOperators;
pub use error::{Error, Result};
pub use mesh::{prolongate, FemVector, Mesh};
pub use problem::{preset_a, preset_b, Datum, ProblemSpec};
pub use quadrature::QuadratureConfig;
pub use time_l1::{l1_weights, solve, L1Weights, SnapshotPolicy, Trajectory};
