//! Non-linear image fusion with a joint variational osmosis model.
//!
//! Given a foreground `f`, a background `b` and an alpha map selecting where
//! each should dominate, [`solvers::ipiano_fuse`] jointly estimates a fused
//! image `u` and a guide image `v` by minimizing
//!
//! ```text
//! 1/2 sum v |grad(u/v)|^2 + mu/2 |v - f^alpha b^(1-alpha)|^2
//!     + gamma/2 sum alpha (u - f)^2 + eta sum H_eps(|grad v|)
//! ```
//!
//! The osmosis term only sees `u` through the ratio `u / v`, so the fusion
//! transfers structure while tolerating multiplicative brightness changes.
//! Linear osmosis and Poisson editing are provided in [`baselines`] for
//! comparison, and [`metrics`] measures chromaticity differences.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod error;
pub mod grid;
pub mod image;
pub mod io;
pub mod metrics;
pub mod model;
pub mod solvers;
pub mod synthetic;

pub use error::{FusionError, Result};
pub use grid::{ScalarField, VectorField};
pub use image::{AlphaMap, Image, ModelWeights};
