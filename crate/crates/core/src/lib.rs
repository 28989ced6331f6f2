//! Lower bounds on the error of frequency-extrapolated multipath channels,
//! and Monte-Carlo estimators to check them against.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: specular paths, planar arrays, channel frequency response.
//! - [`signal`]: root-raised-cosine training pulse, noisy array snapshots.
//! - [`estimators`]: least-squares estimation, SAGE path extraction,
//!   extrapolation and empirical MSE.
//! - [`bounds`]: Fisher information, full and closed-form lower bounds,
//!   separation diagnostics.
//! - [`pathset_io`]: path-set files and test scenarios.
//! - [`experiment`]: reproducible sweeps producing CSV curves and a manifest.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod linalg;
pub mod pathset_io;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
