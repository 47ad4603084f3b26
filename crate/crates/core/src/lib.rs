//! Kalman filtering with a linearly reconfigurable observation matrix.
//!
//! At every filter step the observation matrix `C` is rebuilt from a small
//! parameter vector `a` through `vec(C) = G·a`, and `a` is chosen under the
//! power budget `‖C‖_F² ≤ P` to minimize either the sum or the maximum of
//! the filtered per-component MSEs.

pub mod error;
pub mod kalman;
pub mod matrix;
pub mod scalar;
pub mod sdp;
pub mod tracking;
pub mod vector;

pub use error::{Error, Result};
pub use matrix::CMat;
