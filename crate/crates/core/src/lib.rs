//! Truncated-dimension white-noise calculus.
//!
//! The crate realizes, at finite truncation, a base Gelfand triple of
//! weighted sequence spaces, its Fock spaces of symmetric chaos kernels, an
//! exotic frame of Weyl-type exponential sums orthonormal for a Cesàro-mean
//! inner product, the embedding of exotic Fock vectors into base
//! coordinates, Gross and exotic (Lévy-type) Laplacians, and the explicit
//! heat semigroup of the exotic Gross Laplacian.
//!
//! Indices are 0-based throughout the Rust API (`GradedVector::unit(d, 0)`
//! is the first basis vector). Serialized records use 1-based indices.

pub mod cesaro;
pub mod embedding;
pub mod error;
pub mod exotic_basis;
pub mod fock_space;
pub mod graded_space;
pub mod heat_flow;
pub mod laplacians;
pub mod multi_index;
pub mod numerics;
pub mod par;
pub mod symmetric_tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
