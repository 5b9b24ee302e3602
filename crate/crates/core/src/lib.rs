//! Finite-dimensional K-g-frames.
//!
//! A family of operators `Λ_j : C^n -> C^{d_j}` is a K-g-frame for a square
//! operator `K` when `A ||K* f||² <= Σ ||Λ_j f||² <= B ||f||²` for all `f`.
//! This crate computes the optimal constants, classifies systems, builds
//! exact and approximate K-g-duals, reconstructs vectors of `R(K)` by Neumann
//! series and decides which subfamilies survive erasures.
//!
//! ```
//! use kgframe::constructions::example2;
//!
//! let ksys = example2(6).unwrap();
//! let bounds = ksys.optimal_bounds();
//! assert!((bounds.kg_lower_opt.unwrap() - 1.0).abs() < 1e-10);
//! assert!((bounds.bessel_upper_opt - 1.0).abs() < 1e-10);
//! ```

pub mod constructions;
pub mod duals;
pub mod error;
pub mod gsystem;
pub mod linops;
pub mod random;
pub mod redundancy;

pub use error::{Error, Result};
pub use gsystem::{
    BlockSequence, BoundReport, Classification, FrameClass, GSystem, KGSystem, Tolerances,
};
pub use linops::{Operator, Scalar, Vector};
