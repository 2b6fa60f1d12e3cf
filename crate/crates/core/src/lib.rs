//! Exact and sampled computations for the loop O(n) model on finite domains
//! of `Z^d` and the hexagonal lattice: loop configurations and partition
//! functions, self-avoiding walk and polygon enumeration with pattern
//! statistics, threshold numerics, and a face-flip Monte Carlo sampler.

pub mod bounds;
pub mod cache;
pub mod enumerate;
pub mod error;
pub mod lattice;
pub mod loops;
pub mod mc;
pub mod saw;
pub mod scalar;
pub mod verify;

pub use enumerate::{EnumerationResult, Enumerator, LoopPolynomial};
pub use error::{Error, Result};
pub use lattice::{Domain, LatticeKind, Vertex};
pub use loops::LoopConfig;
pub use saw::{ObjectKind, Pattern, PatternStats, Polygon, SearchLimits, Walk};
pub use scalar::{ModelParams, Number, NumberMode, Scalar};

pub use num_rational::BigRational;
