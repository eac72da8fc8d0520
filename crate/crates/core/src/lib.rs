//! Quasi-local operators on finite bounded-geometry metric spaces.
//!
//! The crate measures propagation and ε-propagation of sparse operators on
//! ℓ^p(X; ℂ^k), builds finite-propagation approximants from partitions of
//! unity, and runs the localisation and sparsification machinery that
//! controls those approximants. Every inequality the constructions rely on
//! is exposed as a checkable quantity rather than assumed.
//!
//! ```
//! use std::sync::Arc;
//! use coarse_op::{Exponent, LpOperator, MetricSpace, SpaceSpec};
//!
//! let space = Arc::new(MetricSpace::build(&SpaceSpec::Path { n: 4 }).unwrap());
//! let b = LpOperator::random_band(space, Exponent::TWO, 1, 1.0, 1.0, 1.0, 7).unwrap();
//! assert!(b.propagation() <= 1.0);
//! let est = b.opnorm(1e-10);
//! assert!(est.lower <= est.upper);
//! ```

pub mod approx;
pub mod error;
pub mod exponent;
pub mod linalg;
pub mod locality;
pub mod lp_op;
pub mod pou;
pub mod space;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use linalg::{NormEstimate, NormMethod, SparseMatrix, C64};
pub use lp_op::{
    BoundTag, CommutBound, EpsMode, EpsPropagation, LpOperator, ProfileEntry, QuasiLocalityProfile, ScalarFunction,
};
pub use space::{MetricSpace, SpaceSpec, Subset};
