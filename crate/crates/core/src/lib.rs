//! Exact calculator and search engine for the mod-2 obstruction
//! r(n_1, ..., n_k; V) attached to (Z/2)^k-equivariant maps from a product
//! of spheres S^{n_1} x ... x S^{n_k} into a real representation V of the
//! same dimension, together with checkers for the derived Stiefel-manifold
//! statements.
//!
//! Parity 1 certifies that every equivariant map into V has a zero. Parity
//! 0 is always inconclusive: it does not produce a zero-free map.
//!
//! Module map:
//!
//! * [`repcore`] — characters of (Z/2)^k, representations, sphere dims,
//!   canonical memo keys.
//! * [`obstruction`] — the memoized peel recursion, derivation
//!   certificates, persistent cache format.
//! * [`oracles`] — independent verification: Lucas binomial parity, exact
//!   zero counting for the Gram witness map, peel-order cross-checking,
//!   closed-form families.
//! * [`stiefel`] — target builders and condition checkers for the
//!   Stiefel-manifold theorems.
//! * [`cli`] — the `obstructor` command-line front end.

pub mod cli;
pub mod error;
pub mod obstruction;
pub mod oracles;
pub mod repcore;
pub mod stiefel;

pub use error::{Error, Result};
