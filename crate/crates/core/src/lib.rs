//! Quadratic twists of modular-form L-functions, their low-lying zeros and
//! central values, and the matching eigenvalue statistics of Haar-random
//! matrices from U(N), SO(2N) and USp(2N).
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`]: Kronecker symbols, fundamental discriminants, twist families
//!   and functional-equation signs.
//! - [`newforms`]: integer Fourier coefficients for the six newforms used
//!   throughout, from eta products, theta series, or a coefficient file.
//! - [`lfunc`]: completed twisted L-functions via the approximate functional
//!   equation, the Hardy Z-function, low-lying zeros, central values.
//! - [`shimura`]: half-integral-weight theta lifts, Kohnen-Zagier central
//!   value formula and the discretization threshold.
//! - [`ensembles`]: Haar sampling of the three compact groups, eigenphases,
//!   characteristic polynomial at 1, the excised orthogonal ensemble.
//! - [`stats`]: matrix-size dictionary, empirical distributions, CDF
//!   discrepancy, and the excised-cutoff search.
//!
//! Everything is double precision. Discriminant sweeps are embarrassingly
//! parallel; random sampling is reproducible because each draw index owns its
//! own counter-derived RNG stream.

pub mod arith;
pub mod ensembles;
pub mod error;
pub mod lfunc;
pub mod newforms;
pub mod shimura;
pub mod special;
pub mod stats;

pub use arith::FundamentalDiscriminant;
pub use error::{Error, Result};
pub use newforms::Newform;
