//! Resonance and splitting analysis for a two-frequency vector `(1, Omega)` with `Omega` a
//! quadratic irrational in `(0, 1)`.
//!
//! The pipeline runs in layers:
//!
//! - [`exactnum`]: exact arithmetic in `Q(sqrt D)` and integer 2x2 matrices.
//! - [`cfq`]: periodic continued fractions, the period matrix `T`, the iteration matrix `U`
//!   and the eigenvalue `lambda`.
//! - [`resonance`]: quasi-resonant vectors, primary and secondary sequences and the
//!   separations `B0`, `B1`.
//! - [`envelope`]: the lower envelopes `h1`, `h2`, `h3` of the cosh curves, their corners
//!   and the dominant harmonics.
//! - [`melnikov`]: a Melnikov potential built from the dominant harmonics, its critical
//!   points and the size of the splitting.
//! - [`report`]: CSV, JSON and gnuplot artifacts used by the `splitlab` binary.
//!
//! ```
//! use splitlab::cfq::{build_spectral, PeriodicCf};
//! use splitlab::resonance::ResonanceCatalog;
//! use num_rational::BigRational;
//!
//! let cf: PeriodicCf = "per:3".parse().unwrap();
//! let sd = build_spectral(&cf).unwrap();
//! let mut cat = ResonanceCatalog::build(&sd, &BigRational::from_integer(4.into())).unwrap();
//! let sep = cat.separations().unwrap();
//! assert_eq!(sep.b0, BigRational::from_integer(3.into()));
//! assert_eq!(sep.q1, vec![2, 4]);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cfq;
pub mod envelope;
pub mod error;
pub mod exactnum;
pub mod melnikov;
pub mod report;
pub mod resonance;

pub use error::{Error, Result};
