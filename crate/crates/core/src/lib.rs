//! Computational laboratory for mean values of multiplicative functions.
//!
//! The crate computes both sides of Halász-type mean value estimates for
//! multiplicative functions whose logarithmic derivative is dominated by
//! `κ·Λ(n)`, together with the surrounding machinery: Dirichlet characters,
//! exceptional character sets, the pretentious large sieve, prime counts in
//! short intervals and progressions, and numerical Perron integrals that check
//! the underlying convolution identities.
//!
//! Everything is desk scale: tables are dense and held in memory, and all
//! parallel reductions are performed in a fixed order so that results are
//! reproducible bit for bit.

pub mod characters;
pub mod dirichlet;
pub mod error;
pub mod halasz;
pub mod perron;
pub mod primes;
pub mod quadrature;
pub mod report;
pub mod sieve;

pub use error::{LabError, Result};
pub use num_complex::Complex64;

/// Crate version embedded in every report's provenance block.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
