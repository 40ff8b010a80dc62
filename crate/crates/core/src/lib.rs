//! Link-level toolkit for differential space-time modulation (DSTM) over
//! channels whose successive realizations are coupled by the joint
//! spatial-temporal correlation of a moving antenna array.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: small dense complex matrices plus the Bessel kernels
//!   (`J0`, complex `I0`) that the correlation model needs.
//! - [`channel`]: correlation-case classification, Toeplitz band matrix
//!   construction and the VAR(1) channel evolution.
//! - [`codebook`]: Hadamard initial matrix and cyclic unitary group codes,
//!   with differential encoding.
//! - [`receiver`]: conventional, correlation-aware and row-sliced
//!   differential decoders.
//! - [`analysis`]: equivalent SINR and pairwise-error-probability bounds
//!   (general two-band, single-band, high-SNR floor, Chernoff baseline).
//! - [`adaptive`]: block-length adaptation (exhaustive search, heuristic
//!   rule, velocity threshold).
//! - [`simkit`]: reproducible Monte Carlo SER sweeps with Wilson intervals.
//!
//! All of the math modules are generic over the scalar type through the
//! [`scalar::Scalar`] trait; concrete `f64` aliases live at the crate root.

pub mod adaptive;
pub mod analysis;
pub mod channel;
pub mod codebook;
pub mod numerics;
pub mod receiver;
pub mod scalar;
pub mod simkit;

pub use scalar::Scalar;

/// Default scalar type for simulation work.
pub type Real = f64;

pub type ComplexMatrix64 = numerics::ComplexMatrix<f64>;
pub type ComplexMatrix32 = numerics::ComplexMatrix<f32>;
pub type SystemConfig64 = channel::SystemConfig<f64>;
pub type MobilityState64 = channel::MobilityState<f64>;
pub type CorrelationSpec64 = channel::CorrelationSpec<f64>;
pub type CorrelationMatrix64 = channel::CorrelationMatrix<f64>;
pub type Codebook64 = codebook::Codebook<f64>;
pub type AdaptationPolicy64 = adaptive::AdaptationPolicy<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
