//! Link-level simulation toolkit for multi-antenna AFDM (affine frequency
//! division multiplexing).
//!
//! The crate builds the exact DAFT-domain channel of a doubly-selective
//! multipath channel, prunes it by per-element effective SNR into a
//! compressed-row matrix, and precodes with (preconditioned) conjugate
//! gradient on the regularized normal equations. Zero-forcing and randomized
//! Kaczmarz precoders are provided as baselines, and every solver reports the
//! real floating-point operations it performed.
//!
//! Module map:
//!
//! - [`afdm`]: DAFT matrix, AFDM modulation, chirp-parameter selection.
//! - [`qam`]: Gray-mapped square QAM.
//! - [`channel`]: per-path, per-link and MIMO DAFT-domain channel matrices,
//!   the time-domain oracle and noisy channel application.
//! - [`sparse`]: eSNR sparsification and sparse matrix-vector products.
//! - [`solvers`]: CG/PCG, ZF and Kaczmarz precoders.
//! - [`metrics`]: SINR, BER and analytic FLOP models.
//! - [`sim`]: Monte-Carlo sweeps, configuration and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afdm;
pub mod channel;
pub mod error;
pub mod io;
pub mod metrics;
pub mod qam;
pub mod sim;
pub mod solvers;
pub mod sparse;

pub use num_complex::Complex64;

pub use error::{Error, Result};

/// Dense complex column vector.
pub type ComplexVector = nalgebra::DVector<Complex64>;

/// Dense complex matrix with explicit row/column dimensions.
pub type ComplexMatrix = nalgebra::DMatrix<Complex64>;
