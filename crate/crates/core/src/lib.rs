//! Pseudo-spectral simulation toolkit for the complex damped Klein-Gordon
//! equation on the 2-d torus,
//!
//! ```text
//!     eps^2 d_t^2 psi + 2 alpha d_t psi + (1 - Lap) psi + :psi^{n+1} conj(psi)^n: = 2 sqrt(Re alpha) dW/dt,
//! ```
//!
//! with space-time white noise, Wick-renormalized nonlinearity, and Galerkin
//! truncation to the Fourier modes `|k| <= N`. The crate provides
//!
//! * exact per-mode linear propagators and Ornstein-Uhlenbeck transitions,
//! * complex Hermite polynomials and Wick powers with the log-divergent
//!   renormalization constant,
//! * importance sampling for the truncated Gibbs ensemble,
//! * drivers measuring the parabolic (`eps -> 0`, complex Ginzburg-Landau)
//!   and real-damping (`Im alpha -> 0`) limit rates.
//!
//! All randomness is counter-based: a draw is a pure function of
//! `(seed, trajectory, step, mode, slot)`, so Monte-Carlo sweeps are
//! bit-reproducible under any parallel schedule.

pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod gibbs;
pub mod io;
mod linalg2;
pub mod noise;
pub mod nonlinear;
pub mod propagators;
pub mod spectral;
pub mod stats;
pub mod symbols;
pub mod wick;

pub use error::CoreError;
pub use noise::NoiseStream;
pub use spectral::{FrequencyLattice, PairState, SpectralField};
pub use symbols::ModelParams;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
