//! Exact and stochastic machinery for the one-dimensional nearest-neighbour
//! Ising chain at zero field.
//!
//! * [`numerics`]: Gaussian CDF, spin words and their binary-sort ranks.
//! * [`transfer`]: transfer-matrix spectra, partition functions, two-point
//!   correlations and the entropy-like two-point observables, together with
//!   brute-force enumeration oracles on finite rings and open chains.
//! * [`rgflow`]: the decimation coupling map, RG trajectories and the
//!   remainder series of the correlation and observable scaling equations.
//! * [`dynamics`]: the synchronous sign-threshold spin dynamics, its window
//!   transition matrices, exact finite-ring evolution and Monte Carlo.

pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod rgflow;
pub mod transfer;

pub use error::{Error, Result};
pub use numerics::Spin;
