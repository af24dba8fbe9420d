//! Phase sensing with cubic phase states.
//!
//! The crate is organized in layers:
//!
//! * [`fock`]: dense truncated-Fock numerics (states, gates, QFI, Wigner).
//! * [`analytic`]: closed-form population, QFI and optimal parameters.
//! * [`moments`]: nonlinear squeezing coefficients from moment matrices.
//! * [`noise`]: photon loss and Gaussian detection noise.
//! * [`protocols`]: approximate preparation schemes and sensitivity scans.
//! * [`verify`]: the self-check table used by the CLI and the test suite.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod moments;
pub mod noise;
pub mod protocols;
pub mod verify;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
