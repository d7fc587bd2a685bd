//! Numerical laboratory for optical cat states heralded by free-electron
//! energy post-selection.
//!
//! A coherent optical mode scatters off a single free electron via
//! `S = exp(g a†b − g* a b†)`; projecting the electron onto ladder index `k`
//! leaves the light in a conditional state. The modules here build that
//! state, decompose it into interfering channels and characterize it
//! (Wigner negativity, cat fidelity, metrological power, loss and
//! coupling-noise robustness).

pub mod cat;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod interaction;
mod par;
pub mod phase_space;
pub mod special;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, LogCoefficient, OpticalState};
pub use num_complex::Complex64 as C64;
