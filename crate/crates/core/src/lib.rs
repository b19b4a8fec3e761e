//! Spectrum, exceptional points and collapse-point bound states of the
//! anisotropic two-photon quantum Rabi model
//!
//! ```text
//! H = Δ/2 σz + a†a + g [(a†)² σ- + σ+ a²] + r g [(a†)² σ+ + σ- a²]
//! ```
//!
//! The crate is `no_std` (with `alloc`) and split by concern:
//!
//! * [`model`]: parameters, the Bogoliubov frame and closed-form quantities
//!   (collapse coupling, critical splittings, pole lines, crossing points).
//! * [`recurrence`]: raw and rescaled coefficient recurrences, collapse-point
//!   coefficients and asymptotic diagnostics.
//! * [`gfunction`]: the regular and exceptional G-functions and the
//!   degeneracy function `F_n(g)`.
//! * [`spectrum`]: pole-bracketed level finding, degenerate points, bound
//!   state counting via exceptional zeros.
//! * [`fock`]: truncated Fock-space exact diagonalization used as an
//!   independent oracle, RWA closed forms and positivity checks.
//! * [`collapse`]: the position-dependent-mass eigenproblem at `g = g_c`
//!   and the integral criteria for the number of bound states.
//!
//! All numerics are pure functions of their inputs.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod collapse;
pub mod error;
pub mod fock;
pub mod gfunction;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod recurrence;
pub mod roots;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{BargmannIndex, BogoliubovFrame, Coupling, ModelParams, Parity};
pub use scalar::{NeumaierSum, Scalar};
