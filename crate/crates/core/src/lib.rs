//! Solvers, constructions and certificates for the Gale–Berlekamp switching
//! game and its vector-valued (unimodular complex) variant.
//!
//! * [`tensor`]: shapes, sign and unimodular tensors, contraction primitives.
//! * [`classic`]: the ±1 light game, exact and heuristic.
//! * [`torus`]: norms over unimodular inputs, Khinchin/Steinhaus averages.
//! * [`constructions`]: Fourier matrices and the chained extremal tensor.
//! * [`bounds`]: closed-form bound constants and sandwich reports.
//! * [`format`]: the JSON tensor interchange document.
//! * [`game`]: stateful interactive games driven by the HTTP service.

pub mod bounds;
pub mod classic;
pub mod constructions;
pub mod error;
pub mod format;
pub mod game;
mod par;
pub mod tensor;
pub mod torus;

pub use error::{Error, Result};
pub use tensor::{AxisAssignment, Coefficients, Shape, SignTensor, Tensor, UnimodularTensor};

/// Seed used by every seeded operation when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 1;
