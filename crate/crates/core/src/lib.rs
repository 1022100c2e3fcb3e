//! Explicit constant-degree quantum expanders.
//!
//! A D-regular superoperator is the uniform average of D unitary
//! conjugations, `G(X) = (1/D) sum_d U_d X U_d^dag`. This crate builds such
//! channels ([`channels`]), composes them by squaring, tensoring and the
//! Zig-Zag product ([`zigzag`]), measures their expansion parameter on the
//! traceless subspace ([`spectral`]) and runs the recursive construction with
//! certified bounds ([`construction`]).

pub mod channels;
pub mod construction;
pub mod error;
pub mod linalg;
pub mod spectral;
pub mod zigzag;

pub use channels::{MaximallyMixed, MixedUnitaryEnsemble};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, UnitaryMatrix};
pub use num_complex::Complex64;
pub use spectral::{Method, SpectralEstimate};
