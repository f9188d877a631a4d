//! Number-phase Wigner function toolkit.
//!
//! Works on a truncated Fock space `|0⟩ … |D−1⟩`. The crate provides
//!
//! * elementary ladder, number and displacement operators ([`fock`]),
//! * the test states used throughout: number, coherent, coherent phase and
//!   thermal states ([`states`]),
//! * Susskind-Glogower phase operators and phase-only quantization ([`phase_ops`]),
//! * the number-phase Wigner function `ρ_W(φ, n)`, its marginals and the
//!   generalized Weyl map ([`npw`]),
//! * exact recovery of the density matrix from `ρ_W` ([`reconstruct`]),
//! * the Cahill-Glauber `W^(s)` family and its bridges to `ρ_W` ([`cahill_glauber`]).
//!
//! File formats live in [`io`], and [`verify`] bundles the end-to-end
//! invariant checks used by the `npw verify` command.

pub mod cahill_glauber;
mod dft;
pub mod error;
pub mod fock;
pub mod io;
pub mod npw;
pub mod phase_ops;
pub mod reconstruct;
pub mod special;
pub mod states;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, OperatorMatrix, StateVector, Truncation};
pub use tolerance::Tolerances;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
