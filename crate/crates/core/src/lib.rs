//! Steady-state linear response of Markovian open quantum systems.
//!
//! The crate builds Lindblad generators on Fock-truncated spaces, solves for
//! stationary states and their first-order corrections, and evaluates the
//! response function of an observable in several mutually equivalent forms.
//! An exact Gaussian solution of two coupled, separately damped oscillators
//! is included as a reference.

pub mod error;
pub mod gaussian;
pub mod grid;
pub mod linalg;
pub mod liouvillian;
pub mod operator;
pub mod response;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use operator::{DensityOperator, HilbertSpace, Operator};
