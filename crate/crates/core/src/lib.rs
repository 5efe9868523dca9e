//! Optimal control of a thin liquid film flowing under a flexible substrate.
//!
//! The state `(h, mu, s)` evolves by a first-order IMEX scheme on P1 finite
//! elements ([`forward`]); the exact discrete adjoint of that scheme
//! ([`adjoint`]) supplies the reduced gradient `alpha f - r` used by a
//! backtracking gradient descent ([`optim`]) to find the substrate force `f`
//! that drives `h + beta s` to a target profile at the final time.

// NaN-rejecting `!(x > 0.0)` checks and index loops over coupled vectors are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adjoint;
pub mod energy;
pub mod error;
pub mod fem1d;
pub mod field;
pub mod forward;
pub mod optim;
pub mod potential;
pub mod runner;

pub use error::{Error, Result};
pub use field::{Field, SpaceTimeField};
