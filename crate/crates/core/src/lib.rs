//! Classical toolkit for training parameterized IQP circuits on Ising
//! optimization problems.
//!
//! The ansatz is a diagonal Z/ZZ evolution applied to `|+>^N` followed by a
//! layer of single-qubit X rotations. All Hamiltonian expectation values,
//! gradients and the tangent-space Gram matrix have closed forms that cost
//! `O(N^3)` to evaluate, so the entire optimization runs on a classical
//! machine. A 1-layer QAOA optimum embeds exactly into the ansatz and serves
//! as the warm start; descent and imaginary-time (VarQITE) flows move from
//! there. An exact statevector simulator doubles as sampling backend and as
//! the ground-truth oracle that every analytic expression is tested against.

pub mod analytic;
pub mod error;
pub mod io;
pub mod ising;
pub mod optimize;
pub mod simulator;
pub mod thermal;

pub use error::{Error, Result};
