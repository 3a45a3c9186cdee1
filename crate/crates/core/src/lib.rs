//! Discrete weak KAM toolkit on flat tori.
//!
//! A convex, coercive Hamiltonian is discretized on a periodic grid through a
//! sparse one-step action graph ([`action::ActionKernel`]). On that graph the
//! crate solves the discounted equation by value iteration, computes the
//! Peierls barrier by min-plus powers, finds Mather measures as minimal
//! circulations, and checks that the discounted solutions `u_λ` converge to the
//! critical solution `u₀` selected by projected Mather measures.

// `!(x > 0.0)` guards deliberately reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod discounted;
pub mod error;
pub mod harness;
pub mod mather;
pub mod models;

pub use error::{Error, Result};
