//! Torus grids, Lagrangian families, the discrete Legendre transform and the
//! stability bounds that size every downstream discretization.

pub mod bounds;
pub mod function;
pub mod grid;
pub mod lagrangian;
pub mod legendre;
pub mod stencil;

pub use bounds::{max_h_at_zero, stability_bounds, StabilityBounds};
pub use function::GridFunction;
pub use grid::{wrap_displacement, Offset, TorusGrid};
pub use lagrangian::{CosineMode, Family, KineticTable, LagrangianSpec, NodeTable, Potential};
pub use legendre::{legendre_transform, uniform_grid, Conjugate};
pub use stencil::{TauRule, VelocityStencil};

use crate::error::Result;

/// Build a torus grid; `dim` in {1, 2}, each axis with at least two nodes.
pub fn build_grid(dim: usize, sizes: &[usize]) -> Result<TorusGrid> {
    TorusGrid::new(dim, sizes)
}

/// Evaluate `L(x, v)`, rejecting velocities outside the Lagrangian's search box.
pub fn eval_lagrangian(spec: &LagrangianSpec, x: [f64; 2], v: [f64; 2]) -> Result<f64> {
    spec.lagrangian(x, v)
}
