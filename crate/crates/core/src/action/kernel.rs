use crate::error::{Error, Result};
use crate::models::{GridFunction, LagrangianSpec, TorusGrid, VelocityStencil};

/// Sparse one-step action graph.
///
/// Edge `e = x * degree + k` leaves node `x` along stencil offset `k` and costs
/// `τ · (L(x, v_k) + c)`, with `L` evaluated at the departure node.
#[derive(Clone, Debug)]
pub struct ActionKernel {
    grid: TorusGrid,
    stencil: VelocityStencil,
    shift: f64,
    lagrangian: Vec<f64>,
    cost: Vec<f64>,
    heads: Vec<u32>,
    /// `in_edges[x * degree + k]` is the edge arriving at `x` along offset `k`.
    in_edges: Vec<u32>,
}

pub fn build_kernel(
    grid: &TorusGrid,
    spec: &LagrangianSpec,
    stencil: &VelocityStencil,
    c: f64,
) -> Result<ActionKernel> {
    if spec.dim != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "spec dimension {} does not match grid dimension {}",
            spec.dim,
            grid.dim()
        )));
    }
    for axis in 0..grid.dim() {
        if 2 * stencil.radius >= grid.size(axis) {
            return Err(Error::InvalidStencil(format!(
                "radius {} wraps ambiguously on an axis with {} nodes",
                stencil.radius,
                grid.size(axis)
            )));
        }
    }
    let n = grid.len();
    let d = stencil.len();
    let mut lagrangian = Vec::with_capacity(n * d);
    let mut heads = Vec::with_capacity(n * d);
    for x in 0..n {
        let xc = grid.coords(x);
        for k in 0..d {
            lagrangian.push(spec.lagrangian(xc, stencil.velocity(k))?);
            heads.push(grid.shift(x, stencil.offset(k)) as u32);
        }
    }
    let mut in_edges = vec![0u32; n * d];
    for x in 0..n {
        for k in 0..d {
            let o = stencil.offset(k);
            let tail = grid.shift(x, [-o[0], -o[1]]);
            in_edges[x * d + k] = (tail * d + k) as u32;
        }
    }
    let tau = stencil.tau;
    let cost = lagrangian.iter().map(|l| tau * (l + c)).collect();
    Ok(ActionKernel {
        grid: *grid,
        stencil: stencil.clone(),
        shift: c,
        lagrangian,
        cost,
        heads,
        in_edges,
    })
}

impl ActionKernel {
    /// Same graph and Lagrangian values, costs recomputed for a new shift `c`.
    pub fn with_shift(&self, c: f64) -> ActionKernel {
        let tau = self.tau();
        ActionKernel {
            shift: c,
            cost: self.lagrangian.iter().map(|l| tau * (l + c)).collect(),
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn stencil(&self) -> &VelocityStencil {
        &self.stencil
    }

    pub fn tau(&self) -> f64 {
        self.stencil.tau
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn degree(&self) -> usize {
        self.stencil.len()
    }

    pub fn edges(&self) -> usize {
        self.cost.len()
    }

    pub fn edge(&self, tail: usize, k: usize) -> usize {
        tail * self.degree() + k
    }

    pub fn tail(&self, e: usize) -> usize {
        e / self.degree()
    }

    pub fn offset_index(&self, e: usize) -> usize {
        e % self.degree()
    }

    pub fn head(&self, e: usize) -> usize {
        self.heads[e] as usize
    }

    pub fn cost(&self, e: usize) -> f64 {
        self.cost[e]
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    /// `L(tail, v_k)` per unit time, without the shift.
    pub fn lagrangian(&self, e: usize) -> f64 {
        self.lagrangian[e]
    }

    pub fn lagrangians(&self) -> &[f64] {
        &self.lagrangian
    }

    /// Edges arriving at `x`, one per stencil offset.
    pub fn in_edges(&self, x: usize) -> &[u32] {
        let d = self.degree();
        &self.in_edges[x * d..(x + 1) * d]
    }

    pub fn self_edge(&self, x: usize) -> usize {
        self.edge(x, self.stencil.zero_index())
    }

    pub fn min_cost(&self) -> f64 {
        self.cost.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `max over edges (y → x) of u(x) − u(y) − cost(y → x)`; `<= tol` certifies a
/// discrete critical subsolution when the kernel carries the critical shift.
pub fn verify_subsolution(u: &GridFunction, kernel: &ActionKernel) -> f64 {
    let vals = u.values();
    (0..kernel.edges())
        .map(|e| vals[kernel.head(e)] - vals[kernel.tail(e)] - kernel.cost(e))
        .fold(f64::NEG_INFINITY, f64::max)
}
