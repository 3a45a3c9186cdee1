//! Jacobi value iteration for the discounted problem on the action graph.
//!
//! With `β = e^{−λτ}` and `θ = (1−β)/(λτ)`, one sweep is
//!
//! ```text
//! u(x) ← min over edges (y → x) of  θ · cost(y → x) + β · u(y)
//! ```
//!
//! i.e. the running cost `(1−β)/λ · (L + c)` of one step, with `L` taken at the
//! departure node so that the solver shares its graph and costs with the
//! barrier and the measure LP.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::ActionKernel;
use crate::error::{Error, Result};
use crate::harness::io;
use crate::models::GridFunction;

#[derive(Clone, Debug)]
pub struct DiscountedSolution {
    pub lambda: f64,
    pub tau: f64,
    pub shift: f64,
    pub values: GridFunction,
    /// Per node, the stencil index of the arriving edge attaining the minimum
    /// (lowest index on ties).
    pub policy: Vec<usize>,
    pub iterations: usize,
    /// Sup-norm change of the last sweep.
    pub residual: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub lambda: f64,
    pub tau: f64,
    pub shift: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub residual: f64,
    pub tol: f64,
    pub policy: Vec<usize>,
}

/// `β = e^{−λτ}`.
pub fn discount_factor(lambda: f64, tau: f64) -> f64 {
    (-lambda * tau).exp()
}

/// `θ = (1 − β)/(λτ)`, the weight turning a step cost into its discounted integral.
pub fn step_weight(lambda: f64, tau: f64) -> f64 {
    -(-lambda * tau).exp_m1() / (lambda * tau)
}

/// Arriving edges laid out per node with their weighted costs.
struct Sweep {
    degree: usize,
    tails: Vec<u32>,
    costs: Vec<f64>,
    beta: f64,
}

impl Sweep {
    fn new(kernel: &ActionKernel, lambda: f64) -> Self {
        let tau = kernel.tau();
        let theta = step_weight(lambda, tau);
        let n = kernel.nodes();
        let d = kernel.degree();
        let mut tails = Vec::with_capacity(n * d);
        let mut costs = Vec::with_capacity(n * d);
        for x in 0..n {
            for &e in kernel.in_edges(x) {
                tails.push(kernel.tail(e as usize) as u32);
                costs.push(theta * kernel.cost(e as usize));
            }
        }
        Self {
            degree: d,
            tails,
            costs,
            beta: discount_factor(lambda, tau),
        }
    }

    /// Fresh iterate from `prev`; returns the sup-norm change.
    fn apply(&self, prev: &[f64], next: &mut [f64]) -> f64 {
        let d = self.degree;
        next.par_iter_mut()
            .with_min_len(64)
            .enumerate()
            .map(|(x, out)| {
                let tails = &self.tails[x * d..(x + 1) * d];
                let costs = &self.costs[x * d..(x + 1) * d];
                let mut best = f64::INFINITY;
                for (t, c) in tails.iter().zip(costs) {
                    let v = c + self.beta * prev[*t as usize];
                    if v < best {
                        best = v;
                    }
                }
                *out = best;
                (best - prev[x]).abs()
            })
            .reduce(|| 0.0, f64::max)
    }

    fn policy(&self, u: &[f64]) -> Vec<usize> {
        let d = self.degree;
        (0..u.len())
            .into_par_iter()
            .with_min_len(64)
            .map(|x| {
                let mut best = f64::INFINITY;
                let mut arg = 0;
                for k in 0..d {
                    let v = self.costs[x * d + k] + self.beta * u[self.tails[x * d + k] as usize];
                    if v < best {
                        best = v;
                        arg = k;
                    }
                }
                arg
            })
            .collect()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "discount {lambda} must be positive and finite"
        )));
    }
    Ok(())
}

/// Value iteration from `u ≡ 0` until the sweep change is `<= tol · (1 − β)`.
pub fn solve_discounted(
    kernel: &ActionKernel,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DiscountedSolution> {
    solve_discounted_from(
        kernel,
        lambda,
        GridFunction::constant(kernel.nodes(), 0.0),
        tol,
        max_iter,
    )
}

/// Value iteration from an arbitrary initial guess.
pub fn solve_discounted_from(
    kernel: &ActionKernel,
    lambda: f64,
    init: GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<DiscountedSolution> {
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    if init.len() != kernel.nodes() {
        return Err(Error::InvalidArgument(
            "initial guess has the wrong length".into(),
        ));
    }
    let sweep = Sweep::new(kernel, lambda);
    let stop = tol * (1.0 - sweep.beta);
    let mut u = init.into_values();
    let mut next = vec![0.0; u.len()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        residual = sweep.apply(&u, &mut next);
        std::mem::swap(&mut u, &mut next);
        iterations += 1;
        if residual <= stop {
            let policy = sweep.policy(&u);
            return Ok(DiscountedSolution {
                lambda,
                tau: kernel.tau(),
                shift: kernel.shift(),
                values: GridFunction::new(u),
                policy,
                iterations,
                residual,
                tol,
            });
        }
    }
    Err(Error::NotConverged {
        iterations,
        residual,
    })
}

/// Exactly `sweeps` Jacobi sweeps from `init`: the discounted cost of the best
/// `sweeps`-step path ending at each node, plus `β^sweeps · init` at its start.
pub fn discounted_sweeps(
    kernel: &ActionKernel,
    lambda: f64,
    init: &GridFunction,
    sweeps: usize,
) -> Result<GridFunction> {
    check_lambda(lambda)?;
    let sweep = Sweep::new(kernel, lambda);
    let mut u = init.values().to_vec();
    let mut next = vec![0.0; u.len()];
    for _ in 0..sweeps {
        sweep.apply(&u, &mut next);
        std::mem::swap(&mut u, &mut next);
    }
    Ok(GridFunction::new(u))
}

impl DiscountedSolution {
    pub fn beta(&self) -> f64 {
        discount_factor(self.lambda, self.tau)
    }

    pub fn theta(&self) -> f64 {
        step_weight(self.lambda, self.tau)
    }

    /// Largest `|T u − u|` for the Bellman operator `T` of `kernel`.
    pub fn bellman_residual(&self, kernel: &ActionKernel) -> f64 {
        let sweep = Sweep::new(kernel, self.lambda);
        let mut next = vec![0.0; self.values.len()];
        sweep.apply(self.values.values(), &mut next)
    }

    pub fn meta(&self) -> SolutionMeta {
        SolutionMeta {
            lambda: self.lambda,
            tau: self.tau,
            shift: self.shift,
            nodes: self.values.len(),
            iterations: self.iterations,
            residual: self.residual,
            tol: self.tol,
            policy: self.policy.clone(),
        }
    }

    /// Binary value dump at `path` plus `<path>.json` metadata.
    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_f64_le(path, self.values.values())?;
        io::write_json(&io::sidecar_path(path), &self.meta())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::build_kernel;
    use crate::models::{LagrangianSpec, Potential, TorusGrid, VelocityStencil};

    fn kernel(n: usize, potential: Potential, c: f64) -> ActionKernel {
        let g = TorusGrid::new(1, &[n]).unwrap();
        let spec = LagrangianSpec::mechanical(1, potential);
        let st = VelocityStencil::new(&g, 0.25, 2.min((n - 1) / 2)).unwrap();
        build_kernel(&g, &spec, &st, c).unwrap()
    }

    #[test]
    fn weights_match_definitions() {
        let (l, t) = (0.3, 0.2);
        let b = discount_factor(l, t);
        assert!((step_weight(l, t) - (1.0 - b) / (l * t)).abs() < 1e-14);
        assert!((step_weight(1e-9, 0.1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_particle_is_zero() {
        let k = kernel(8, Potential::Zero, 0.0);
        let s = solve_discounted(&k, 0.5, 1e-12, 10_000).unwrap();
        assert_eq!(s.values.sup_norm(), 0.0);
        assert!(s.policy.iter().all(|&p| p == k.stencil().zero_index()));
    }

    #[test]
    fn pendulum_fixed_at_top() {
        let k = kernel(8, Potential::cosine(1.0, 1), 1.0);
        for lambda in [1.0, 0.1] {
            let s = solve_discounted(&k, lambda, 1e-12, 1_000_000).unwrap();
            assert_eq!(s.values.get(0), 0.0);
            assert!(s.values.min() >= 0.0);
            assert!(s.bellman_residual(&k) <= 1e-12 * (1.0 - s.beta()) * 1.0001);
        }
    }

    #[test]
    fn monotone_in_lambda() {
        let k = kernel(16, Potential::cosine(1.0, 1), 1.0);
        let a = solve_discounted(&k, 0.2, 1e-12, 1_000_000).unwrap();
        let b = solve_discounted(&k, 0.1, 1e-12, 1_000_000).unwrap();
        for x in 0..16 {
            assert!(b.values.get(x) >= a.values.get(x) - 2e-12);
        }
    }

    #[test]
    fn initial_guess_does_not_matter() {
        let k = kernel(16, Potential::cosine(1.0, 1), 1.0);
        let a = solve_discounted(&k, 0.3, 1e-10, 1_000_000).unwrap();
        let b = solve_discounted_from(&k, 0.3, GridFunction::constant(16, 100.0), 1e-10, 1_000_000)
            .unwrap();
        assert!(a.values.sup_distance(&b.values) <= 2e-10);
    }

    #[test]
    fn budget_exhaustion_reports_residual() {
        let k = kernel(16, Potential::cosine(1.0, 1), 1.0);
        // from u ≡ 0 the pendulum converges in finitely many sweeps; a
        // nonzero start has to decay geometrically at node 0
        match solve_discounted_from(&k, 0.001, GridFunction::constant(16, 1.0), 1e-12, 10) {
            Err(Error::NotConverged {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 10);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
