//! Minimizing closed measures as a linear program over edge weights.
//!
//! Variables are the edges of the action graph; rows are flow conservation
//! at every node but the last (that row is implied by the others) and unit
//! total mass. The crash basis — a BFS spanning tree of the graph plus the
//! cheapest self-loop carrying all mass — is feasible, so no phase one runs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::measure::{closedness_residual, OccupationMeasure};
use super::simplex::{solve_from, Basis, LinearProgram, SimplexOptions};
use crate::action::ActionKernel;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MatherSolveResult {
    pub measure: OccupationMeasure,
    /// `Σ m L`, the negated discrete critical value.
    pub value: f64,
    pub support: Vec<usize>,
    /// `(node, μ(node))` for nodes with positive projected mass.
    pub projected: Vec<(usize, f64)>,
    pub closedness: f64,
    pub mass: f64,
    pub iterations: usize,
    /// Optimal basis, reused to warm-start the per-target limit LPs.
    pub basis: Basis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatherSummary {
    pub value: f64,
    pub support: Vec<usize>,
    pub projected: Vec<(usize, f64)>,
    pub closedness: f64,
    pub mass: f64,
    pub iterations: usize,
}

impl MatherSolveResult {
    pub fn summary(&self) -> MatherSummary {
        MatherSummary {
            value: self.value,
            support: self.support.clone(),
            projected: self.projected.clone(),
            closedness: self.closedness,
            mass: self.mass,
            iterations: self.iterations,
        }
    }
}

/// Constraint matrix of the closed-measure polytope, with `L` as cost.
pub fn mather_program(kernel: &ActionKernel) -> LinearProgram {
    let n = kernel.nodes();
    let mass_row = (n - 1) as u32;
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut lp = LinearProgram::new(rhs);
    for e in 0..kernel.edges() {
        let (t, h) = (kernel.tail(e), kernel.head(e));
        let mut col = Vec::with_capacity(3);
        if t != h {
            if h < n - 1 {
                col.push((h as u32, 1.0));
            }
            if t < n - 1 {
                col.push((t as u32, -1.0));
            }
        }
        col.push((mass_row, 1.0));
        col.sort_by_key(|p| p.0);
        lp.add_column(col, kernel.lagrangian(e));
    }
    lp
}

/// Spanning tree plus the self-loop with the smallest `L` (lowest node on ties).
///
/// The tree is the shortest-path tree from that self-loop's node for the
/// weights `L − L_loop`; its potentials then price every edge correctly
/// whenever no cycle beats the loop (the optimum is reached without a pivot).
/// When a cheaper cycle exists the weights admit a negative cycle and a BFS
/// tree from node 0 is used instead.
pub fn crash_basis(kernel: &ActionKernel) -> Result<Vec<usize>> {
    let n = kernel.nodes();
    let best_loop = (0..n)
        .map(|x| kernel.self_edge(x))
        .min_by(|a, b| {
            kernel
                .lagrangian(*a)
                .total_cmp(&kernel.lagrangian(*b))
                .then(a.cmp(b))
        })
        .expect("nonempty grid");
    let mut tree = shortest_path_tree(kernel, kernel.tail(best_loop), kernel.lagrangian(best_loop))
        .map_or_else(|| bfs_tree(kernel), Ok)?;
    tree.push(best_loop);
    Ok(tree)
}

fn bfs_tree(kernel: &ActionKernel) -> Result<Vec<usize>> {
    let n = kernel.nodes();
    let d = kernel.degree();
    let mut seen = vec![false; n];
    let mut tree = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for k in 0..d {
            let e = kernel.edge(x, k);
            let y = kernel.head(e);
            if !seen[y] {
                seen[y] = true;
                tree.push(e);
                queue.push_back(y);
            }
        }
    }
    if tree.len() != n - 1 {
        return Err(Error::Infeasible("action graph is not connected".into()));
    }
    Ok(tree)
}

/// Bellman–Ford from `root` with weights `L − offset`; `None` on a negative
/// cycle or an unreachable node. Tree edges are listed by head node.
fn shortest_path_tree(kernel: &ActionKernel, root: usize, offset: f64) -> Option<Vec<usize>> {
    let n = kernel.nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    dist[root] = 0.0;
    let mut changed = true;
    let mut rounds = 0;
    while changed {
        if rounds == n {
            return None;
        }
        changed = false;
        for x in 0..n {
            for &e in kernel.in_edges(x) {
                let e = e as usize;
                let t = kernel.tail(e);
                if t == x || !dist[t].is_finite() {
                    continue;
                }
                let cand = dist[t] + (kernel.lagrangian(e) - offset);
                // strict improvement keeps the predecessor graph a tree
                if cand < dist[x] - 1e-14 * (1.0 + dist[x].abs().min(cand.abs())) {
                    dist[x] = cand;
                    pred[x] = e;
                    changed = true;
                }
            }
        }
        rounds += 1;
    }
    if dist[root] < 0.0 || pred[root] != usize::MAX {
        return None;
    }
    let tree: Vec<usize> = (0..n).filter(|&x| x != root).map(|x| pred[x]).collect();
    (tree.iter().all(|&e| e != usize::MAX)).then_some(tree)
}

pub fn solve_mather_lp(kernel: &ActionKernel, opts: &SimplexOptions) -> Result<MatherSolveResult> {
    if kernel.nodes() < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let lp = mather_program(kernel);
    let basis = Basis::factorize(&lp, crash_basis(kernel)?)?;
    let sol = solve_from(&lp, basis, opts)?;
    let measure = OccupationMeasure::from_edges(
        kernel,
        sol.x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(e, &v)| (e, v)),
    );
    let projected = measure
        .projected()
        .into_iter()
        .enumerate()
        .filter(|(_, m)| *m > 0.0)
        .collect();
    Ok(MatherSolveResult {
        value: measure.value(kernel),
        support: measure.support(),
        projected,
        closedness: closedness_residual(&measure, kernel),
        mass: measure.mass(),
        iterations: sol.iterations,
        basis: sol.basis,
        measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::build_kernel;
    use crate::mather::karp::min_mean_cycle;
    use crate::models::{LagrangianSpec, Potential, TorusGrid, VelocityStencil};

    fn kernel(spec: LagrangianSpec, sizes: &[usize], tau: f64, k: usize) -> ActionKernel {
        let g = TorusGrid::new(sizes.len(), sizes).unwrap();
        let st = VelocityStencil::new(&g, tau, k).unwrap();
        build_kernel(&g, &spec, &st, 0.0).unwrap()
    }

    #[test]
    fn pendulum_dirac_at_top() {
        let k = kernel(
            LagrangianSpec::mechanical(1, Potential::cosine(1.0, 1)),
            &[16],
            0.25,
            3,
        );
        let r = solve_mather_lp(&k, &SimplexOptions::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert_eq!(r.projected.len(), 1);
        assert_eq!(r.projected[0].0, 0);
        assert!(r.closedness <= 1e-9);
    }

    #[test]
    fn agrees_with_karp_off_equilibrium() {
        // transport with a non-representable drift: the optimum is a winding cycle
        let spec = LagrangianSpec::transport(1, [0.7, 0.0], Potential::cosine(0.3, 1));
        let k = kernel(spec, &[12], 0.25, 3);
        let r = solve_mather_lp(&k, &SimplexOptions::default()).unwrap();
        let c = min_mean_cycle(&k);
        assert!(
            (r.value - c.mean).abs() <= 1e-8,
            "{} vs {}",
            r.value,
            c.mean
        );
        assert!(r.closedness <= 1e-9);
        assert!((r.mass - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn two_dimensional_program() {
        let spec = LagrangianSpec::mechanical(2, Potential::cosine(1.0, 1));
        let k = kernel(spec, &[6, 6], 0.25, 1);
        let r = solve_mather_lp(&k, &SimplexOptions::default()).unwrap();
        let c = min_mean_cycle(&k);
        assert!((r.value - c.mean).abs() <= 1e-8);
    }
}
