use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::action::ActionKernel;
use crate::error::Result;
use crate::harness::io;
use crate::models::GridFunction;

/// Discrete closed-measure candidate: nonnegative weights on edges of an
/// action graph, stored sparsely in ascending edge order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OccupationMeasure {
    /// Number of stencil offsets per node (edge `e = tail * degree + k`).
    pub degree: usize,
    pub nodes: usize,
    weights: Vec<(usize, f64)>,
}

impl OccupationMeasure {
    /// Collects `(edge, weight)` pairs, summing repeats and dropping zeros.
    pub fn from_edges(
        kernel: &ActionKernel,
        pairs: impl IntoIterator<Item = (usize, f64)>,
    ) -> Self {
        let mut w: Vec<(usize, f64)> = pairs.into_iter().collect();
        w.sort_by_key(|p| p.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(w.len());
        for (e, m) in w {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += m,
                _ => merged.push((e, m)),
            }
        }
        merged.retain(|p| p.1 != 0.0);
        Self {
            degree: kernel.degree(),
            nodes: kernel.nodes(),
            weights: merged,
        }
    }

    /// Uniform unit mass on the edges of a cycle.
    pub fn uniform_cycle(kernel: &ActionKernel, edges: &[usize]) -> Self {
        let w = 1.0 / edges.len() as f64;
        Self::from_edges(kernel, edges.iter().map(|&e| (e, w)))
    }

    pub fn weights(&self) -> &[(usize, f64)] {
        &self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights.iter().map(|p| p.0).collect()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().map(|p| p.1).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ m · L` with `L` per unit time (no shift).
    pub fn value(&self, kernel: &ActionKernel) -> f64 {
        self.weights
            .iter()
            .map(|&(e, m)| m * kernel.lagrangian(e))
            .sum()
    }

    /// Scales to unit mass.
    pub fn normalized(&self) -> Self {
        let s = self.mass();
        Self {
            weights: self.weights.iter().map(|&(e, m)| (e, m / s)).collect(),
            ..self.clone()
        }
    }

    /// Projected measure `μ(y) = Σ_k m(y, k)` on nodes.
    pub fn projected(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.nodes];
        for &(e, m) in &self.weights {
            mu[e / self.degree] += m;
        }
        mu
    }

    /// Nodes carrying positive projected mass, ascending.
    pub fn projected_support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.weights.iter().map(|p| p.0 / self.degree).collect();
        s.dedup();
        s
    }

    /// `∫ u dμ` against the projected measure.
    pub fn integrate(&self, u: &GridFunction) -> f64 {
        self.weights
            .iter()
            .map(|&(e, m)| m * u.get(e / self.degree))
            .sum()
    }

    /// Per-node inflow minus outflow.
    pub fn imbalance(&self, kernel: &ActionKernel) -> Vec<f64> {
        let mut r = vec![0.0; self.nodes];
        for &(e, m) in &self.weights {
            r[kernel.head(e)] += m;
            r[kernel.tail(e)] -= m;
        }
        r
    }

    /// `(tail, offset index, weight)` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_csv(
            path,
            &["tail", "offset", "weight"],
            self.weights.iter().map(|&(e, m)| {
                vec![
                    (e / self.degree).to_string(),
                    (e % self.degree).to_string(),
                    io::fmt_f64(m),
                ]
            }),
        )
    }
}

/// `max_x |inflow(x) − outflow(x)|`.
pub fn closedness_residual(measure: &OccupationMeasure, kernel: &ActionKernel) -> f64 {
    measure
        .imbalance(kernel)
        .iter()
        .fold(0.0, |a, r| a.max(r.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::build_kernel;
    use crate::models::{LagrangianSpec, Potential, TorusGrid, VelocityStencil};

    fn kernel() -> ActionKernel {
        let g = TorusGrid::new(1, &[8]).unwrap();
        let spec = LagrangianSpec::mechanical(1, Potential::cosine(1.0, 1));
        let st = VelocityStencil::new(&g, 0.25, 2).unwrap();
        build_kernel(&g, &spec, &st, 1.0).unwrap()
    }

    #[test]
    fn single_edge_is_unbalanced_at_both_ends() {
        let k = kernel();
        let e = k.edge(3, 3); // offset +1
        let m = OccupationMeasure::from_edges(&k, [(e, 1.0)]);
        assert_eq!(closedness_residual(&m, &k), 1.0);
        let r = m.imbalance(&k);
        assert_eq!(r[3], -1.0);
        assert_eq!(r[4], 1.0);
    }

    #[test]
    fn loops_and_two_cycles_are_closed() {
        let k = kernel();
        let there = k.edge(2, 3);
        let back = k.edge(3, 1);
        let m = OccupationMeasure::uniform_cycle(&k, &[there, back]);
        assert_eq!(closedness_residual(&m, &k), 0.0);
        assert!((m.mass() - 1.0).abs() < 1e-15);
        let s = OccupationMeasure::from_edges(&k, [(k.self_edge(0), 1.0)]);
        assert_eq!(closedness_residual(&s, &k), 0.0);
        assert_eq!(s.value(&k), -1.0);
        assert_eq!(s.projected_support(), vec![0]);
    }

    #[test]
    fn repeats_merge() {
        let k = kernel();
        let m = OccupationMeasure::from_edges(&k, [(5, 0.25), (1, 0.5), (5, 0.25)]);
        assert_eq!(m.weights(), &[(1, 0.5), (5, 0.5)]);
    }
}
