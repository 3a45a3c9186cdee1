//! Karp's minimum mean cycle on the per-unit-time Lagrangian `L(tail, v_k)`.

use serde::{Deserialize, Serialize};

use crate::action::ActionKernel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCycle {
    /// Mean of `L` over the returned cycle, recomputed from its edges.
    pub mean: f64,
    /// Karp's characterization value `min_v max_k (D_n(v) − D_k(v)) / (n − k)`.
    pub karp_value: f64,
    /// Nodes in traversal order (the closing edge returns to `nodes[0]`).
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl MeanCycle {
    /// Critical value implied by the cycle, `−mean`.
    pub fn critical_value(&self) -> f64 {
        -self.mean
    }
}

pub fn min_mean_cycle(kernel: &ActionKernel) -> MeanCycle {
    let n = kernel.nodes();
    // d[k][v]: cheapest k-edge walk ending at v from anywhere; pred stores the edge.
    let mut dist = vec![0.0; (n + 1) * n];
    let mut pred = vec![u32::MAX; (n + 1) * n];
    for k in 1..=n {
        let (prev, cur) = dist.split_at_mut(k * n);
        let prev = &prev[(k - 1) * n..];
        let cur = &mut cur[..n];
        for v in 0..n {
            let mut best = f64::INFINITY;
            let mut arg = u32::MAX;
            for &e in kernel.in_edges(v) {
                let e = e as usize;
                let val = prev[kernel.tail(e)] + kernel.lagrangian(e);
                if val < best || (val == best && (e as u32) < arg) {
                    best = val;
                    arg = e as u32;
                }
            }
            cur[v] = best;
            pred[k * n + v] = arg;
        }
    }
    let mut karp_value = f64::INFINITY;
    let mut v_star = 0;
    for v in 0..n {
        let dn = dist[n * n + v];
        let worst = (0..n)
            .map(|k| (dn - dist[k * n + v]) / (n - k) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst < karp_value {
            karp_value = worst;
            v_star = v;
        }
    }
    // Walk back n edges from v_star; split the walk into simple cycles.
    let mut walk_nodes = vec![v_star];
    let mut walk_edges = Vec::with_capacity(n);
    let mut v = v_star;
    for k in (1..=n).rev() {
        let e = pred[k * n + v] as usize;
        walk_edges.push(e);
        v = kernel.tail(e);
        walk_nodes.push(v);
    }
    // walk_nodes[i+1] --walk_edges[i]--> walk_nodes[i]; reverse to forward order
    walk_nodes.reverse();
    walk_edges.reverse();
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let mut stack_nodes: Vec<usize> = Vec::new();
    let mut stack_edges: Vec<usize> = Vec::new();
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in walk_nodes.iter().enumerate() {
        if pos[x] != usize::MAX {
            let p = pos[x];
            let cyc_edges: Vec<usize> = stack_edges[p..].to_vec();
            let cyc_nodes: Vec<usize> = stack_nodes[p..].to_vec();
            let mean = cyc_edges.iter().map(|&e| kernel.lagrangian(e)).sum::<f64>()
                / cyc_edges.len() as f64;
            if best.as_ref().is_none_or(|b| mean < b.0) {
                best = Some((mean, cyc_nodes.clone(), cyc_edges));
            }
            for &y in &cyc_nodes {
                pos[y] = usize::MAX;
            }
            stack_nodes.truncate(p);
            stack_edges.truncate(p);
        }
        pos[x] = stack_nodes.len();
        stack_nodes.push(x);
        if i < walk_edges.len() {
            stack_edges.push(walk_edges[i]);
        }
    }
    let (mean, nodes, edges) = best.expect("a walk of n edges on n nodes repeats a node");
    MeanCycle {
        mean,
        karp_value,
        nodes,
        edges,
    }
}
