use serde::{Deserialize, Serialize};

use super::barrier::BarrierMatrix;
use crate::error::{Error, Result};
use crate::models::TorusGrid;

/// Aubry nodes, their diagonal barrier values, Mather classes and the
/// `δ_M` matrix restricted to the Aubry set (row-major, Aubry order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AubryReport {
    pub nodes: Vec<usize>,
    pub diagonal: Vec<f64>,
    pub classes: Vec<Vec<usize>>,
    pub delta: Vec<f64>,
    pub eps_aubry: f64,
    pub eps_class: f64,
}

/// Default Aubry tolerance: a quarter of the cheapest round trip to a
/// neighbouring node for a free particle, `h²/τ`.
pub fn default_eps_aubry(grid: &TorusGrid, tau: f64) -> f64 {
    0.25 * grid.min_spacing().powi(2) / tau
}

/// Default class tolerance: two free-particle round trips between neighbours.
pub fn default_eps_class(grid: &TorusGrid, tau: f64) -> f64 {
    2.0 * grid.min_spacing().powi(2) / tau
}

/// `{y : h(y,y) <= eps}`, ascending.
pub fn aubry_set(h: &BarrierMatrix, eps: f64) -> Result<Vec<usize>> {
    let nodes: Vec<usize> = (0..h.nodes()).filter(|&y| h.get(y, y) <= eps).collect();
    if nodes.is_empty() {
        return Err(Error::EmptyAubrySet { eps });
    }
    Ok(nodes)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // smaller root wins so representatives are deterministic
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }
}

/// Connected components of `δ_M(x,y) <= eps` on the Aubry nodes; each class
/// is ascending and classes are ordered by their smallest node.
pub fn mather_classes(h: &BarrierMatrix, aubry: &[usize], eps: f64) -> Vec<Vec<usize>> {
    let m = aubry.len();
    let mut uf = UnionFind((0..m).collect());
    for i in 0..m {
        for j in i + 1..m {
            if h.delta(aubry[i], aubry[j]) <= eps {
                uf.union(i, j);
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for (i, &node) in aubry.iter().enumerate() {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[r]].push(node);
    }
    classes
}

pub fn aubry_report(h: &BarrierMatrix, eps_aubry: f64, eps_class: f64) -> Result<AubryReport> {
    let nodes = aubry_set(h, eps_aubry)?;
    let diagonal = nodes.iter().map(|&y| h.get(y, y)).collect();
    let classes = mather_classes(h, &nodes, eps_class);
    let delta = nodes
        .iter()
        .flat_map(|&x| nodes.iter().map(move |&y| (x, y)))
        .map(|(x, y)| h.delta(x, y))
        .collect();
    Ok(AubryReport {
        nodes,
        diagonal,
        classes,
        delta,
        eps_aubry,
        eps_class,
    })
}
