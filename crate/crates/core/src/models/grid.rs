//! Periodic node lattices on the flat torus `[0,1)^d`, `d` in {1, 2}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer node displacement, one entry per axis (the second entry is 0 in 1-D).
pub type Offset = [i32; 2];

/// Uniform periodic grid. Node `i` along axis `a` sits at `i / n_a`.
///
/// Nodes are numbered with axis 0 fastest: `index = i0 + n0 * i1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    sizes: [usize; 2],
}

impl TorusGrid {
    pub fn new(dim: usize, sizes: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not in {{1, 2}}"
            )));
        }
        if sizes.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} axis sizes, got {}",
                sizes.len()
            )));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("axis size {n} < 2")));
        }
        let mut s = [1, 1];
        s[..dim].copy_from_slice(sizes);
        Ok(Self { dim, sizes: s })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes[..self.dim]
    }

    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    pub fn len(&self) -> usize {
        self.sizes[0] * self.sizes[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.sizes[axis] as f64
    }

    /// Smallest spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn multi_index(&self, node: usize) -> [usize; 2] {
        [node % self.sizes[0], node / self.sizes[0]]
    }

    pub fn node(&self, idx: [usize; 2]) -> usize {
        idx[0] + self.sizes[0] * idx[1]
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(node);
        let mut x = [i as f64 * self.spacing(0), 0.0];
        if self.dim == 2 {
            x[1] = j as f64 * self.spacing(1);
        }
        x
    }

    /// Node reached from `node` by the integer displacement `offset`, with wrap-around.
    pub fn shift(&self, node: usize, offset: Offset) -> usize {
        let idx = self.multi_index(node);
        let mut out = [0usize; 2];
        for a in 0..2 {
            let n = self.sizes[a] as i64;
            out[a] = (idx[a] as i64 + offset[a] as i64).rem_euclid(n) as usize;
        }
        self.node(out)
    }

    /// Integer displacement `to ⊖ from`, each axis in `[-n/2, n/2)`.
    pub fn index_displacement(&self, from: usize, to: usize) -> Offset {
        let a = self.multi_index(from);
        let b = self.multi_index(to);
        let mut d = [0i32; 2];
        for ax in 0..self.dim {
            let n = self.sizes[ax] as i64;
            let raw = (b[ax] as i64 - a[ax] as i64).rem_euclid(n);
            // representative in [-n/2, n/2)
            let half = n / 2;
            let rep = if raw >= n - half { raw - n } else { raw };
            d[ax] = rep as i32;
        }
        d
    }

    /// Physical displacement `to ⊖ from`, each axis in `[-1/2, 1/2)`.
    pub fn displacement(&self, from: usize, to: usize) -> [f64; 2] {
        let d = self.index_displacement(from, to);
        [
            d[0] as f64 * self.spacing(0),
            if self.dim == 2 {
                d[1] as f64 * self.spacing(1)
            } else {
                0.0
            },
        ]
    }

    /// Euclidean torus distance between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let d = self.displacement(a, b);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    /// Pairs of axis-adjacent nodes `(x, x + e_a)`, each unordered pair listed once
    /// (for `n_a = 2` the two directions coincide and the pair is listed once).
    pub fn neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::with_capacity(self.len() * self.dim);
        for node in 0..self.len() {
            for a in 0..self.dim {
                let mut off = [0, 0];
                off[a] = 1;
                let other = self.shift(node, off);
                if self.sizes[a] == 2 && self.multi_index(node)[a] == 1 {
                    continue;
                }
                pairs.push((node, other));
            }
        }
        pairs
    }
}

/// Representative of a real displacement in `[-1/2, 1/2)`.
pub fn wrap_displacement(d: f64) -> f64 {
    d - (d + 0.5).floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_nodes() {
        let g = TorusGrid::new(1, &[4]).unwrap();
        let xs: Vec<f64> = (0..g.len()).map(|i| g.coords(i)[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(g.spacing(0), 0.25);
    }

    #[test]
    fn two_dimensional_counts() {
        let g = TorusGrid::new(2, &[3, 3]).unwrap();
        assert_eq!(g.len(), 9);
        assert!((g.spacing(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.spacing(1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn displacement_wraps() {
        let g = TorusGrid::new(1, &[10]).unwrap();
        let d = g.displacement(9, 1)[0];
        assert!((d - 0.2).abs() < 1e-15, "{d}");
        assert!((wrap_displacement(0.1 - 0.9) - 0.2).abs() < 1e-12);
        // exactly half a period maps to -1/2
        assert_eq!(g.index_displacement(0, 5)[0], -5);
        assert!((wrap_displacement(0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(TorusGrid::new(3, &[4, 4, 4]).is_err());
        assert!(TorusGrid::new(1, &[1]).is_err());
        assert!(TorusGrid::new(2, &[4]).is_err());
    }

    #[test]
    fn index_maps_round_trip() {
        for g in [
            TorusGrid::new(1, &[7]).unwrap(),
            TorusGrid::new(2, &[5, 3]).unwrap(),
        ] {
            for node in 0..g.len() {
                assert_eq!(g.node(g.multi_index(node)), node);
                let [i, j] = g.multi_index(node);
                assert!(i < g.size(0) && j < g.size(1));
                let x = g.coords(node);
                assert!((0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]));
            }
        }
    }

    #[test]
    fn shift_inverts_displacement() {
        let g = TorusGrid::new(2, &[6, 5]).unwrap();
        for a in 0..g.len() {
            for b in 0..g.len() {
                let d = g.index_displacement(a, b);
                assert_eq!(g.shift(a, d), b);
                assert!(d[0] >= -3 && d[0] < 3 && d[1] >= -2 && d[1] <= 2);
            }
        }
    }
}
