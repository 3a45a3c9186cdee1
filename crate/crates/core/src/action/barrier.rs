use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::ActionKernel;
use super::minplus::MinPlusMatrix;
use crate::error::{Error, Result};
use crate::harness::io;
use crate::models::TorusGrid;

/// Which finite-horizon quantity a [`BarrierMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    /// `h_{nτ}`: minimal cost over paths of exactly `steps` edges.
    Steps { steps: usize },
    /// Running minimum of `h_{nτ}` over `n ∈ [burn_in, horizon]`.
    Window { burn_in: usize, horizon: usize },
}

/// Dense node × node action values; row = start node, column = end node.
#[derive(Clone, Debug)]
pub struct BarrierMatrix {
    grid: TorusGrid,
    tau: f64,
    shift: f64,
    matrix: MinPlusMatrix,
    pub horizon: Horizon,
    /// Largest entry-wise change when the window doubles (0 for fixed horizons).
    pub residual: f64,
    pub stable: bool,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierSidecar {
    pub format: String,
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
    pub tau: f64,
    pub shift: f64,
    pub horizon: Horizon,
    pub residual: f64,
    pub stable: bool,
}

impl BarrierMatrix {
    pub fn from_values(kernel: &ActionKernel, values: Vec<f64>, horizon: Horizon) -> Self {
        let n = kernel.nodes();
        Self {
            grid: *kernel.grid(),
            tau: kernel.tau(),
            shift: kernel.shift(),
            matrix: MinPlusMatrix::new(n, values),
            horizon,
            residual: 0.0,
            stable: true,
            tol: 0.0,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn nodes(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.matrix.get(from, to)
    }

    pub fn row(&self, from: usize) -> &[f64] {
        self.matrix.row(from)
    }

    pub fn values(&self) -> &[f64] {
        self.matrix.data()
    }

    pub fn matrix(&self) -> &MinPlusMatrix {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal()
    }

    /// `h(x, y) + h(y, x)`.
    pub fn delta(&self, x: usize, y: usize) -> f64 {
        self.get(x, y) + self.get(y, x)
    }

    pub fn sidecar(&self) -> BarrierSidecar {
        BarrierSidecar {
            format: "f64-le row-major".into(),
            dim: self.grid.dim(),
            sizes: self.grid.sizes().to_vec(),
            rows: self.nodes(),
            cols: self.nodes(),
            tau: self.tau,
            shift: self.shift,
            horizon: self.horizon,
            residual: self.residual,
            stable: self.stable,
        }
    }

    /// `row,col,value` triples, one line per entry.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let n = self.nodes();
        let mut out = String::with_capacity(n * n * 32 + 16);
        out.push_str("row,col,value\n");
        for i in 0..n {
            for (j, v) in self.row(i).iter().enumerate() {
                out.push_str(&format!("{i},{j},{}\n", io::fmt_f64(*v)));
            }
        }
        io::write_string(path, &out)
    }

    /// Little-endian f64 dump at `path` plus `<path>.json` metadata.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        io::write_f64_le(path, self.values())?;
        io::write_json(&io::sidecar_path(path), &self.sidecar())
    }

    pub fn read_binary(path: &Path) -> Result<(BarrierSidecar, Vec<f64>)> {
        let meta: BarrierSidecar = io::read_json(&io::sidecar_path(path))?;
        let values = io::read_f64_le(path)?;
        if values.len() != meta.rows * meta.cols {
            return Err(Error::Format {
                path: path.display().to_string(),
                reason: format!(
                    "expected {} values, found {}",
                    meta.rows * meta.cols,
                    values.len()
                ),
            });
        }
        Ok((meta, values))
    }
}

/// `h_{nτ}` as the `n`-th min-plus power of the kernel.
pub fn minplus_power(kernel: &ActionKernel, n: usize) -> Result<BarrierMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "horizon must be at least one step".into(),
        ));
    }
    let a = MinPlusMatrix::from_kernel(kernel);
    let p = a.power(n);
    Ok(BarrierMatrix {
        matrix: p,
        ..BarrierMatrix::from_values(
            kernel,
            vec![0.0; kernel.nodes() * kernel.nodes()],
            Horizon::Steps { steps: n },
        )
    })
}

/// Default window `[N0, 2 N0]` with `N0` the power of two at or above four
/// times the longest axis.
pub fn default_window(grid: &TorusGrid) -> (usize, usize) {
    let n_max = grid.sizes().iter().copied().max().unwrap_or(2);
    let n0 = (4 * n_max).next_power_of_two();
    (n0, 2 * n0)
}

/// Peierls barrier as the windowed minimum of `h_{nτ}` over `n ∈ [N0, N1]`.
///
/// The window minimum equals `A^{N0} ⊗ (I ⊕ A)^{N1−N0}`, evaluated by binary
/// powering. Stabilization compares against the doubled window
/// `[2 N0, 2 N1]`: `residual = max |W_doubled − W|`. A mis-shifted kernel
/// makes `h_{nτ}` drift linearly in `n` and is flagged unstable.
pub fn peierls_barrier(
    kernel: &ActionKernel,
    burn_in: usize,
    horizon: usize,
    tol: f64,
) -> Result<BarrierMatrix> {
    if burn_in == 0 || horizon < 2 * burn_in {
        return Err(Error::InvalidArgument(format!(
            "window [{burn_in}, {horizon}] must satisfy N0 >= 1 and N1 >= 2 N0"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = kernel.nodes();
    let a = MinPlusMatrix::from_kernel(kernel);
    let lazy = a.min_with(&MinPlusMatrix::identity(n));
    let head = a.power(burn_in);
    let tail = lazy.power(horizon - burn_in);
    let window = head.product(&tail);
    let doubled = head.product(&head).product(&tail.product(&tail));
    let residual = window
        .data()
        .iter()
        .zip(doubled.data())
        .map(|(a, b)| {
            if a.is_finite() && b.is_finite() {
                (a - b).abs()
            } else if a.is_finite() != b.is_finite() {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(BarrierMatrix {
        grid: *kernel.grid(),
        tau: kernel.tau(),
        shift: kernel.shift(),
        matrix: window,
        horizon: Horizon::Window { burn_in, horizon },
        residual,
        stable: residual <= tol,
        tol,
    })
}

/// Largest `|min_z [h(y,z) + cost(z→x)] − h(y,x)|` over all rows `y`.
pub fn fixed_point_residual(h: &BarrierMatrix, kernel: &ActionKernel) -> f64 {
    let next = h.matrix().product_kernel(kernel);
    next.data()
        .iter()
        .zip(h.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Largest `h(y,x) − h(y,z) − h(z,x)` over all triples.
pub fn triangle_violation(h: &BarrierMatrix) -> f64 {
    let n = h.nodes();
    let hh = h.matrix().product(h.matrix());
    (0..n * n)
        .map(|i| h.values()[i] - hh.data()[i])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `h(y,x) − h(y,z) − h(z,x)` for one triple.
pub fn triangle_defect(h: &BarrierMatrix, y: usize, z: usize, x: usize) -> f64 {
    h.get(y, x) - h.get(y, z) - h.get(z, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::kernel::build_kernel;
    use crate::models::{LagrangianSpec, Potential, VelocityStencil};

    fn kernel(n: usize, potential: Potential, tau: f64, radius: usize, c: f64) -> ActionKernel {
        let g = TorusGrid::new(1, &[n]).unwrap();
        let spec = LagrangianSpec::mechanical(1, potential);
        let st = VelocityStencil::new(&g, tau, radius).unwrap();
        build_kernel(&g, &spec, &st, c).unwrap()
    }

    #[test]
    fn power_one_is_kernel() {
        let k = kernel(8, Potential::cosine(1.0, 1), 0.25, 2, 1.0);
        let h = minplus_power(&k, 1).unwrap();
        for e in 0..k.edges() {
            assert_eq!(h.get(k.tail(e), k.head(e)), k.cost(e));
        }
        assert!(minplus_power(&k, 0).is_err());
    }

    #[test]
    fn free_particle_two_steps_half_turn() {
        let k = kernel(4, Potential::Zero, 1.0, 1, 0.0);
        let h = minplus_power(&k, 2).unwrap();
        assert!((h.get(0, 2) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn six_is_two_times_four() {
        let k = kernel(10, Potential::cosine(1.0, 1), 0.2, 2, 1.0);
        let h6 = minplus_power(&k, 6).unwrap();
        let h2 = minplus_power(&k, 2).unwrap();
        let h4 = minplus_power(&k, 4).unwrap();
        assert_eq!(h2.matrix().product(h4.matrix()).data(), h6.values());
    }

    #[test]
    fn pendulum_barrier_stabilizes() {
        let k = kernel(32, Potential::cosine(1.0, 1), 0.25, 8, 1.0);
        let g = *k.grid();
        let (n0, n1) = default_window(&g);
        let h = peierls_barrier(&k, n0, n1, 1e-9).unwrap();
        assert!(h.stable, "residual {}", h.residual);
        assert!(h.get(0, 0).abs() < 1e-12);
        assert!(triangle_violation(&h) <= 1e-9);
        assert!(fixed_point_residual(&h, &k) <= 1e-9);
    }

    #[test]
    fn mis_shifted_kernel_is_unstable() {
        for c in [0.9, 1.1] {
            let k = kernel(16, Potential::cosine(1.0, 1), 0.25, 4, c);
            let h = peierls_barrier(&k, 64, 128, 1e-6).unwrap();
            assert!(!h.stable, "c = {c}");
        }
    }

    #[test]
    fn binary_round_trip() {
        let k = kernel(8, Potential::cosine(1.0, 1), 0.25, 2, 1.0);
        let h = minplus_power(&k, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.bin");
        h.write_binary(&p).unwrap();
        let (meta, vals) = BarrierMatrix::read_binary(&p).unwrap();
        assert_eq!(meta.rows, 8);
        assert_eq!(meta.horizon, Horizon::Steps { steps: 3 });
        assert_eq!(vals, h.values());
    }
}
