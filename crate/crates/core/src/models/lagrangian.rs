//! Lagrangian / Hamiltonian families on the torus.
//!
//! * `mechanical`: `L = ½|v|² − V(x)`, `H = ½|p|² + V(x)`
//! * `transport`:  `L = ½|v − ω|² − V(x)`, `H = ½|p|² + p·ω + V(x)`
//! * `tabulated`:  `H = Σ_a k(p_a) + V(x)` with `k` sampled on a momentum grid;
//!   `L` is obtained through the discrete Legendre transform of `k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::legendre::conjugate_at;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineMode {
    pub amplitude: f64,
    /// Integer wave vector; the second entry is ignored in 1-D.
    #[serde(default = "default_wavenumber")]
    pub wavenumber: [i32; 2],
    #[serde(default)]
    pub phase: f64,
}

fn default_wavenumber() -> [i32; 2] {
    [1, 0]
}

/// Potential values on the nodes of a periodic lattice, interpolated
/// (multi)linearly with wrap-around between nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTable {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
}

impl NodeTable {
    pub fn new(sizes: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = sizes.iter().product();
        if sizes.is_empty() || sizes.len() > 2 || expected != values.len() || expected == 0 {
            return Err(Error::InvalidArgument(format!(
                "node table with sizes {sizes:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite potential value".into()));
        }
        Ok(Self { sizes, values })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i + self.sizes[0] * j]
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let n0 = self.sizes[0];
        let s0 = x[0].rem_euclid(1.0) * n0 as f64;
        let i0 = (s0.floor() as usize) % n0;
        let t0 = s0 - s0.floor();
        let i0n = (i0 + 1) % n0;
        if self.sizes.len() == 1 {
            return (1.0 - t0) * self.at(i0, 0) + t0 * self.at(i0n, 0);
        }
        let n1 = self.sizes[1];
        let s1 = x[1].rem_euclid(1.0) * n1 as f64;
        let i1 = (s1.floor() as usize) % n1;
        let t1 = s1 - s1.floor();
        let i1n = (i1 + 1) % n1;
        (1.0 - t1) * ((1.0 - t0) * self.at(i0, i1) + t0 * self.at(i0n, i1))
            + t1 * ((1.0 - t0) * self.at(i0, i1n) + t0 * self.at(i0n, i1n))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    Cosine { modes: Vec<CosineMode> },
    Table(NodeTable),
}

impl Potential {
    /// `amplitude · cos(2π k·x)` in one dimension.
    pub fn cosine(amplitude: f64, wavenumber: i32) -> Self {
        Potential::Cosine {
            modes: vec![CosineMode {
                amplitude,
                wavenumber: [wavenumber, 0],
                phase: 0.0,
            }],
        }
    }

    pub fn eval(&self, x: [f64; 2], dim: usize) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine { modes } => modes
                .iter()
                .map(|m| {
                    let mut kx = m.wavenumber[0] as f64 * x[0];
                    if dim == 2 {
                        kx += m.wavenumber[1] as f64 * x[1];
                    }
                    m.amplitude * (2.0 * PI * kx + m.phase).cos()
                })
                .sum(),
            Potential::Table(t) => t.eval(x),
        }
    }
}

/// Convex one-dimensional kinetic Hamiltonian `k(p)` sampled on a uniform momentum grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticTable {
    pub p_min: f64,
    pub p_max: f64,
    pub values: Vec<f64>,
}

impl KineticTable {
    pub fn new(p_min: f64, p_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(p_max > p_min) || values.len() < 3 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "kinetic table needs p_min < p_max and >= 3 finite samples".into(),
            ));
        }
        Ok(Self {
            p_min,
            p_max,
            values,
        })
    }

    /// `½p²` sampled on `[-half_width, half_width]`.
    pub fn quadratic(half_width: f64, count: usize) -> Self {
        let grid = super::legendre::uniform_grid(-half_width, half_width, count);
        let values = grid.iter().map(|p| 0.5 * p * p).collect();
        Self {
            p_min: -half_width,
            p_max: half_width,
            values,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        super::legendre::uniform_grid(self.p_min, self.p_max, self.values.len())
    }

    fn step(&self) -> f64 {
        (self.p_max - self.p_min) / (self.values.len() - 1) as f64
    }

    /// Linear interpolation inside the sampled range, `+∞` outside.
    pub fn eval(&self, p: f64) -> f64 {
        if p < self.p_min || p > self.p_max {
            return f64::INFINITY;
        }
        let s = (p - self.p_min) / self.step();
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    /// Conjugate `k*(v)` over the sampled box.
    pub fn conjugate(&self, v: f64) -> f64 {
        let step = self.step();
        let mut best = f64::NEG_INFINITY;
        for (i, &h) in self.values.iter().enumerate() {
            let val = (self.p_min + i as f64 * step) * v - h;
            if val > best {
                best = val;
            }
        }
        best
    }

    fn argmin_momentum(&self) -> f64 {
        let grid = self.grid();
        let (_, arg) = conjugate_at(&self.values, &grid, 0.0);
        grid[arg]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Mechanical,
    Transport { drift: [f64; 2] },
    Tabulated { kinetic: KineticTable },
}

/// A Lagrangian on the `dim`-torus with its Hamiltonian, plus the optional
/// velocity search box enforced by [`LagrangianSpec::lagrangian`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangianSpec {
    pub dim: usize,
    pub family: Family,
    pub potential: Potential,
    #[serde(default)]
    pub velocity_box: Option<f64>,
}

impl LagrangianSpec {
    pub fn mechanical(dim: usize, potential: Potential) -> Self {
        Self {
            dim,
            family: Family::Mechanical,
            potential,
            velocity_box: None,
        }
    }

    pub fn transport(dim: usize, drift: [f64; 2], potential: Potential) -> Self {
        Self {
            dim,
            family: Family::Transport { drift },
            potential,
            velocity_box: None,
        }
    }

    pub fn tabulated(dim: usize, potential: Potential, kinetic: KineticTable) -> Self {
        Self {
            dim,
            family: Family::Tabulated { kinetic },
            potential,
            velocity_box: None,
        }
    }

    pub fn with_velocity_box(mut self, half_width: f64) -> Self {
        self.velocity_box = Some(half_width);
        self
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Mechanical => "mechanical",
            Family::Transport { .. } => "transport",
            Family::Tabulated { .. } => "tabulated",
        }
    }

    /// True when `L(x, ·)` is minimized at `v = 0` for every `x`.
    pub fn is_mechanical(&self) -> bool {
        matches!(self.family, Family::Mechanical)
    }

    pub fn potential_at(&self, x: [f64; 2]) -> f64 {
        self.potential.eval(x, self.dim)
    }

    fn norm(&self, v: [f64; 2]) -> f64 {
        if self.dim == 1 {
            v[0].abs()
        } else {
            v[0].hypot(v[1])
        }
    }

    /// `L(x, v)` with the velocity-box check.
    pub fn lagrangian(&self, x: [f64; 2], v: [f64; 2]) -> Result<f64> {
        if let Some(bound) = self.velocity_box {
            let speed = self.norm(v);
            if speed > bound * (1.0 + 1e-12) {
                return Err(Error::VelocityOutOfBox { speed, bound });
            }
        }
        Ok(self.lagrangian_unchecked(x, v))
    }

    pub fn lagrangian_unchecked(&self, x: [f64; 2], v: [f64; 2]) -> f64 {
        let pot = self.potential_at(x);
        let d = self.dim;
        match &self.family {
            Family::Mechanical => {
                0.5 * (v[0] * v[0] + if d == 2 { v[1] * v[1] } else { 0.0 }) - pot
            }
            Family::Transport { drift } => {
                let a = v[0] - drift[0];
                let b = if d == 2 { v[1] - drift[1] } else { 0.0 };
                0.5 * (a * a + b * b) - pot
            }
            Family::Tabulated { kinetic } => {
                let mut k = kinetic.conjugate(v[0]);
                if d == 2 {
                    k += kinetic.conjugate(v[1]);
                }
                k - pot
            }
        }
    }

    pub fn hamiltonian(&self, x: [f64; 2], p: [f64; 2]) -> f64 {
        let pot = self.potential_at(x);
        let d = self.dim;
        match &self.family {
            Family::Mechanical => {
                0.5 * (p[0] * p[0] + if d == 2 { p[1] * p[1] } else { 0.0 }) + pot
            }
            Family::Transport { drift } => {
                let mut h = 0.5 * p[0] * p[0] + p[0] * drift[0];
                if d == 2 {
                    h += 0.5 * p[1] * p[1] + p[1] * drift[1];
                }
                h + pot
            }
            Family::Tabulated { kinetic } => {
                let mut k = kinetic.eval(p[0]);
                if d == 2 {
                    k += kinetic.eval(p[1]);
                }
                k + pot
            }
        }
    }

    /// A minimizer of `H(x, ·)`.
    pub fn momentum_minimizer(&self, _x: [f64; 2]) -> [f64; 2] {
        match &self.family {
            Family::Mechanical => [0.0, 0.0],
            Family::Transport { drift } => {
                if self.dim == 2 {
                    [-drift[0], -drift[1]]
                } else {
                    [-drift[0], 0.0]
                }
            }
            Family::Tabulated { kinetic } => {
                let p = kinetic.argmin_momentum();
                [p, if self.dim == 2 { p } else { 0.0 }]
            }
        }
    }
}
