use serde::{Deserialize, Serialize};

use super::grid::{Offset, TorusGrid};
use crate::error::{Error, Result};

/// Admissible one-step displacements for a time step `tau`.
///
/// Offsets run over `[-K, K]` per active axis in lexicographic order (axis 1
/// slowest), so the zero offset sits in the middle and index order is the
/// tie-breaking order used by every argmin in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityStencil {
    pub tau: f64,
    pub radius: usize,
    offsets: Vec<Offset>,
    velocities: Vec<[f64; 2]>,
}

/// How the time step is chosen from the grid spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRule {
    /// `τ = √h` (reduced if needed so that the stencil reaching `α` fits in half a period).
    SqrtH,
    Fixed(f64),
}

impl VelocityStencil {
    pub fn new(grid: &TorusGrid, tau: f64, radius: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidStencil(format!(
                "time step {tau} must be positive"
            )));
        }
        let k = radius as i32;
        let mut offsets = Vec::new();
        if grid.dim() == 1 {
            for a in -k..=k {
                offsets.push([a, 0]);
            }
        } else {
            for b in -k..=k {
                for a in -k..=k {
                    offsets.push([a, b]);
                }
            }
        }
        let velocities = offsets
            .iter()
            .map(|o| {
                [
                    o[0] as f64 * grid.spacing(0) / tau,
                    if grid.dim() == 2 {
                        o[1] as f64 * grid.spacing(1) / tau
                    } else {
                        0.0
                    },
                ]
            })
            .collect();
        Ok(Self {
            tau,
            radius,
            offsets,
            velocities,
        })
    }

    /// Default stencil for a speed bound `alpha`: `τ` from `rule`, `K = ceil(α τ / h)`.
    ///
    /// With `TauRule::SqrtH` the step is shrunk when `K` would exceed the largest
    /// unambiguous radius `floor((n - 1) / 2)`, so the maximal speed still reaches `α`.
    pub fn for_speed(grid: &TorusGrid, alpha: f64, rule: TauRule) -> Result<Self> {
        let h = grid.min_spacing();
        let n_min = grid.sizes().iter().copied().min().unwrap_or(2);
        let k_max = (n_min - 1) / 2;
        if k_max == 0 {
            return Err(Error::InvalidStencil(format!(
                "grid with {n_min} nodes per axis admits no non-trivial stencil"
            )));
        }
        let tau = match rule {
            TauRule::SqrtH => h.sqrt().min(k_max as f64 * h / alpha),
            TauRule::Fixed(t) => t,
        };
        let radius = ((alpha * tau / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(grid, tau, radius)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets
    }

    pub fn offset(&self, k: usize) -> Offset {
        self.offsets[k]
    }

    pub fn velocity(&self, k: usize) -> [f64; 2] {
        self.velocities[k]
    }

    pub fn speed(&self, k: usize) -> f64 {
        let v = self.velocities[k];
        v[0].hypot(v[1])
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.len()).map(|k| self.speed(k)).fold(0.0, f64::max)
    }

    pub fn zero_index(&self) -> usize {
        self.len() / 2
    }

    /// Index of `offset`, if present.
    pub fn index_of(&self, offset: Offset) -> Option<usize> {
        self.offsets.iter().position(|&o| o == offset)
    }

    /// Index of the negated offset (the stencil is symmetric).
    pub fn opposite(&self, k: usize) -> usize {
        self.len() - 1 - k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_zero_and_is_symmetric() {
        for g in [
            TorusGrid::new(1, &[16]).unwrap(),
            TorusGrid::new(2, &[8, 8]).unwrap(),
        ] {
            let s = VelocityStencil::new(&g, 0.25, 2).unwrap();
            assert_eq!(s.offset(s.zero_index()), [0, 0]);
            for k in 0..s.len() {
                let o = s.offset(k);
                assert_eq!(s.offset(s.opposite(k)), [-o[0], -o[1]]);
            }
        }
    }

    #[test]
    fn speed_rule_reaches_alpha() {
        let g = TorusGrid::new(1, &[200]).unwrap();
        let s = VelocityStencil::for_speed(&g, 7.5, TauRule::SqrtH).unwrap();
        assert!(s.max_speed() >= 7.5 - 1e-9);
        assert!(s.radius <= 99);
        assert!(s.tau <= (0.005f64).sqrt());
        let g = TorusGrid::new(1, &[64]).unwrap();
        let s = VelocityStencil::for_speed(&g, 0.5, TauRule::SqrtH).unwrap();
        assert_eq!(s.tau, 0.125);
        assert_eq!(s.radius, 4);
    }

    #[test]
    fn rejects_bad_tau() {
        let g = TorusGrid::new(1, &[8]).unwrap();
        assert!(VelocityStencil::new(&g, 0.0, 1).is_err());
        assert!(VelocityStencil::new(&g, f64::NAN, 1).is_err());
    }
}
