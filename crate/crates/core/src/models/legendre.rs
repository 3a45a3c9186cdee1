//! Discrete Legendre-Fenchel transform on sampled 1-D convex functions.
//!
//! `L(v) = max_{p in grid} (p v - H(p))`. A maximizer sitting on either end of
//! the momentum grid means the grid is too narrow for that velocity; such
//! entries are flagged rather than silently returned.

use crate::error::{Error, Result};

/// Output of [`legendre_transform`]: values on the velocity grid plus a
/// per-entry flag telling whether the maximizer hit the momentum-grid boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Conjugate {
    pub values: Vec<f64>,
    pub truncated: Vec<bool>,
}

impl Conjugate {
    /// The values, or a truncation error naming the first flagged velocity.
    pub fn require_interior(&self, v_grid: &[f64]) -> Result<&[f64]> {
        match self.truncated.iter().position(|&t| t) {
            Some(i) => Err(Error::Truncation {
                velocity: v_grid[i],
            }),
            None => Ok(&self.values),
        }
    }
}

/// Maximize `p v - samples(p)` over the grid; returns the value and the arg index.
pub fn conjugate_at(samples: &[f64], p_grid: &[f64], v: f64) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, (&p, &h)) in p_grid.iter().zip(samples).enumerate() {
        let val = p * v - h;
        if val > best {
            best = val;
            arg = i;
        }
    }
    (best, arg)
}

pub fn legendre_transform(samples: &[f64], p_grid: &[f64], v_grid: &[f64]) -> Result<Conjugate> {
    if samples.len() != p_grid.len() || p_grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "momentum grid and samples must have equal length >= 3".into(),
        ));
    }
    if samples.iter().chain(p_grid).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite Hamiltonian sample".into(),
        ));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "momentum grid must be strictly increasing".into(),
        ));
    }
    let last = p_grid.len() - 1;
    let mut values = Vec::with_capacity(v_grid.len());
    let mut truncated = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let (val, arg) = conjugate_at(samples, p_grid, v);
        values.push(val);
        truncated.push(arg == 0 || arg == last);
    }
    Ok(Conjugate { values, truncated })
}

/// Uniform grid of `count` points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_pm5() -> Vec<f64> {
        uniform_grid(-5.0, 5.0, 1001)
    }

    #[test]
    fn quadratic_is_self_conjugate() {
        let p = grid_pm5();
        let h: Vec<f64> = p.iter().map(|p| 0.5 * p * p).collect();
        let out = legendre_transform(&h, &p, &[1.0]).unwrap();
        assert!((out.values[0] - 0.5).abs() < 1e-3);
        assert!(!out.truncated[0]);
    }

    #[test]
    fn constant_shift_negates() {
        let p = grid_pm5();
        let h: Vec<f64> = p.iter().map(|p| 0.5 * p * p + 1.0).collect();
        let out = legendre_transform(&h, &p, &[0.0]).unwrap();
        assert!((out.values[0] + 1.0).abs() < 1e-3);
    }

    #[test]
    fn biconjugate_recovers_interior() {
        let p = grid_pm5();
        let h: Vec<f64> = p.iter().map(|p| 0.5 * p * p).collect();
        let l = legendre_transform(&h, &p, &p).unwrap();
        let back = legendre_transform(&l.values, &p, &p).unwrap();
        for (i, &pi) in p.iter().enumerate() {
            if pi.abs() < 4.0 {
                assert!((back.values[i] - 0.5 * pi * pi).abs() < 1e-3, "p={pi}");
            }
        }
    }

    #[test]
    fn boundary_maximizer_is_flagged() {
        let p = uniform_grid(-1.0, 1.0, 201);
        let h: Vec<f64> = p.iter().map(|p| 0.5 * p * p).collect();
        let v = [0.5, 3.0];
        let out = legendre_transform(&h, &p, &v).unwrap();
        assert_eq!(out.truncated, vec![false, true]);
        assert!(matches!(
            out.require_interior(&v),
            Err(Error::Truncation { velocity }) if velocity == 3.0
        ));
    }

    #[test]
    fn output_is_convex() {
        let p = grid_pm5();
        let h: Vec<f64> = p.iter().map(|p| p.powi(4) / 4.0).collect();
        let v = uniform_grid(-3.0, 3.0, 301);
        let out = legendre_transform(&h, &p, &v).unwrap();
        for w in out.values.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
        }
    }
}
