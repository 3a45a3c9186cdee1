//! Momentum bound `κ_c`, superlinearity offset `A_κ`, sup bound `C0` on
//! `|λ u_λ|`, and the calibrated-curve speed bound `α = A_κ + C0`.
//!
//! Suprema are estimated on a sample lattice in `x` (by default ten points
//! per grid cell) and along rays in `p` / `v`, exploiting convexity: sublevel
//! sets of `H(x, ·)` are star-shaped around a minimizer, and
//! `t ↦ (κ+1)t − L(x, t d)` is concave.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lagrangian::LagrangianSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds {
    /// `sup { |p| : H(x,p) <= c }`.
    pub kappa: f64,
    /// `max (κ+1)|v| − L(x,v)`.
    pub a_kappa: f64,
    /// Bound on `‖λ u_λ‖∞` for the shifted Lagrangian `L + c`.
    pub c0: f64,
    pub alpha: f64,
    /// Half-width of the admissible velocity box (`2α`).
    pub v_search: f64,
    /// The level `c` the bounds were computed at.
    pub level: f64,
}

const RAY_DOUBLINGS: usize = 60;
const BISECTIONS: usize = 80;
const GOLDEN_STEPS: usize = 120;

/// Sample points `i / samples` per axis.
fn sample_points(dim: usize, samples: usize) -> Vec<[f64; 2]> {
    let s = samples.max(1);
    let mut pts = Vec::new();
    for i in 0..s {
        if dim == 1 {
            pts.push([i as f64 / s as f64, 0.0]);
        } else {
            for j in 0..s {
                pts.push([i as f64 / s as f64, j as f64 / s as f64]);
            }
        }
    }
    pts
}

fn directions(dim: usize) -> Vec<[f64; 2]> {
    if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        let m = 72;
        (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    }
}

/// Largest `t >= 0` with `f(t) <= level`, given `f(0) <= level` and `f` convex.
fn ray_extent(f: impl Fn(f64) -> f64, level: f64) -> Option<f64> {
    let mut hi = 1.0;
    let mut n = 0;
    while f(hi) <= level {
        hi *= 2.0;
        n += 1;
        if n > RAY_DOUBLINGS {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Maximum over `t >= 0` of a concave function.
fn concave_max(f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut hi = 1.0;
    let mut n = 0;
    while f(2.0 * hi) >= f(hi) {
        hi *= 2.0;
        n += 1;
        if n > RAY_DOUBLINGS {
            return None;
        }
    }
    let (mut a, mut b) = (0.0, 2.0 * hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_STEPS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    Some(f(0.0).max(fc).max(fd))
}

/// Largest `H(x, 0)` over the sample lattice; an upper bound for the critical value.
pub fn max_h_at_zero(spec: &LagrangianSpec, samples_per_axis: usize) -> f64 {
    sample_points(spec.dim, samples_per_axis)
        .iter()
        .map(|&x| spec.hamiltonian(x, [0.0, 0.0]))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn stability_bounds(
    spec: &LagrangianSpec,
    c: f64,
    samples_per_axis: usize,
) -> Result<StabilityBounds> {
    let xs = sample_points(spec.dim, samples_per_axis);
    let dirs = directions(spec.dim);

    let mut kappa = f64::NEG_INFINITY;
    for &x in &xs {
        let p0 = spec.momentum_minimizer(x);
        if spec.hamiltonian(x, p0) > c {
            continue;
        }
        for d in &dirs {
            let h = |t: f64| spec.hamiltonian(x, [p0[0] + t * d[0], p0[1] + t * d[1]]);
            let t = ray_extent(h, c).ok_or_else(|| {
                Error::InvalidArgument(format!("H(x,·) is not coercive at x = {x:?}"))
            })?;
            let p = [p0[0] + t * d[0], p0[1] + t * d[1]];
            kappa = kappa.max(p[0].hypot(p[1]));
        }
    }
    if !kappa.is_finite() {
        return Err(Error::NoSublevel { level: c });
    }

    let mut a_kappa = f64::NEG_INFINITY;
    for &x in &xs {
        for d in &dirs {
            let f = |t: f64| (kappa + 1.0) * t - spec.lagrangian_unchecked(x, [t * d[0], t * d[1]]);
            let m = concave_max(f).ok_or_else(|| {
                Error::NotSuperlinear(format!(
                    "(κ+1)|v| − L(x,v) unbounded at x = {x:?}, direction {d:?}"
                ))
            })?;
            a_kappa = a_kappa.max(m);
        }
    }

    // min_v L(x,v) = −H(x,0) and min_p H(x,p) = −L(x,0).
    let min_l = -xs
        .iter()
        .map(|&x| spec.hamiltonian(x, [0.0, 0.0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_l0 = xs
        .iter()
        .map(|&x| spec.lagrangian_unchecked(x, [0.0, 0.0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let c0 = (min_l + c).abs().max(max_l0 + c);
    let alpha = a_kappa + c0;
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "non-positive speed bound α = {alpha}"
        )));
    }
    Ok(StabilityBounds {
        kappa,
        a_kappa,
        c0,
        alpha,
        v_search: 2.0 * alpha,
        level: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::lagrangian::Potential;

    #[test]
    fn free_quadratic_kappa() {
        let s = LagrangianSpec::mechanical(1, Potential::Zero);
        let b = stability_bounds(&s, 2.0, 40).unwrap();
        assert!((b.kappa - 2.0).abs() < 1e-9, "{}", b.kappa);
    }

    #[test]
    fn pendulum_bounds() {
        let s = LagrangianSpec::mechanical(1, Potential::cosine(1.0, 1));
        let b = stability_bounds(&s, 1.0, 2000).unwrap();
        // oracle: sup_x sqrt(2(1 - cos 2πx)) on a dense lattice
        let oracle = (0..20_000)
            .map(|i| (2.0 * (1.0 - (2.0 * PI * i as f64 / 20_000.0).cos())).sqrt())
            .fold(0.0, f64::max);
        assert!((b.kappa - oracle).abs() < 1e-6, "{} vs {oracle}", b.kappa);
        assert!((b.kappa - 2.0).abs() < 1e-6);
        // A_κ = (κ+1)²/2 + max V, C0 = max(|−1+1|, 1+1)
        assert!((b.a_kappa - 5.5).abs() < 1e-6, "{}", b.a_kappa);
        assert!((b.c0 - 2.0).abs() < 1e-12);
        assert!((b.alpha - 7.5).abs() < 1e-6);
        assert!((b.v_search - 15.0).abs() < 1e-5);
    }

    #[test]
    fn empty_sublevel() {
        let s = LagrangianSpec::mechanical(1, Potential::Zero);
        assert!(matches!(
            stability_bounds(&s, -1.0, 10),
            Err(Error::NoSublevel { .. })
        ));
    }

    #[test]
    fn transport_bounds_cover_drift() {
        let s = LagrangianSpec::transport(1, [1.0, 0.0], Potential::Zero);
        let b = stability_bounds(&s, 0.0, 20).unwrap();
        // H = ½p² + p ≤ 0 ⇔ p ∈ [−2, 0]
        assert!((b.kappa - 2.0).abs() < 1e-9);
        assert!(b.alpha > 1.0);
    }

    #[test]
    fn two_dimensional_kappa() {
        let s = LagrangianSpec::mechanical(2, Potential::Zero);
        let b = stability_bounds(&s, 0.5, 4).unwrap();
        assert!((b.kappa - 1.0).abs() < 1e-9);
    }
}
