//! The limit function `u₀`: the infimum over (near-)Mather measures `μ` of
//! `x ↦ ∫ h(y, x) dμ(y)`, by per-target linear programs, and the mechanical
//! shortcut `u₀(x) = min { h(y, x) : L(y, 0) + c = 0 }`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lp::{mather_program, solve_mather_lp, MatherSolveResult};
use super::simplex::{solve_from_with_cost, Basis, SimplexOptions};
use crate::action::{ActionKernel, BarrierMatrix};
use crate::error::{Error, Result};
use crate::harness::io;
use crate::models::{GridFunction, LagrangianSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U0Method {
    Lp,
    Mechanical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitFunctionResult {
    pub method: U0Method,
    pub nodes: usize,
    pub targets: Vec<usize>,
    pub values: Vec<f64>,
    /// Per target, the projected minimizing measure as `(node, mass)` pairs.
    pub certificates: Vec<Vec<(usize, f64)>>,
    /// Band (LP) or level-set tolerance (mechanical) used.
    pub eps: f64,
    /// Simplex pivots per target (empty for the mechanical shortcut).
    pub pivots: Vec<usize>,
}

impl LimitFunctionResult {
    /// Values as a grid function when every node was a target.
    pub fn to_grid_function(&self) -> Option<GridFunction> {
        if self.targets.len() != self.nodes || self.targets.iter().enumerate().any(|(i, &t)| i != t)
        {
            return None;
        }
        Some(GridFunction::new(self.values.clone()))
    }

    /// Fills non-target nodes with the smallest certificate average of
    /// `h(·, x)`, an upper bound that is exact at every target.
    pub fn extend(&self, h: &BarrierMatrix) -> GridFunction {
        if let Some(g) = self.to_grid_function() {
            return g;
        }
        let mut certs: Vec<&Vec<(usize, f64)>> = self.certificates.iter().collect();
        certs.sort_by(|a, b| {
            a.len().cmp(&b.len()).then_with(|| {
                a.iter()
                    .zip(b.iter())
                    .map(|(p, q)| p.0.cmp(&q.0).then(p.1.total_cmp(&q.1)))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        certs.dedup();
        let mut values: Vec<f64> = (0..self.nodes)
            .map(|x| {
                certs
                    .iter()
                    .map(|c| c.iter().map(|&(y, m)| m * h.get(y, x)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        for (&t, &v) in self.targets.iter().zip(&self.values) {
            values[t] = v;
        }
        GridFunction::new(values)
    }

    /// `node,value,method` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let tag = match self.method {
            U0Method::Lp => "lp",
            U0Method::Mechanical => "mechanical",
        };
        io::write_csv(
            path,
            &["node", "value", "method"],
            self.targets
                .iter()
                .zip(&self.values)
                .map(|(t, v)| vec![t.to_string(), io::fmt_f64(*v), tag.to_string()]),
        )
    }
}

/// Targets per warm-started chain in [`compute_u0_with`].
pub const U0_CHAIN: usize = 16;

type TargetSolution = (f64, Vec<(usize, f64)>, usize);

/// Default near-optimality band `10·|c_est − c_crit| + 1e-6`.
pub fn default_eps_c(c_est: f64, c_crit: f64) -> f64 {
    10.0 * (c_est - c_crit).abs() + 1e-6
}

/// Solves the Mather LP, then [`compute_u0_with`].
pub fn compute_u0(
    h: &BarrierMatrix,
    kernel: &ActionKernel,
    c_est: f64,
    eps_c: f64,
    targets: &[usize],
    opts: &SimplexOptions,
) -> Result<LimitFunctionResult> {
    let mather = solve_mather_lp(kernel, opts)?;
    compute_u0_with(h, kernel, &mather, c_est, eps_c, targets, opts)
}

/// Per target `x`: minimize `Σ_e m_e h(tail e, x)` over closed unit-mass
/// measures with `Σ m L <= −c_est + eps_c`, warm-started from the optimal
/// Mather basis bordered with the band slack.
pub fn compute_u0_with(
    h: &BarrierMatrix,
    kernel: &ActionKernel,
    mather: &MatherSolveResult,
    c_est: f64,
    eps_c: f64,
    targets: &[usize],
    opts: &SimplexOptions,
) -> Result<LimitFunctionResult> {
    let n = kernel.nodes();
    if h.nodes() != n {
        return Err(Error::InvalidArgument(
            "barrier and kernel sizes differ".into(),
        ));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::InvalidArgument(format!("target {t} out of range")));
    }
    let band = -c_est + eps_c;
    if mather.value > band {
        return Err(Error::Infeasible(format!(
            "no closed measure has value <= −c_est + eps_c = {band:.6e} (minimum {:.6e}); \
             increase eps_c above {:.3e}",
            mather.value,
            mather.value + c_est
        )));
    }
    let mut lp = mather_program(kernel);
    let band_row = lp.rows as u32;
    lp.rows += 1;
    lp.rhs.push(band);
    for (e, col) in lp.columns.iter_mut().enumerate() {
        col.push((band_row, kernel.lagrangian(e)));
    }
    let slack = lp.add_column(vec![(band_row, 1.0)], 0.0);

    // [[B, 0], [L_Bᵀ, 1]]⁻¹ = [[B⁻¹, 0], [−L_Bᵀ B⁻¹, 1]]
    let m = mather.basis.rows();
    let binv = mather.basis.inverse();
    let mut inv = vec![0.0; (m + 1) * (m + 1)];
    for i in 0..m {
        inv[i * (m + 1)..i * (m + 1) + m].copy_from_slice(&binv[i * m..(i + 1) * m]);
    }
    for j in 0..m {
        let s: f64 = mather
            .basis
            .indices
            .iter()
            .enumerate()
            .map(|(i, &e)| kernel.lagrangian(e) * binv[i * m + j])
            .sum();
        inv[m * (m + 1) + j] = -s;
    }
    inv[m * (m + 1) + m] = 1.0;
    let mut indices = mather.basis.indices.clone();
    indices.push(slack);
    let start = Basis::from_parts(indices, inv);

    let edges = kernel.edges();
    let solve_one = |x: usize, start: Basis| -> Result<(TargetSolution, Basis)> {
        let mut cost: Vec<f64> = (0..edges).map(|e| h.get(kernel.tail(e), x)).collect();
        cost.push(0.0);
        let sol = solve_from_with_cost(&lp, &cost, start, opts)?;
        let mut mu = vec![0.0; n];
        for (e, &v) in sol.x[..edges].iter().enumerate() {
            // roundoff-level masses are not part of the certificate
            if v > opts.feasibility_tol {
                mu[kernel.tail(e)] += v;
            }
        }
        let cert: Vec<(usize, f64)> = mu
            .into_iter()
            .enumerate()
            .filter(|(_, m)| *m > 0.0)
            .collect();
        let value = cert.iter().map(|&(y, m)| m * h.get(y, x)).sum();
        Ok(((value, cert, sol.iterations), sol.basis))
    };
    // The first target of every chunk is an anchor; anchors are solved as one
    // chain from the Mather basis, then each chunk continues in parallel from
    // its anchor's optimal basis. Chunking is fixed, so results do not depend
    // on the worker count.
    let chunks: Vec<&[usize]> = targets.chunks(U0_CHAIN).collect();
    let mut anchors = Vec::with_capacity(chunks.len());
    let mut basis = start;
    for chunk in &chunks {
        let (r, b) = solve_one(chunk[0], basis)?;
        anchors.push((r, b.clone()));
        basis = b;
    }
    let solved: Vec<Result<Vec<TargetSolution>>> = chunks
        .par_iter()
        .zip(anchors.into_par_iter())
        .map(|(chunk, (first, mut basis))| {
            let mut out = Vec::with_capacity(chunk.len());
            out.push(first);
            for &x in &chunk[1..] {
                let (r, b) = solve_one(x, basis)?;
                out.push(r);
                basis = b;
            }
            Ok(out)
        })
        .collect();
    let solved: Vec<Result<TargetSolution>> = solved
        .into_iter()
        .flat_map(|r| match r {
            Ok(v) => v.into_iter().map(Ok).collect::<Vec<_>>(),
            Err(e) => vec![Err(e)],
        })
        .collect();
    let mut values = Vec::with_capacity(targets.len());
    let mut certificates = Vec::with_capacity(targets.len());
    let mut pivots = Vec::with_capacity(targets.len());
    for r in solved {
        let (v, c, it) = r?;
        values.push(v);
        certificates.push(c);
        pivots.push(it);
    }
    Ok(LimitFunctionResult {
        method: U0Method::Lp,
        nodes: n,
        targets: targets.to_vec(),
        values,
        certificates,
        eps: eps_c,
        pivots,
    })
}

/// `u₀(x) = min { h(y, x) : |L(y, 0) + c_est| <= eps }` for mechanical
/// Lagrangians (velocity minimizer at rest everywhere).
pub fn u0_mechanical(
    h: &BarrierMatrix,
    kernel: &ActionKernel,
    spec: &LagrangianSpec,
    c_est: f64,
    eps: f64,
) -> Result<LimitFunctionResult> {
    if !spec.is_mechanical() {
        return Err(Error::NotMechanical);
    }
    let n = kernel.nodes();
    let ys: Vec<usize> = (0..n)
        .filter(|&y| (kernel.lagrangian(kernel.self_edge(y)) + c_est).abs() <= eps)
        .collect();
    if ys.is_empty() {
        return Err(Error::EmptyMatherSupport { eps });
    }
    let mut values = Vec::with_capacity(n);
    let mut certificates = Vec::with_capacity(n);
    for x in 0..n {
        let (mut best, mut arg) = (f64::INFINITY, ys[0]);
        for &y in &ys {
            let v = h.get(y, x);
            if v < best {
                best = v;
                arg = y;
            }
        }
        values.push(best);
        certificates.push(vec![(arg, 1.0)]);
    }
    Ok(LimitFunctionResult {
        method: U0Method::Mechanical,
        nodes: n,
        targets: (0..n).collect(),
        values,
        certificates,
        eps,
        pivots: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{build_kernel, default_window, peierls_barrier};
    use crate::models::{Potential, TorusGrid, VelocityStencil};

    fn setup(potential: Potential, n: usize) -> (ActionKernel, BarrierMatrix, LagrangianSpec) {
        let g = TorusGrid::new(1, &[n]).unwrap();
        let spec = LagrangianSpec::mechanical(1, potential);
        let st = VelocityStencil::new(&g, 0.25, n / 4).unwrap();
        let k = build_kernel(&g, &spec, &st, 1.0).unwrap();
        let (n0, n1) = default_window(&g);
        let h = peierls_barrier(&k, n0, n1, 1e-9).unwrap();
        (k, h, spec)
    }

    #[test]
    fn pendulum_lp_matches_top_row() {
        let (k, h, spec) = setup(Potential::cosine(1.0, 1), 24);
        let targets: Vec<usize> = (0..24).collect();
        let lp = compute_u0(&h, &k, 1.0, 1e-6, &targets, &SimplexOptions::default()).unwrap();
        let mech = u0_mechanical(&h, &k, &spec, 1.0, 1e-6).unwrap();
        for x in 0..24 {
            assert!((lp.values[x] - h.get(0, x)).abs() < 1e-12);
            assert_eq!(mech.values[x], h.get(0, x));
        }
    }

    #[test]
    fn two_wells_take_the_nearer_row() {
        let (k, h, spec) = setup(Potential::cosine(1.0, 2), 24);
        let targets = [0, 6, 9, 12, 17];
        let lp = compute_u0(&h, &k, 1.0, 1e-6, &targets, &SimplexOptions::default()).unwrap();
        let mech = u0_mechanical(&h, &k, &spec, 1.0, 1e-6).unwrap();
        for (i, &x) in targets.iter().enumerate() {
            let oracle = h.get(0, x).min(h.get(12, x));
            assert!((lp.values[i] - oracle).abs() < 1e-12, "x={x}");
            assert_eq!(mech.values[x], oracle);
        }
        let full = lp.extend(&h);
        for x in 0..24 {
            assert!(full.get(x) >= mech.values[x] - 1e-12);
        }
    }

    #[test]
    fn band_too_tight_is_reported() {
        let (k, h, _) = setup(Potential::cosine(1.0, 1), 12);
        let err = compute_u0(&h, &k, 1.01, 1e-6, &[3], &SimplexOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn shortcut_is_guarded() {
        let (k, h, _) = setup(Potential::cosine(1.0, 1), 12);
        let spec = LagrangianSpec::transport(1, [1.0, 0.0], Potential::Zero);
        assert!(matches!(
            u0_mechanical(&h, &k, &spec, 0.0, 1e-6),
            Err(Error::NotMechanical)
        ));
    }
}
