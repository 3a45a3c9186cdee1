use std::path::Path;

use serde::{Deserialize, Serialize};

use super::solver::DiscountedSolution;
use crate::action::ActionKernel;
use crate::error::{Error, Result};
use crate::harness::io;
use crate::mather::OccupationMeasure;

/// A path traced backward in time: `nodes[0]` is the start, and step `i`
/// arrives at `nodes[i]` from `nodes[i + 1]` along stencil index `offsets[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub start: usize,
    pub nodes: Vec<usize>,
    pub offsets: Vec<usize>,
    pub speeds: Vec<f64>,
}

impl TrajectorySample {
    /// Backward path from `start` along the given arriving offsets.
    pub fn from_offsets(kernel: &ActionKernel, start: usize, offsets: &[usize]) -> Result<Self> {
        if start >= kernel.nodes() {
            return Err(Error::InvalidArgument(format!("node {start} out of range")));
        }
        let mut nodes = Vec::with_capacity(offsets.len() + 1);
        nodes.push(start);
        let mut speeds = Vec::with_capacity(offsets.len());
        let mut x = start;
        for &k in offsets {
            if k >= kernel.degree() {
                return Err(Error::InvalidArgument(format!(
                    "offset index {k} out of range"
                )));
            }
            x = kernel.tail(kernel.in_edges(x)[k] as usize);
            nodes.push(x);
            speeds.push(kernel.stencil().speed(k));
        }
        Ok(Self {
            start,
            nodes,
            offsets: offsets.to_vec(),
            speeds,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Edge used by step `i` (from `nodes[i + 1]` to `nodes[i]`).
    pub fn edge(&self, kernel: &ActionKernel, i: usize) -> usize {
        kernel.edge(self.nodes[i + 1], self.offsets[i])
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(0.0, f64::max)
    }

    /// `step,node,offset,speed`; row `i` is the node reached after `i`
    /// backward steps and the offset that led into the previous row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_csv(
            path,
            &["step", "node", "offset", "speed"],
            self.nodes.iter().enumerate().map(|(i, &x)| {
                let (k, s) = if i == 0 {
                    (String::new(), String::new())
                } else {
                    (
                        self.offsets[i - 1].to_string(),
                        io::fmt_f64(self.speeds[i - 1]),
                    )
                };
                vec![i.to_string(), x.to_string(), k, s]
            }),
        )
    }
}

/// Follows the optimal policy backward `steps` times from `x0`.
pub fn backward_trajectory(
    sol: &DiscountedSolution,
    kernel: &ActionKernel,
    x0: usize,
    steps: usize,
) -> Result<TrajectorySample> {
    if x0 >= kernel.nodes() {
        return Err(Error::InvalidArgument(format!("node {x0} out of range")));
    }
    let mut offsets = Vec::with_capacity(steps);
    let mut x = x0;
    for _ in 0..steps {
        let k = sol.policy[x];
        offsets.push(k);
        x = kernel.tail(kernel.in_edges(x)[k] as usize);
    }
    TrajectorySample::from_offsets(kernel, x0, &offsets)
}

/// `β^N u(x_N) + Σ_i β^i θ cost(e_i) − u(x_0)`.
///
/// Telescoping the fixed-point equation makes this `≈ 0` along the policy and
/// `>= −N·tol` along any path.
pub fn calibration_residual(
    sol: &DiscountedSolution,
    kernel: &ActionKernel,
    traj: &TrajectorySample,
) -> f64 {
    let beta = sol.beta();
    let theta = sol.theta();
    let u = &sol.values;
    let mut acc = 0.0;
    let mut w = 1.0;
    for i in 0..traj.len() {
        acc += w * theta * kernel.cost(traj.edge(kernel, i));
        w *= beta;
    }
    w * u.get(*traj.nodes.last().expect("nonempty")) + acc - u.get(traj.start)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountedOccupationMeasure {
    /// Unit-mass edge measure with weights `(1−β)β^i / (1 − β^N)`.
    pub measure: OccupationMeasure,
    pub start: usize,
    pub steps: usize,
    /// `β^N`, the discarded mass before renormalization.
    pub tail: f64,
    /// `Σ_{i<N} (1−β)β^i (L_i + c)`.
    pub truncated_cost: f64,
    /// `λ (u(x_0) − β^N u(x_N))`, which the truncated cost reproduces.
    pub expected_cost: f64,
    pub warning: Option<String>,
}

/// Discounted occupation measure of the optimal backward path from `x0`.
pub fn discounted_occupation_measure(
    sol: &DiscountedSolution,
    kernel: &ActionKernel,
    x0: usize,
    steps: usize,
) -> Result<DiscountedOccupationMeasure> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "at least one step is required".into(),
        ));
    }
    let traj = backward_trajectory(sol, kernel, x0, steps)?;
    let beta = sol.beta();
    let one_minus = -(-sol.lambda * sol.tau).exp_m1();
    let mut pairs = Vec::with_capacity(steps);
    let mut w = 1.0;
    let mut cost = 0.0;
    for i in 0..steps {
        let e = traj.edge(kernel, i);
        pairs.push((e, one_minus * w));
        cost += one_minus * w * (kernel.lagrangian(e) + kernel.shift());
        w *= beta;
    }
    let tail = w;
    let raw = OccupationMeasure::from_edges(kernel, pairs);
    let measure = raw.normalized();
    let last = *traj.nodes.last().expect("nonempty");
    let expected_cost = sol.lambda * (sol.values.get(x0) - tail * sol.values.get(last));
    let warning = (tail > 1e-8).then(|| format!("truncation tail β^N = {tail:e} exceeds 1e-8"));
    Ok(DiscountedOccupationMeasure {
        measure,
        start: x0,
        steps,
        tail,
        truncated_cost: cost,
        expected_cost,
        warning,
    })
}

/// Smallest `N` with `β^N <= tail`.
pub fn steps_for_tail(lambda: f64, tau: f64, tail: f64) -> usize {
    (tail.ln() / (-lambda * tau)).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::build_kernel;
    use crate::discounted::solver::solve_discounted;
    use crate::mather::closedness_residual;
    use crate::models::{LagrangianSpec, Potential, TorusGrid, VelocityStencil};

    fn kernel(n: usize, potential: Potential, c: f64) -> ActionKernel {
        let g = TorusGrid::new(1, &[n]).unwrap();
        let spec = LagrangianSpec::mechanical(1, potential);
        let st = VelocityStencil::new(&g, 0.25, 2).unwrap();
        build_kernel(&g, &spec, &st, c).unwrap()
    }

    #[test]
    fn free_particle_stays_put() {
        let k = kernel(8, Potential::Zero, 0.0);
        let s = solve_discounted(&k, 0.5, 1e-12, 10_000).unwrap();
        let t = backward_trajectory(&s, &k, 3, 10).unwrap();
        assert!(t.nodes.iter().all(|&x| x == 3));
        assert_eq!(calibration_residual(&s, &k, &t), 0.0);
        let m = discounted_occupation_measure(&s, &k, 3, 10).unwrap();
        assert_eq!(m.measure.weights().len(), 1);
        assert_eq!(m.measure.weights()[0].0, k.self_edge(3));
        assert!((m.measure.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pendulum_policy_calibrates() {
        let k = kernel(16, Potential::cosine(1.0, 1), 1.0);
        let tol = 1e-10;
        let s = solve_discounted(&k, 0.05, tol, 1_000_000).unwrap();
        let t = backward_trajectory(&s, &k, 8, 200).unwrap();
        assert!(calibration_residual(&s, &k, &t).abs() <= 200.0 * tol);
        assert_eq!(*t.nodes.last().unwrap(), 0);
        // a lazy detour is never better
        let lazy =
            TrajectorySample::from_offsets(&k, 8, &vec![k.stencil().zero_index(); 200]).unwrap();
        assert!(calibration_residual(&s, &k, &lazy) >= -200.0 * tol);
        assert!(calibration_residual(&s, &k, &lazy) > 0.0);
    }

    #[test]
    fn occupation_identity_and_defect() {
        let k = kernel(16, Potential::cosine(1.0, 1), 1.0);
        let s = solve_discounted(&k, 0.01, 1e-12, 10_000_000).unwrap();
        let n = steps_for_tail(0.01, 0.25, 1e-8);
        let m = discounted_occupation_measure(&s, &k, 8, n).unwrap();
        assert!(m.tail <= 1e-8 && m.warning.is_none());
        assert!((m.truncated_cost - m.expected_cost).abs() <= 1e-10);
        let defect = closedness_residual(&m.measure, &k);
        assert!(defect <= 2.0 * 0.01 * 0.25, "{defect}");
    }
}
