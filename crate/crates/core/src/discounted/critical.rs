use serde::{Deserialize, Serialize};

use super::solver::solve_discounted;
use crate::action::ActionKernel;
use crate::error::{Error, Result};

/// One row of the ergodic approximation `−λ u_λ → c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub lambda: f64,
    pub min_neg_lambda_u: f64,
    pub max_neg_lambda_u: f64,
    pub midpoint: f64,
    pub spread: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    /// Richardson extrapolation of the last two midpoints.
    pub c_est: f64,
    pub table: Vec<CriticalRow>,
    /// True when the spread of `−λ u_λ` never grows along the schedule.
    pub spread_shrinks: bool,
    pub warning: Option<String>,
}

/// Checks that a discount schedule is strictly decreasing and positive.
pub fn validate_schedule(lambdas: &[f64], min_len: usize) -> Result<()> {
    if lambdas.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "schedule needs at least {min_len} discounts, got {}",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument(
            "discounts must be positive and finite".into(),
        ));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "discount schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Estimates the critical value from unshifted solves (`kernel` is rebuilt
/// with `c = 0`).
///
/// `−λ u_λ = c − λ w_λ` with `w_λ` bounded, so eliminating the linear term
/// between the last two discounts gives `c_est`.
pub fn critical_value_estimate(
    kernel: &ActionKernel,
    lambdas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CriticalEstimate> {
    validate_schedule(lambdas, 3)?;
    let k0 = kernel.with_shift(0.0);
    let mut table = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let s = solve_discounted(&k0, lambda, tol, max_iter)?;
        let lo = -lambda * s.values.max();
        let hi = -lambda * s.values.min();
        table.push(CriticalRow {
            lambda,
            min_neg_lambda_u: lo,
            max_neg_lambda_u: hi,
            midpoint: 0.5 * (lo + hi),
            spread: hi - lo,
            iterations: s.iterations,
        });
    }
    let m = table.len();
    let (a, b) = (&table[m - 2], &table[m - 1]);
    let c_est = (a.lambda * b.midpoint - b.lambda * a.midpoint) / (a.lambda - b.lambda);
    let slack = 16.0 * f64::EPSILON * (1.0 + c_est.abs()) + tol * a.lambda;
    let spread_shrinks = table.windows(2).all(|w| w[1].spread <= w[0].spread + slack);
    let warning = (!spread_shrinks)
        .then(|| "spread of −λu_λ does not shrink; discretization may be too coarse".to_string());
    Ok(CriticalEstimate {
        c_est,
        table,
        spread_shrinks,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::build_kernel;
    use crate::models::{LagrangianSpec, Potential, TorusGrid, VelocityStencil};

    #[test]
    fn schedule_validation() {
        assert!(validate_schedule(&[0.5, 0.25, 0.125], 3).is_ok());
        assert!(validate_schedule(&[0.5, 0.5, 0.125], 3).is_err());
        assert!(validate_schedule(&[0.5, 0.25], 3).is_err());
        assert!(validate_schedule(&[0.5, -0.25, -1.0], 3).is_err());
    }

    #[test]
    fn free_particle_is_critical_at_zero() {
        let g = TorusGrid::new(1, &[8]).unwrap();
        let spec = LagrangianSpec::mechanical(1, Potential::Zero);
        let st = VelocityStencil::new(&g, 0.25, 2).unwrap();
        let k = build_kernel(&g, &spec, &st, 0.0).unwrap();
        let est = critical_value_estimate(&k, &[0.5, 0.25, 0.125], 1e-10, 100_000).unwrap();
        assert_eq!(est.c_est, 0.0);
        assert!(est.spread_shrinks);
    }

    #[test]
    fn representable_transport_is_critical_at_zero() {
        // ω = h·1/τ with h = 1/8, τ = 1/8
        let g = TorusGrid::new(1, &[8]).unwrap();
        let spec = LagrangianSpec::transport(1, [1.0, 0.0], Potential::Zero);
        let st = VelocityStencil::new(&g, 0.125, 2).unwrap();
        let k = build_kernel(&g, &spec, &st, 0.0).unwrap();
        let est = critical_value_estimate(&k, &[0.5, 0.25, 0.125], 1e-10, 100_000).unwrap();
        assert!(est.c_est.abs() < 1e-9, "{}", est.c_est);
    }
}
