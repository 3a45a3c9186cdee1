//! Verification battery for the vanishing-discount limit.

use serde::{Deserialize, Serialize};

use super::measure::OccupationMeasure;
use crate::action::{verify_subsolution, ActionKernel};
use crate::discounted::{discounted_occupation_measure, steps_for_tail, DiscountedSolution};
use crate::error::Result;
use crate::models::{GridFunction, TorusGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

/// One named check with the measured quantity and the threshold it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Flag {
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if value <= threshold {
                Status::Pass
            } else {
                Status::Fail
            },
            value,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub subsolution_tol: f64,
    pub constraint_tol: f64,
    pub maximality_delta: f64,
    pub plateau: f64,
    /// Slack allowed when checking that the sup-error table does not increase.
    pub monotone_slack: f64,
    pub lipschitz_ratio: f64,
    pub prim_tol: f64,
    pub prim_samples: usize,
    /// Tail mass `β^N` at which discounted occupation measures are truncated.
    pub prim_tail: f64,
    /// Allowed gap between the ergodic estimate and the minimum-mean-cycle value.
    pub cross_check_tol: f64,
    /// Allowed gap between the Mather LP value and the cycle mean.
    pub lp_tol: f64,
    pub closedness_tol: f64,
    /// Grid cells the projected Mather support may lie from the Aubry set.
    pub support_cells: usize,
    /// Allowed gap between the LP and mechanical limit functions.
    pub agreement_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            subsolution_tol: 1e-8,
            constraint_tol: 1e-6,
            maximality_delta: 0.01,
            plateau: 0.1,
            monotone_slack: 1e-9,
            lipschitz_ratio: 1.5,
            prim_tol: 1e-3,
            prim_samples: 8,
            prim_tail: 1e-10,
            cross_check_tol: 0.05,
            lp_tol: 1e-8,
            closedness_tol: 1e-9,
            support_cells: 1,
            agreement_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub lambda: f64,
    pub sup_error: f64,
    pub lipschitz_quotient: f64,
    /// Largest `∫ u_λ dμ` over the supplied Mather measures.
    pub max_integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimSample {
    pub node: usize,
    pub u_lambda: f64,
    pub u0: f64,
    pub integral: f64,
    /// `u_λ(x) − θ (u₀(x) − ∫u₀ dμ̃)`, exact up to solver tolerance.
    pub weighted_gap: f64,
    /// `u_λ(x) − (u₀(x) − ∫u₀ dμ̃)`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub subsolution_violation: f64,
    pub u0_integrals: Vec<f64>,
    pub table: Vec<ConvergenceRow>,
    pub plateau: f64,
    pub prim_lambda: Option<f64>,
    pub prim: Vec<PrimSample>,
    pub flags: Vec<Flag>,
}

impl LimitReport {
    pub fn passed(&self) -> bool {
        self.flags.iter().all(Flag::passed)
    }

    pub fn flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }
}

/// Sup errors must not increase until they first drop below `plateau`, and
/// stay below it afterwards. Returns the worst violation (<= 0 when it holds).
pub fn plateau_violation(errors: &[f64], plateau: f64, slack: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    let mut reached = false;
    for (i, &e) in errors.iter().enumerate() {
        if reached {
            worst = worst.max(e - plateau);
        } else if i > 0 {
            worst = worst.max(e - errors[i - 1] - slack);
        }
        if e <= plateau {
            reached = true;
        }
    }
    if !reached {
        worst = worst.max(errors.last().copied().unwrap_or(f64::INFINITY) - plateau);
    }
    worst.max(if errors.is_empty() {
        0.0
    } else {
        f64::NEG_INFINITY
    })
}

/// Evenly spaced sample nodes.
pub fn sample_nodes(nodes: usize, count: usize) -> Vec<usize> {
    let count = count.clamp(1, nodes);
    (0..count).map(|i| i * nodes / count).collect()
}

/// Runs checks (a)–(e) plus the discounted-measure and equi-Lipschitz checks.
///
/// `solutions` is the λ schedule (all at the critical shift of `kernel`);
/// `prim` optionally carries an extra solve used for the pointwise lower bound.
pub fn verify_limit(
    u0: &GridFunction,
    solutions: &[DiscountedSolution],
    mathers: &[OccupationMeasure],
    kernel: &ActionKernel,
    prim: Option<&DiscountedSolution>,
    opts: &VerifyOptions,
) -> Result<LimitReport> {
    let grid: &TorusGrid = kernel.grid();
    let mut flags = Vec::new();

    let violation = verify_subsolution(u0, kernel);
    flags.push(Flag::at_most(
        "u0_subsolution",
        violation,
        opts.subsolution_tol,
        "max over edges of u0(head) − u0(tail) − cost",
    ));

    let integrals: Vec<f64> = mathers.iter().map(|m| m.integrate(u0)).collect();
    let worst = integrals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    flags.push(Flag::at_most(
        "u0_constraint",
        worst,
        opts.constraint_tol,
        format!("max ∫u0 dμ over {} Mather measures", mathers.len()),
    ));

    let shifted = worst + opts.maximality_delta;
    flags.push(Flag {
        name: "u0_maximality".into(),
        status: if shifted > opts.constraint_tol {
            Status::Pass
        } else {
            Status::Fail
        },
        value: shifted,
        threshold: opts.constraint_tol,
        detail: format!(
            "max ∫(u0 + {}) dμ must exceed the constraint tolerance",
            opts.maximality_delta
        ),
    });

    let table: Vec<ConvergenceRow> = solutions
        .iter()
        .map(|s| ConvergenceRow {
            lambda: s.lambda,
            sup_error: s.values.sup_distance(u0),
            lipschitz_quotient: s.values.lipschitz_quotient(grid),
            max_integral: mathers
                .iter()
                .map(|m| m.integrate(&s.values))
                .fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    let errors: Vec<f64> = table.iter().map(|r| r.sup_error).collect();
    let plateau = errors.last().copied().unwrap_or(0.0);
    if !errors.is_empty() {
        let v = plateau_violation(&errors, opts.plateau, opts.monotone_slack);
        flags.push(Flag {
            name: "convergence".into(),
            status: if v <= 0.0 { Status::Pass } else { Status::Fail },
            value: plateau,
            threshold: opts.plateau,
            detail: format!("sup error nonincreasing until a plateau; worst violation {v:e}"),
        });
        let worst_int = table
            .iter()
            .map(|r| r.max_integral)
            .fold(f64::NEG_INFINITY, f64::max);
        if !mathers.is_empty() {
            flags.push(Flag::at_most(
                "u_lambda_constraint",
                worst_int,
                opts.constraint_tol,
                "max over λ and Mather measures of ∫u_λ dμ",
            ));
        }
        let qs: Vec<f64> = table.iter().map(|r| r.lipschitz_quotient).collect();
        let (lo, hi) = qs
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &q| (a.min(q), b.max(q)));
        let ratio = if hi == 0.0 { 1.0 } else { hi / lo };
        flags.push(Flag {
            name: "equi_lipschitz".into(),
            status: if ratio < opts.lipschitz_ratio {
                Status::Pass
            } else {
                Status::Fail
            },
            value: ratio,
            threshold: opts.lipschitz_ratio,
            detail: "max / min Lipschitz quotient across the schedule".into(),
        });
    }

    let mut prim_samples = Vec::new();
    if let Some(sol) = prim {
        let steps = steps_for_tail(sol.lambda, sol.tau, opts.prim_tail);
        let theta = sol.theta();
        for x in sample_nodes(kernel.nodes(), opts.prim_samples) {
            let occ = discounted_occupation_measure(sol, kernel, x, steps)?;
            let integral = occ.measure.integrate(u0);
            let ul = sol.values.get(x);
            let target = u0.get(x) - integral;
            prim_samples.push(PrimSample {
                node: x,
                u_lambda: ul,
                u0: u0.get(x),
                integral,
                weighted_gap: ul - theta * target,
                gap: ul - target,
            });
        }
        // the exact discrete bound carries θ; the undiscounted form holds up to O(λτ)
        let exact = prim_samples
            .iter()
            .map(|p| -p.weighted_gap)
            .fold(f64::NEG_INFINITY, f64::max);
        flags.push(Flag::at_most(
            "prim_weighted",
            exact,
            opts.subsolution_tol
                + sol.tol
                + 2.0 * opts.prim_tail * (u0.sup_norm() + sol.values.sup_norm()),
            "max of θ(u0 − ∫u0 dμ̃) − u_λ over samples",
        ));
        let stated = prim_samples
            .iter()
            .map(|p| -p.gap)
            .fold(f64::NEG_INFINITY, f64::max);
        flags.push(Flag::at_most(
            "prim",
            stated,
            opts.prim_tol,
            format!(
                "max of u0 − ∫u0 dμ̃ − u_λ over samples at λ = {}",
                sol.lambda
            ),
        ));
    }

    Ok(LimitReport {
        subsolution_violation: violation,
        u0_integrals: integrals,
        table,
        plateau,
        prim_lambda: prim.map(|s| s.lambda),
        prim: prim_samples,
        flags,
    })
}
