//! Stage-by-stage orchestration of one experiment, with artifacts written as
//! soon as each stage completes.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io;
use crate::action::{
    aubry_report, build_kernel, default_eps_aubry, default_eps_class, default_window,
    fixed_point_residual, peierls_barrier, triangle_violation, ActionKernel, AubryReport,
    BarrierMatrix,
};
use crate::discounted::{
    critical_value_estimate, solve_discounted, CriticalEstimate, CriticalRow, DiscountedSolution,
};
use crate::error::{Error, Result};
use crate::mather::{
    compute_u0_with, default_eps_c, min_mean_cycle, solve_mather_lp, u0_mechanical, verify_limit,
    Flag, LimitFunctionResult, LimitReport, MatherSolveResult, MatherSummary, MeanCycle,
    OccupationMeasure, SimplexOptions, Status, U0Method,
};
use crate::models::{
    max_h_at_zero, stability_bounds, GridFunction, LagrangianSpec, StabilityBounds, TauRule,
    TorusGrid, VelocityStencil,
};

pub const REPORT_VERSION: u32 = 1;

/// Everything up to the critically shifted kernel.
#[derive(Clone, Debug)]
pub struct Setup {
    pub grid: TorusGrid,
    pub spec: LagrangianSpec,
    pub bounds: StabilityBounds,
    pub stencil: VelocityStencil,
    pub cycle: MeanCycle,
    /// Kernel shifted by the cycle's critical value.
    pub kernel: ActionKernel,
}

impl Setup {
    pub fn c_crit(&self) -> f64 {
        self.cycle.critical_value()
    }
}

/// Sample points per axis for the bound estimates.
pub fn bound_samples(cfg: &ExperimentConfig) -> usize {
    let n = cfg.problem.sizes.iter().copied().max().unwrap_or(1);
    cfg.discretization.sampling_factor * n
}

/// Bounds at the level `max H(x, 0)`, the stencil reaching the speed bound,
/// and the kernel shifted by the minimum-mean-cycle critical value.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let grid = cfg.grid().map_err(|e| e.at_stage("config"))?;
    let spec0 = cfg.lagrangian().map_err(|e| e.at_stage("config"))?;
    let samples = bound_samples(cfg);
    let level = max_h_at_zero(&spec0, samples);
    let bounds = stability_bounds(&spec0, level, samples).map_err(|e| e.at_stage("bounds"))?;
    let d = &cfg.discretization;
    let stencil = match d.stencil_radius {
        Some(k) => {
            let tau = match d.tau {
                TauRule::SqrtH => grid.min_spacing().sqrt(),
                TauRule::Fixed(t) => t,
            };
            VelocityStencil::new(&grid, tau, k)
        }
        None => VelocityStencil::for_speed(&grid, bounds.alpha, d.tau),
    }
    .map_err(|e| e.at_stage("stencil"))?;
    // On 2-D grids the stencil corners reach √2 times the per-axis speed, so
    // the default box grows to cover them; an explicit `v_search` is kept as is.
    let velocity_box = d
        .v_search
        .unwrap_or_else(|| bounds.v_search.max(stencil.max_speed()));
    let spec = spec0.with_velocity_box(velocity_box);
    let kernel0 = build_kernel(&grid, &spec, &stencil, 0.0).map_err(|e| e.at_stage("kernel"))?;
    let cycle = min_mean_cycle(&kernel0);
    let kernel = kernel0.with_shift(cycle.critical_value());
    Ok(Setup {
        grid,
        spec,
        bounds,
        stencil,
        cycle,
        kernel,
    })
}

pub fn critical_stage(setup: &Setup, cfg: &ExperimentConfig) -> Result<CriticalEstimate> {
    let s = &cfg.schedule;
    critical_value_estimate(&setup.kernel, &s.lambdas, s.critical_tol, s.max_iter)
        .map_err(|e| e.at_stage("critical"))
}

/// Peierls barrier over the configured window; the matrix is returned even
/// when it failed to stabilize so callers can keep it as a partial artifact.
pub fn barrier_stage(setup: &Setup, cfg: &ExperimentConfig) -> Result<BarrierMatrix> {
    let s = &cfg.schedule;
    let (n0, n1) = match (s.burn_in, s.horizon) {
        (Some(a), Some(b)) => (a, b),
        _ => default_window(&setup.grid),
    };
    peierls_barrier(&setup.kernel, n0, n1, s.barrier_tol).map_err(|e| e.at_stage("peierls"))
}

pub fn ensure_stable(h: &BarrierMatrix) -> Result<()> {
    if h.stable {
        Ok(())
    } else {
        Err(Error::UnstableBarrier {
            residual: h.residual,
            tol: h.tol,
        }
        .at_stage("peierls"))
    }
}

pub fn aubry_stage(
    setup: &Setup,
    cfg: &ExperimentConfig,
    h: &BarrierMatrix,
) -> Result<AubryReport> {
    let tau = setup.kernel.tau();
    let s = &cfg.schedule;
    aubry_report(
        h,
        s.eps_aubry
            .unwrap_or_else(|| default_eps_aubry(&setup.grid, tau)),
        s.eps_class
            .unwrap_or_else(|| default_eps_class(&setup.grid, tau)),
    )
    .map_err(|e| e.at_stage("aubry"))
}

pub fn mather_stage(setup: &Setup) -> Result<MatherSolveResult> {
    solve_mather_lp(&setup.kernel, &SimplexOptions::default()).map_err(|e| e.at_stage("mather"))
}

/// The LP optimum, the minimum mean cycle, and every self-loop whose
/// Lagrangian equals the cycle mean (rest points of the Mather set).
pub fn mather_measures(setup: &Setup, lp: &MatherSolveResult) -> Vec<OccupationMeasure> {
    let k = &setup.kernel;
    let mean = setup.cycle.mean;
    let mut out = vec![
        lp.measure.clone(),
        OccupationMeasure::uniform_cycle(k, &setup.cycle.edges),
    ];
    let slack = 1e-12 * (1.0 + mean.abs());
    for x in 0..k.nodes() {
        let e = k.self_edge(x);
        if (k.lagrangian(e) - mean).abs() <= slack {
            out.push(OccupationMeasure::from_edges(k, [(e, 1.0)]));
        }
    }
    let mut unique: Vec<OccupationMeasure> = Vec::with_capacity(out.len());
    for m in out {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    unique
}

pub fn u0_targets(cfg: &ExperimentConfig, nodes: usize) -> Vec<usize> {
    (0..nodes).step_by(cfg.schedule.target_stride).collect()
}

pub fn u0_stage(
    setup: &Setup,
    cfg: &ExperimentConfig,
    h: &BarrierMatrix,
    lp: &MatherSolveResult,
    c_est: f64,
) -> Result<LimitFunctionResult> {
    let eps_c = cfg
        .schedule
        .eps_c
        .unwrap_or_else(|| default_eps_c(c_est, setup.c_crit()));
    let targets = u0_targets(cfg, setup.kernel.nodes());
    compute_u0_with(
        h,
        &setup.kernel,
        lp,
        c_est,
        eps_c,
        &targets,
        &SimplexOptions::default(),
    )
    .map_err(|e| e.at_stage("u0"))
}

/// Discounted solves over the schedule at the critical shift.
pub fn schedule_stage(setup: &Setup, cfg: &ExperimentConfig) -> Result<Vec<DiscountedSolution>> {
    let s = &cfg.schedule;
    s.lambdas
        .iter()
        .map(|&lambda| solve_discounted(&setup.kernel, lambda, s.solver_tol, s.max_iter))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("discounted"))
}

pub fn prim_stage(setup: &Setup, cfg: &ExperimentConfig) -> Result<Option<DiscountedSolution>> {
    let s = &cfg.schedule;
    s.prim_lambda
        .map(|l| solve_discounted(&setup.kernel, l, s.solver_tol, s.max_iter))
        .transpose()
        .map_err(|e| e.at_stage("discounted"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub family: String,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSummary {
    pub spacing: f64,
    pub tau: f64,
    pub radius: usize,
    pub stencil_size: usize,
    pub max_speed: f64,
    pub v_search: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSummary {
    /// Ergodic estimate from the unshifted discounted solves.
    pub c_est: f64,
    /// `−mean` of the minimum mean cycle; every shifted kernel uses this value.
    pub c_cycle: f64,
    pub cross_check_delta: f64,
    pub spread_shrinks: bool,
    pub warning: Option<String>,
    pub table: Vec<CriticalRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierSummary {
    pub burn_in: usize,
    pub horizon: usize,
    pub residual: f64,
    pub tol: f64,
    pub stable: bool,
    pub min_diagonal: f64,
    pub fixed_point_residual: f64,
    pub triangle_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AubrySummary {
    pub nodes: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub eps_aubry: f64,
    pub eps_class: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0Summary {
    pub method: U0Method,
    pub eps_c: f64,
    pub targets: usize,
    pub min: f64,
    pub max: f64,
    /// `max |u₀^LP − u₀^mech|` over the LP targets (mechanical problems only).
    pub mechanical_gap: Option<f64>,
}

/// One row of `convergence.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub lambda: f64,
    pub sup_error: f64,
    pub min_neg_lambda_u: f64,
    pub max_neg_lambda_u: f64,
    pub lipschitz_quotient: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: u32,
    pub problem: ProblemSummary,
    pub discretization: DiscretizationSummary,
    pub bounds: StabilityBounds,
    pub critical: CriticalSummary,
    pub barrier: BarrierSummary,
    pub aubry: AubrySummary,
    pub mather: MatherSummary,
    pub cycle: MeanCycle,
    pub u0: U0Summary,
    pub convergence: Vec<ConvergenceEntry>,
    pub verification: LimitReport,
    /// Pipeline checks followed by the limit-verification flags.
    pub flags: Vec<Flag>,
    pub passed: bool,
    /// Wall-clock seconds per stage; kept out of `report.json` so reruns are byte-identical.
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl RunReport {
    pub fn flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    pub fn failed_flags(&self) -> Vec<&Flag> {
        self.flags.iter().filter(|f| !f.passed()).collect()
    }
}

struct Clock {
    last: Instant,
    timings: Vec<Timing>,
}

impl Clock {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            timings: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(Timing {
            stage: stage.into(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

/// Everything a full run computes, for callers that need more than the report.
pub struct PipelineOutput {
    pub report: RunReport,
    pub setup: Setup,
    pub barrier: BarrierMatrix,
    pub u0: GridFunction,
    pub u0_result: LimitFunctionResult,
    pub mechanical: Option<LimitFunctionResult>,
    pub mather: MatherSolveResult,
    pub solutions: Vec<DiscountedSolution>,
    pub prim: Option<DiscountedSolution>,
}

/// Runs every stage and writes all artifacts to `cfg.output_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_pipeline_full(cfg).map(|o| o.report)
}

pub fn run_pipeline_full(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    let out = cfg.output_dir.as_path();
    let mut clock = Clock::new();
    let setup = prepare(cfg)?;
    clock.lap("setup");

    let critical = critical_stage(&setup, cfg)?;
    clock.lap("critical");

    let h = barrier_stage(&setup, cfg)?;
    write_barrier(out, &h)?;
    ensure_stable(&h)?;
    clock.lap("peierls");

    let aubry = aubry_stage(&setup, cfg, &h)?;
    write_aubry_csv(&out.join("aubry.csv"), &aubry)?;
    clock.lap("aubry");

    let lp = mather_stage(&setup)?;
    lp.measure
        .write_csv(&out.join("mather_measure.csv"))
        .map_err(|e| e.at_stage("mather"))?;
    clock.lap("mather");

    let u0_result = u0_stage(&setup, cfg, &h, &lp, critical.c_est)?;
    let u0 = u0_result.extend(&h);
    write_u0(out, &u0_result, &u0)?;
    let mechanical = if setup.spec.is_mechanical() {
        Some(
            u0_mechanical(
                &h,
                &setup.kernel,
                &setup.spec,
                critical.c_est,
                u0_result.eps,
            )
            .map_err(|e| e.at_stage("u0"))?,
        )
    } else {
        None
    };
    clock.lap("u0");

    let solutions = schedule_stage(&setup, cfg)?;
    let prim = prim_stage(&setup, cfg)?;
    clock.lap("discounted");

    let measures = mather_measures(&setup, &lp);
    let verification = verify_limit(
        &u0,
        &solutions,
        &measures,
        &setup.kernel,
        prim.as_ref(),
        &cfg.schedule.verify,
    )
    .map_err(|e| e.at_stage("verify"))?;
    clock.lap("verify");

    let convergence = convergence_table(&solutions, &verification);
    write_convergence_csv(&out.join("convergence.csv"), &convergence)?;

    let parts = Parts {
        setup: &setup,
        cfg,
        critical: &critical,
        h: &h,
        aubry: &aubry,
        lp: &lp,
        u0_result: &u0_result,
        u0: &u0,
        mechanical: mechanical.as_ref(),
        solutions: &solutions,
    };
    let mut report = parts.report(convergence, verification);
    report.timings = std::mem::take(&mut clock.timings);
    io::write_json(&out.join("report.json"), &report).map_err(|e| e.at_stage("report"))?;
    Ok(PipelineOutput {
        report,
        setup,
        barrier: h,
        u0,
        u0_result,
        mechanical,
        mather: lp,
        solutions,
        prim,
    })
}

struct Parts<'a> {
    setup: &'a Setup,
    cfg: &'a ExperimentConfig,
    critical: &'a CriticalEstimate,
    h: &'a BarrierMatrix,
    aubry: &'a AubryReport,
    lp: &'a MatherSolveResult,
    u0_result: &'a LimitFunctionResult,
    u0: &'a GridFunction,
    mechanical: Option<&'a LimitFunctionResult>,
    solutions: &'a [DiscountedSolution],
}

impl Parts<'_> {
    fn report(&self, convergence: Vec<ConvergenceEntry>, verification: LimitReport) -> RunReport {
        let setup = self.setup;
        let v = &self.cfg.schedule.verify;
        let c_cycle = setup.c_crit();
        let delta = (self.critical.c_est - c_cycle).abs();
        let (burn_in, horizon) = match self.h.horizon {
            crate::action::Horizon::Window { burn_in, horizon } => (burn_in, horizon),
            crate::action::Horizon::Steps { steps } => (steps, steps),
        };
        let min_diagonal = self.h.diagonal().into_iter().fold(f64::INFINITY, f64::min);
        let fixed_point = fixed_point_residual(self.h, &setup.kernel);
        let triangle = triangle_violation(self.h);
        let mechanical_gap = self.mechanical.map(|m| {
            self.u0_result
                .targets
                .iter()
                .zip(&self.u0_result.values)
                .map(|(&t, &x)| (x - m.values[t]).abs())
                .fold(0.0, f64::max)
        });

        let mut flags = vec![
            Flag::at_most(
                "critical_cross_check",
                delta,
                v.cross_check_tol,
                "|c_est − (−min mean cycle)|",
            ),
            Flag::at_most(
                "barrier_stable",
                self.h.residual,
                self.h.tol,
                "max change of the windowed minimum when the window doubles",
            ),
            Flag::at_most(
                "barrier_diagonal",
                -min_diagonal,
                self.h.tol,
                "−min_y h(y,y)",
            ),
            Flag::at_most(
                "barrier_fixed_point",
                fixed_point,
                self.h.tol,
                "max |min_z h(y,z) + cost(z→x) − h(y,x)|",
            ),
            Flag::at_most(
                "barrier_triangle",
                triangle,
                self.h.tol,
                "max h(y,x) − h(y,z) − h(z,x) over all triples",
            ),
            Flag::at_most(
                "mather_lp_vs_cycle",
                (self.lp.value - setup.cycle.mean).abs(),
                v.lp_tol,
                "|LP value − min mean cycle|",
            ),
            Flag::at_most(
                "mather_closedness",
                self.lp.closedness,
                v.closedness_tol,
                "max node imbalance of the LP measure",
            ),
            Flag::at_most(
                "mather_support_near_aubry",
                support_distance(&setup.grid, &self.lp.measure, &self.aubry.nodes) as f64,
                v.support_cells as f64,
                "grid cells from the projected LP support to the Aubry set",
            ),
        ];
        if let Some(gap) = mechanical_gap {
            flags.push(Flag::at_most(
                "u0_methods_agree",
                gap,
                v.agreement_tol,
                "max |u0 (LP) − u0 (mechanical)| over LP targets",
            ));
        }
        let drop = monotonicity_defect(self.solutions);
        let slack = 2.0 * self.cfg.schedule.solver_tol + v.monotone_slack;
        flags.push(Flag::at_most(
            "monotone_in_lambda",
            drop,
            slack,
            "max_x u_λ(x) − u_λ'(x) over consecutive λ > λ'",
        ));
        let speed = policy_speed(&setup.kernel, self.solutions);
        flags.push(Flag::at_most(
            "policy_speed",
            speed,
            setup.bounds.alpha * (1.0 + 1e-12),
            "max |v| used by an optimal policy, against α",
        ));
        flags.extend(verification.flags.iter().cloned());
        let passed = flags.iter().all(Flag::passed);

        RunReport {
            version: REPORT_VERSION,
            problem: ProblemSummary {
                dim: setup.grid.dim(),
                sizes: setup.grid.sizes().to_vec(),
                family: setup.spec.family_name().into(),
                nodes: setup.grid.len(),
            },
            discretization: DiscretizationSummary {
                spacing: setup.grid.min_spacing(),
                tau: setup.stencil.tau,
                radius: setup.stencil.radius,
                stencil_size: setup.stencil.len(),
                max_speed: setup.stencil.max_speed(),
                v_search: setup.spec.velocity_box.unwrap_or(f64::INFINITY),
            },
            bounds: setup.bounds,
            critical: CriticalSummary {
                c_est: self.critical.c_est,
                c_cycle,
                cross_check_delta: delta,
                spread_shrinks: self.critical.spread_shrinks,
                warning: self.critical.warning.clone(),
                table: self.critical.table.clone(),
            },
            barrier: BarrierSummary {
                burn_in,
                horizon,
                residual: self.h.residual,
                tol: self.h.tol,
                stable: self.h.stable,
                min_diagonal,
                fixed_point_residual: fixed_point,
                triangle_violation: triangle,
            },
            aubry: AubrySummary {
                nodes: self.aubry.nodes.clone(),
                classes: self.aubry.classes.clone(),
                eps_aubry: self.aubry.eps_aubry,
                eps_class: self.aubry.eps_class,
            },
            mather: self.lp.summary(),
            cycle: setup.cycle.clone(),
            u0: U0Summary {
                method: self.u0_result.method,
                eps_c: self.u0_result.eps,
                targets: self.u0_result.targets.len(),
                min: self.u0.min(),
                max: self.u0.max(),
                mechanical_gap,
            },
            convergence,
            verification,
            flags,
            passed,
            timings: Vec::new(),
        }
    }
}

/// Largest Chebyshev index distance from a node carrying projected mass to
/// the nearest Aubry node.
pub fn support_distance(grid: &TorusGrid, measure: &OccupationMeasure, aubry: &[usize]) -> usize {
    measure
        .projected_support()
        .into_iter()
        .map(|x| {
            aubry
                .iter()
                .map(|&y| {
                    let d = grid.index_displacement(x, y);
                    d[0].unsigned_abs().max(d[1].unsigned_abs()) as usize
                })
                .min()
                .unwrap_or(usize::MAX)
        })
        .max()
        .unwrap_or(0)
}

/// `max_x u_λ(x) − u_λ'(x)` over consecutive schedule entries (`λ > λ'`);
/// nonpositive when the values increase as the discount vanishes.
pub fn monotonicity_defect(solutions: &[DiscountedSolution]) -> f64 {
    solutions
        .windows(2)
        .flat_map(|w| {
            w[0].values
                .values()
                .iter()
                .zip(w[1].values.values())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Fastest stencil velocity selected by any of the optimal policies.
pub fn policy_speed(kernel: &ActionKernel, solutions: &[DiscountedSolution]) -> f64 {
    let st = kernel.stencil();
    solutions
        .iter()
        .flat_map(|s| s.policy.iter().map(|&k| st.speed(k)))
        .fold(0.0, f64::max)
}

pub fn convergence_table(
    solutions: &[DiscountedSolution],
    verification: &LimitReport,
) -> Vec<ConvergenceEntry> {
    solutions
        .iter()
        .zip(&verification.table)
        .map(|(s, row)| ConvergenceEntry {
            lambda: s.lambda,
            sup_error: row.sup_error,
            min_neg_lambda_u: -s.lambda * s.values.max(),
            max_neg_lambda_u: -s.lambda * s.values.min(),
            lipschitz_quotient: row.lipschitz_quotient,
            iterations: s.iterations,
        })
        .collect()
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceEntry]) -> Result<()> {
    io::write_csv(
        path,
        &[
            "lambda",
            "sup_error",
            "min_neg_lambda_u",
            "max_neg_lambda_u",
            "lipschitz_quotient",
        ],
        rows.iter().map(|r| {
            vec![
                io::fmt_f64(r.lambda),
                io::fmt_f64(r.sup_error),
                io::fmt_f64(r.min_neg_lambda_u),
                io::fmt_f64(r.max_neg_lambda_u),
                io::fmt_f64(r.lipschitz_quotient),
            ]
        }),
    )
    .map_err(|e| e.at_stage("report"))
}

pub fn write_barrier(dir: &Path, h: &BarrierMatrix) -> Result<()> {
    h.write_binary(&dir.join("barrier.bin"))
        .map_err(|e| e.at_stage("peierls"))
}

/// `node,diagonal,class` rows; `class` indexes the Mather classes.
pub fn write_aubry_csv(path: &Path, report: &AubryReport) -> Result<()> {
    let class_of = |y: usize| {
        report
            .classes
            .iter()
            .position(|c| c.contains(&y))
            .expect("every Aubry node has a class")
    };
    io::write_csv(
        path,
        &["node", "diagonal", "class"],
        report
            .nodes
            .iter()
            .zip(&report.diagonal)
            .map(|(&y, &d)| vec![y.to_string(), io::fmt_f64(d), class_of(y).to_string()]),
    )
    .map_err(|e| e.at_stage("aubry"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0Sidecar {
    pub format: String,
    pub nodes: usize,
    pub method: U0Method,
    pub eps: f64,
    pub targets: usize,
}

/// `u0.csv` (LP targets) and `u0.bin` (every node, extended) with its sidecar.
pub fn write_u0(dir: &Path, result: &LimitFunctionResult, full: &GridFunction) -> Result<()> {
    result
        .write_csv(&dir.join("u0.csv"))
        .and_then(|_| {
            let bin = dir.join("u0.bin");
            io::write_f64_le(&bin, full.values())?;
            io::write_json(
                &io::sidecar_path(&bin),
                &U0Sidecar {
                    format: "f64le".into(),
                    nodes: full.len(),
                    method: result.method,
                    eps: result.eps,
                    targets: result.targets.len(),
                },
            )
        })
        .map_err(|e| e.at_stage("u0"))
}

/// Reads a `u0.bin` dump and checks it against the grid size.
pub fn read_u0(path: &Path, nodes: usize) -> Result<GridFunction> {
    let values = io::read_f64_le(path)?;
    if values.len() != nodes {
        return Err(Error::Format {
            path: path.display().to_string(),
            reason: format!("expected {nodes} values, found {}", values.len()),
        });
    }
    Ok(GridFunction::new(values))
}

/// Re-verifies a supplied `u₀` against fresh Mather measures and discounted solves.
pub fn verify_supplied(cfg: &ExperimentConfig, u0: &GridFunction) -> Result<(LimitReport, bool)> {
    let setup = prepare(cfg)?;
    if u0.len() != setup.kernel.nodes() {
        return Err(Error::InvalidArgument(format!(
            "u0 has {} values for {} nodes",
            u0.len(),
            setup.kernel.nodes()
        )));
    }
    let lp = mather_stage(&setup)?;
    let measures = mather_measures(&setup, &lp);
    let solutions = schedule_stage(&setup, cfg)?;
    let prim = prim_stage(&setup, cfg)?;
    let report = verify_limit(
        u0,
        &solutions,
        &measures,
        &setup.kernel,
        prim.as_ref(),
        &cfg.schedule.verify,
    )
    .map_err(|e| e.at_stage("verify"))?;
    let passed = report.flags.iter().all(|f| f.status != Status::Fail);
    Ok((report, passed))
}
