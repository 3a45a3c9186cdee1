//! Closed measures as circulations on the action graph, the minimum mean
//! cycle, the Mather linear program, both characterizations of the limit
//! function `u₀`, and the verification battery for the vanishing-discount
//! limit.

pub mod karp;
pub mod lp;
pub mod measure;
pub mod simplex;
pub mod u0;
pub mod verify;

pub use karp::{min_mean_cycle, MeanCycle};
pub use lp::{crash_basis, mather_program, solve_mather_lp, MatherSolveResult, MatherSummary};
pub use measure::{closedness_residual, OccupationMeasure};
pub use simplex::{LinearProgram, SimplexOptions};
pub use u0::{
    compute_u0, compute_u0_with, default_eps_c, u0_mechanical, LimitFunctionResult, U0Method,
};
pub use verify::{
    plateau_violation, sample_nodes, verify_limit, ConvergenceRow, Flag, LimitReport, PrimSample,
    Status, VerifyOptions,
};
