//! Discounted value iteration, ergodic estimation of the critical value,
//! optimal backward trajectories and discounted occupation measures.

pub mod critical;
pub mod solver;
pub mod trajectory;

pub use critical::{critical_value_estimate, validate_schedule, CriticalEstimate, CriticalRow};
pub use solver::{
    discount_factor, discounted_sweeps, solve_discounted, solve_discounted_from, step_weight,
    DiscountedSolution, SolutionMeta,
};
pub use trajectory::{
    backward_trajectory, calibration_residual, discounted_occupation_measure, steps_for_tail,
    DiscountedOccupationMeasure, TrajectorySample,
};
